"""Small hand-checkable values across modules."""
import math

import pytest

from bernstein_orlicz import bracketing as br
from bernstein_orlicz import ep_bounds as ep
from bernstein_orlicz.bernstein import BernsteinProfile, bernstein_orlicz_norm, bernstein_tail
from bernstein_orlicz.finite_max import (MaxBoundInput, max_bernstein_expectation_bound,
                                         max_deviation_threshold, max_expectation_bound)
from bernstein_orlicz.orlicz import OrliczParams, norm_from_tail, psi_eval, psi_inverse, tail_from_norm

LOG2 = math.log(2.0)


def test_psi_small_L_approaches_gaussian_psi():
    assert abs(psi_eval(1e-6, 1.0) - (math.e - 1.0)) < 1e-5


def test_psi_inverse_values():
    assert psi_inverse(1.0, math.expm1(4.0)) == pytest.approx(2.0 + 2.0, rel=1e-12)
    assert psi_inverse(0.5, 10.0) == pytest.approx(2.148, abs=5e-4)


def test_tail_from_norm_value():
    tb = tail_from_norm(OrliczParams(L=1.0, tau=2.0), 4.0)
    assert tb[0] == pytest.approx(8.0)
    assert tb[1] == pytest.approx(2.0 * math.exp(-4.0))


def test_norm_from_tail_scales_by_root3():
    p = norm_from_tail(2.0, 1.0)
    assert p.tau == pytest.approx(2.0 * math.sqrt(3.0))
    assert p.L == pytest.approx(math.sqrt(3.0))


def test_bernstein_tail_value():
    tb = bernstein_tail(BernsteinProfile(1.0, 1.0, 100), 2.0)
    assert tb[0] == pytest.approx(2.2)


def test_bernstein_tail_zero_variance():
    tb = bernstein_tail(BernsteinProfile(0.0, 1.0, 100), 2.0)
    assert tb[0] == pytest.approx(0.2)


def test_bernstein_norm_constants():
    p = bernstein_orlicz_norm(BernsteinProfile(1.0, 1.0, 6))
    assert p.tau == pytest.approx(math.sqrt(6.0))
    assert p.L == pytest.approx(1.0)
    assert bernstein_orlicz_norm(BernsteinProfile(2.0, 1.0, 24)).L == pytest.approx(0.25)


def test_finite_max_values():
    assert max_expectation_bound(MaxBoundInput(OrliczParams(1.0, 2.0), 2)) == pytest.approx(3.194, abs=1e-3)
    assert max_bernstein_expectation_bound(BernsteinProfile(1.0, 1.0, 9), 1) == pytest.approx(
        math.sqrt(6 * LOG2) + LOG2, rel=1e-12)
    thr = max_deviation_threshold(MaxBoundInput(OrliczParams(0.0, 1.0), 1), 1.0)
    assert thr[0] == pytest.approx(math.sqrt(LOG2) + 1.0, abs=1e-12)


def test_entropy_profile_small():
    prof = br.entropy_profile([1, 2, 4])
    assert prof.Nprod == (1, 2, 8)
    assert prof.Htilde == pytest.approx((LOG2, math.log(3), math.log(5)))
    assert prof.Hprod == pytest.approx((LOG2, math.log(3), math.log(9)))


def test_entropy_sum_constant_counts():
    r = br.entropy_sum_bound(br.entropy_profile([1, 1, 1]))
    assert r.lhs == pytest.approx(0.75 * math.sqrt(LOG2))
    assert r.rhs == pytest.approx(2.5 * math.sqrt(LOG2))
    assert r.holds


def test_truncation_levels_constant_entropy():
    inp = ep.EpBoundInput(100, 1.0, br.entropy_profile([1] * 8), S_max=7)
    levels = ep.truncation_levels(inp, 7)
    for s, k in enumerate(levels, start=1):
        assert k == pytest.approx(2.0**-s * 10.0 * math.sqrt(6.0) / (3.0 * math.sqrt(LOG2)))
    big = ep.truncation_levels(inp, 7, eps=100.0)
    for s, k in enumerate(big, start=1):
        assert k == pytest.approx(2.0**-s * 10.0 / 100.0)


def test_constant_entropy_scan_minimised_at_zero():
    # with constant entropy the level-S bias term is cheaper than one more
    # chaining level, so the scan never leaves S = 0
    inp = ep.EpBoundInput(256, 1.0, br.entropy_profile([1] * 9))
    scan = ep.expectation_bound(inp)
    assert scan.best_S == 0
    assert all(b > a for a, b in zip(scan.per_S, scan.per_S[1:]))


def test_single_level_build():
    cls = br.HalfLineClass(2)
    levels = br.bracket_ladder(cls, 2)
    b = br.build_tree_chain(cls, levels[:1], [], 100)
    assert b.tree.sizes == [levels[0].count]
    assert b.delta == pytest.approx(10.0)
    assert b.cert.tau == pytest.approx(3.0 * math.sqrt(6.0))
    assert br.check_build(b) == []
