import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bernstein_orlicz.bracketing import (CHAIN_TAU, BracketingError, FiniteClass, GeneralizedBracketError,
                                         HalfLineClass, bracket_ladder, build_brackets, build_tree_chain,
                                         chain_delta, chain_L, check_build, class_from_dict, entropy_profile,
                                         entropy_sum_bound, generalized_brackets, minimal_generalized_K)
from bernstein_orlicz.distributions import StandardNormal
from bernstein_orlicz.ep_bounds import EpBoundInput, truncation_levels
from bernstein_orlicz.tree import validate_tree


def covers(level, values):
    lo, up = level.lower[level.assign], level.upper[level.assign]
    return np.all(lo <= values + 1e-12) and np.all(values <= up + 1e-12)


def random_class(seed, p=12, m=20):
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(m))
    vals = rng.uniform(-1, 1, size=(p, m))
    return FiniteClass(vals, probs)


@pytest.mark.parametrize("levels", [1, 2, 3])
def test_half_line_brackets(levels):
    cls = HalfLineClass(levels)
    assert cls.p == 4**levels + 1 and cls.m == 4**levels
    for s in range(1, levels + 1):
        lev = build_brackets(cls, s)
        assert lev.count == 4**s
        # each bracket is the indicator of one quantile cell of mass 4^-s
        np.testing.assert_allclose(lev.widths(cls.w), 2.0**-s, rtol=1e-14)
        assert covers(lev, cls.values)
    assert cls.bracket_counts(levels) == [1] + [4**s for s in range(1, levels + 1)]


def test_half_line_level_zero_envelope():
    cls = HalfLineClass(2)
    lev = generalized_brackets(cls)
    assert lev.count == 1 and covers(lev, cls.values)
    np.testing.assert_array_equal(lev.upper[0] - lev.lower[0], np.ones(cls.m))


def test_half_line_thresholds_under_design():
    cls = HalfLineClass(1, StandardNormal())
    th = cls.thresholds()
    assert th[0] == -np.inf and th[-1] == np.inf
    assert th[2] == pytest.approx(0.0, abs=1e-12)


def test_half_line_cells_of():
    cls = HalfLineClass(1)
    np.testing.assert_array_equal(cls.cells_of(np.array([1e-9, 0.25, 0.2500001, 0.99])), [0, 0, 1, 3])


@pytest.mark.parametrize("seed", range(5))
def test_finite_class_brackets(seed):
    cls = random_class(seed)
    for s in range(1, 5):
        lev = build_brackets(cls, s)
        assert covers(lev, cls.values)
        assert np.all(lev.widths(cls.w) <= 2.0**-s * (1 + 1e-12))
        assert lev.count <= cls.p


def test_generalized_bracket_error_and_partition():
    # one function takes the value 9 on a cell of mass 0.1: envelope width fails at K = 1
    vals = np.zeros((3, 10))
    vals[0, 0] = 9.0
    vals[1, 1] = -0.5
    cls = FiniteClass(vals, np.full(10, 0.1))
    with pytest.raises(GeneralizedBracketError) as err:
        generalized_brackets(cls, K=1.0, allow_partition=False)
    assert err.value.minimal_K == math.inf  # second moment 8.1 > 1
    # 20 on a cell of mass 0.002: second moment 0.8 passes, the third (16 > 6) fails
    vals[0, 0] = 20.0
    cls = FiniteClass(vals, np.r_[0.002, np.full(9, 0.998 / 9)])
    with pytest.raises(GeneralizedBracketError) as err:
        generalized_brackets(cls, K=1.0, allow_partition=False)
    kmin = err.value.minimal_K
    assert 1.0 < kmin < math.inf
    assert generalized_brackets(cls, K=kmin * (1 + 1e-9), allow_partition=False).count == 1
    lev = generalized_brackets(cls, K=1.0)
    assert lev.count >= 2 and covers(lev, cls.values)


@given(st.lists(st.floats(0.0, 2.0), min_size=3, max_size=10))
def test_minimal_K_is_minimal(width):
    width = np.array(width)
    w = np.full(width.size, 1.0 / width.size)
    K = minimal_generalized_K(width, w)
    if not math.isfinite(K) or K == 0:
        return
    for m in range(2, 21):
        lhs = float(np.dot(width**m, w))
        assert lhs <= 0.5 * math.factorial(m) * (2 * K) ** (m - 2) * (1 + 1e-9)
    smaller = 0.999 * K
    assert any(float(np.dot(width**m, w)) > 0.5 * math.factorial(m) * (2 * smaller) ** (m - 2)
               for m in range(3, 21))


def test_entropy_profile_values():
    prof = entropy_profile([1, 4, 16])
    assert prof.Nprod == (1, 4, 64)
    assert prof.Htilde == pytest.approx([math.log(2), math.log(5), math.log(17)])
    assert prof.Hprod == pytest.approx([math.log(2), math.log(5), math.log(65)])
    assert prof.Hprod[0] == prof.Htilde[0]
    assert not prof.approximate


def test_entropy_profile_huge_products():
    prof = entropy_profile([2**600, 2**600])
    assert prof.approximate
    assert prof.Hprod[1] == pytest.approx(1200 * math.log(2), rel=1e-12)
    with pytest.raises(ValueError):
        entropy_profile([0])


@given(st.lists(st.integers(1, 10**6), min_size=1, max_size=15))
def test_entropy_sum_lemma(counts):
    chk = entropy_sum_bound(entropy_profile(counts))
    assert chk.holds and chk.lhs <= chk.rhs


@given(st.lists(st.integers(1, 10**4), min_size=1, max_size=8))
def test_products_dominate_counts(counts):
    prof = entropy_profile(counts)
    assert all(h >= ht for h, ht in zip(prof.Hprod, prof.Htilde))
    assert all(a <= b for a, b in zip(prof.Hprod, prof.Hprod[1:]))


def test_chain_constants():
    Ks = [2.0, 1.5, 1.0]
    Ls = chain_L(1.2, Ks, 100)
    assert Ls[0] == pytest.approx(4 * math.sqrt(6) * 1.2 / 10)
    assert Ls[2] == pytest.approx(2 * math.sqrt(6) * 4 * 1.5 / 30)
    d = chain_delta(Ks, 100)
    assert d == pytest.approx(40 * (1 / 8 + 1 / 24 + 1 / 64) + 10 / 8)


def half_line_build(n=100, S=3, recipe="proof"):
    cls = HalfLineClass(S)
    levels = bracket_ladder(cls, S)
    inp = EpBoundInput(n, cls.bernstein_K(), entropy_profile(levels), S_max=S)
    return build_tree_chain(cls, levels, truncation_levels(inp, S), n, recipe=recipe)


def test_half_line_tree_chain_certified():
    b = half_line_build()
    assert check_build(b) == []
    assert b.certified()
    assert b.tree.sizes == [1, 4, 16, 64]
    assert validate_tree(b.tree).valid
    for s, g in enumerate(b.tree.generations):
        for j in g:
            assert b.cert.labeled.label_norm[j] <= CHAIN_TAU * 2.0**-s * (1 + 1e-12)
    assert b.delta == pytest.approx(chain_delta(b.K_levels, 100))


def test_indicator_recipe_builds_same_tree():
    a, b = half_line_build(), half_line_build(recipe="indicator")
    assert a.tree == b.tree and b.recipe == "indicator"
    with pytest.raises(ValueError):
        half_line_build(recipe="other")


@pytest.mark.parametrize("seed", range(3))
def test_finite_class_tree_structure(seed):
    cls = random_class(seed)
    levels = bracket_ladder(cls, 3, K=cls.bernstein_K())
    b = build_tree_chain(cls, levels, [4.0, 2.0, 1.0], 200)
    assert validate_tree(b.tree).valid
    msgs = [m for m in check_build(b) if "could not be certified" not in m and "exceeds tau" not in m]
    assert msgs == []
    assert len(b.end_node) == cls.p


def test_build_rejects_bad_truncation_levels():
    cls = HalfLineClass(2)
    levels = bracket_ladder(cls, 2)
    with pytest.raises(BracketingError):
        build_tree_chain(cls, levels, [1.0, 2.0], 50)
    with pytest.raises(BracketingError):
        build_tree_chain(cls, levels, [1.0], 50)


def test_class_roundtrip():
    cls = random_class(1)
    back = class_from_dict(cls.to_dict())
    np.testing.assert_array_equal(back.values, cls.values)
    np.testing.assert_allclose(back.w, cls.w)
    hl = class_from_dict({"kind": "half-line-indicators", "levels": 2, "design": {"kind": "standard-normal"}})
    assert hl.to_dict() == {"kind": "half-line-indicators", "levels": 2, "design": {"kind": "standard-normal"}}


def test_bernstein_K_for_indicators_is_one():
    assert HalfLineClass(2).bernstein_K() == 1.0
