import math

import numpy as np
import pytest
from scipy import integrate, stats

from bernstein_orlicz.distributions import (CenteredExponential, Empirical, ExactTail, StandardNormal, TwoPoint,
                                            Uniform, from_dict)

CONTINUOUS = [StandardNormal(), CenteredExponential(2.0), Uniform(0, 3), Uniform(-1, 1), ExactTail(1.5, 0.7)]


@pytest.mark.parametrize("d", CONTINUOUS, ids=repr)
def test_ppf_inverts_cdf(d):
    u = np.linspace(0.01, 0.99, 25)
    np.testing.assert_allclose(d.cdf(d.ppf(u)), u, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("d", CONTINUOUS, ids=repr)
def test_abs_sf_matches_sampling(d):
    u = (np.arange(200_000) + 0.5) / 200_000
    a = np.abs(d.ppf(u))
    for x in (0.2, 1.0, 2.5):
        assert float(d.abs_sf(x)) == pytest.approx(np.mean(a > x), abs=2e-4)


@pytest.mark.parametrize("d", [StandardNormal(), CenteredExponential(1.5), Uniform(-1, 2)], ids=repr)
@pytest.mark.parametrize("m", [2, 3, 5])
def test_abs_moment_by_quadrature(d, m):
    # E|X|^m = m int_0^inf x^(m-1) P(|X| > x) dx
    upper = d.abs_upper if math.isfinite(d.abs_upper) else 200.0
    val = m * integrate.quad(lambda x: x ** (m - 1) * float(d.abs_sf(x)), 0, upper, limit=200,
                             points=[1 / 1.5] if isinstance(d, CenteredExponential) else None)[0]
    assert d.abs_moment(m) == pytest.approx(val, rel=1e-8)


def test_normal_against_scipy():
    x = np.array([-2.0, 0.3, 1.7])
    np.testing.assert_allclose(StandardNormal().cdf(x), stats.norm.cdf(x), rtol=1e-14)
    assert float(StandardNormal().log_abs_sf(40.0)) == pytest.approx(math.log(2) + stats.norm.logsf(40.0))


def test_exact_tail_law():
    d = ExactTail(2.0, 0.5)
    for t in (0.1, 1.0, 3.0):
        x = 2.0 * (math.sqrt(t) + 0.25 * t)
        assert float(d.abs_sf(x)) == pytest.approx(min(1.0, 2 * math.exp(-t)), rel=1e-12)


def test_atoms():
    vals, probs = TwoPoint(-1, 2, 0.25).atoms()
    # p is the mass on a
    assert list(zip(vals.tolist(), probs.tolist())) == [(-1.0, 0.25), (2.0, 0.75)]
    vals, probs = Empirical((1.0, 1.0, 3.0)).atoms()
    assert math.fsum(probs) == pytest.approx(1.0)


@pytest.mark.parametrize("d", CONTINUOUS + [TwoPoint(-1, 1), Empirical((0.5, -2.0))], ids=repr)
def test_dict_roundtrip(d):
    assert from_dict(d.to_dict()) == d


def test_from_dict_unknown():
    with pytest.raises(ValueError):
        from_dict({"kind": "cauchy"})
