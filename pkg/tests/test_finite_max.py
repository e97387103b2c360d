import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bernstein_orlicz.bernstein import BernsteinProfile
from bernstein_orlicz.finite_max import (MaxBoundInput, max_bernstein_expectation_bound, max_bernstein_via_norm,
                                         max_deviation_norm, max_deviation_threshold, max_expectation_bound)
from bernstein_orlicz.orlicz import OrliczParams, orlicz_norm_quadrature, psi_inverse
from bernstein_orlicz.distributions import StandardNormal

# E max_{j<=p} |Z_j| for standard normals, by quad of 1 - (2 Phi(x) - 1)^p
EXACT_MEAN_MAX = {10: 1.8807156938211622, 100: 2.7469576878061366}


def test_expectation_bound_formula():
    inp = MaxBoundInput(OrliczParams(L=0.5, tau=2.0), 7)
    lg = math.log(8)
    assert max_expectation_bound(inp) == pytest.approx(2.0 * (math.sqrt(lg) + 0.25 * lg), rel=1e-15)


@pytest.mark.parametrize("p", [10, 100])
@pytest.mark.parametrize("L", [0.1, 1.0])
def test_gaussian_expectation_bound_holds(p, L):
    tau = orlicz_norm_quadrature(StandardNormal(), L)
    assert max_expectation_bound(MaxBoundInput(OrliczParams(L, tau), p)) >= EXACT_MEAN_MAX[p]


def test_deviation_threshold():
    inp = MaxBoundInput(OrliczParams(L=0.1, tau=1.0), 10)
    tb = max_deviation_threshold(inp, 1.0)
    assert tb.threshold == pytest.approx(psi_inverse(0.1, 10) + 1.05, rel=1e-14)
    assert tb.prob_bound == pytest.approx(2 / math.e)


def test_deviation_norm_form():
    inp = MaxBoundInput(OrliczParams(L=0.1, tau=1.0), 10)
    st_ = max_deviation_norm(inp)
    assert st_.shift == pytest.approx(max_expectation_bound(inp))
    assert st_.params.L == pytest.approx(math.sqrt(3) * 0.1) and st_.params.tau == pytest.approx(math.sqrt(3))


def test_from_norms_takes_largest():
    inp = MaxBoundInput.from_norms([0.5, 2.0, 1.0], L=0.3)
    assert inp.p == 3 and inp.params.tau == 2.0 and inp.params.L == 0.3


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.integers(1, 1000), st.integers(1, 10_000))
def test_bernstein_max_routes_agree(sigma, K, n, p):
    # through the norm: sqrt6 sigma (sqrt(log(1+p)) + (L/2) log(1+p)) with L = sqrt6 K/(sqrt n sigma)
    prof = BernsteinProfile(sigma, K, n)
    assert max_bernstein_via_norm(prof, p) == pytest.approx(max_bernstein_expectation_bound(prof, p), rel=1e-12)


@given(st.floats(0.0, 5), st.floats(0.1, 5), st.integers(1, 10**6), st.integers(1, 10**6))
def test_expectation_bound_monotone_in_p(L, tau, p, q):
    a, b = sorted((p, q))
    assert max_expectation_bound(MaxBoundInput(OrliczParams(L, tau), a)) <= \
        max_expectation_bound(MaxBoundInput(OrliczParams(L, tau), b))


def test_rejects_bad_p():
    with pytest.raises(ValueError):
        MaxBoundInput(OrliczParams(1.0, 1.0), 0)
    with pytest.raises(ValueError):
        max_deviation_threshold(MaxBoundInput(OrliczParams(1.0, 1.0), 2), -1.0)
