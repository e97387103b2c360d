import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bernstein_orlicz.bernstein import (BernsteinMomentError, BernsteinProfile, bernstein_orlicz_norm,
                                        bernstein_tail, check_bernstein, fit_bernstein)
from bernstein_orlicz.distributions import CenteredExponential, StandardNormal, TwoPoint, Uniform
from bernstein_orlicz.orlicz import tail_from_norm

# smallest K over m = 3..20 for a centered unit exponential, from moment
# integrals done with scipy quad (independent of the closed-form moments)
CEXP_K_MIN = 0.9830971055135387


def test_fit_centered_exponential():
    prof = fit_bernstein(CenteredExponential(1.0), n=20)
    assert prof.sigma == pytest.approx(1.0, rel=1e-12)
    assert prof.K == pytest.approx(CEXP_K_MIN, rel=1e-11)
    assert prof.K >= CEXP_K_MIN
    assert prof.n == 20


def test_fitted_profile_passes_and_smaller_K_fails():
    d = CenteredExponential(2.0)
    prof = fit_bernstein(d)
    assert check_bernstein(d, prof.sigma, prof.K).holds
    assert not check_bernstein(d, prof.sigma, prof.K * 0.99).holds


def test_check_reports_worst_ratio():
    rep = check_bernstein(CenteredExponential(1.0), 1.0, 0.5)
    assert not rep.holds
    assert rep.worst_m == 20
    assert set(rep.ratios) == set(range(2, 21))
    assert rep.ratios[2] == pytest.approx(1.0)


def test_check_accepts_list_of_laws_and_samples():
    laws = [Uniform(-1, 1), TwoPoint(-1, 1)]
    rep = check_bernstein(laws, 1.0, 1.0)
    # averaged second moment (1/3 + 1) / 2 = 2/3
    assert rep.ratios[2] == pytest.approx(2 / 3)
    x = np.array([1.0, -1.0, 2.0, -2.0])
    rep = check_bernstein(x, math.sqrt(2.5), 2.0)
    assert rep.ratios[2] == pytest.approx(1.0)


def test_infinite_moment_raises():
    class Heavy(StandardNormal):
        def abs_moment(self, m):
            return math.inf if m >= 4 else 1.0

    with pytest.raises(BernsteinMomentError) as err:
        check_bernstein(Heavy(), 1.0, 1.0)
    assert err.value.m == 4


def test_bounded_variable_satisfies_condition():
    # |X| <= M gives E|X|^m <= M^(m-2) E X^2, so K = M/3 suffices for m >= 2
    x = np.random.default_rng(0).uniform(-3, 3, size=500)
    sigma = math.sqrt(np.mean(x**2))
    assert check_bernstein(x, sigma, np.max(np.abs(x)) / 3).holds


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.integers(1, 10_000), st.floats(0.01, 50))
def test_tail_formula(sigma, K, n, t):
    tb = bernstein_tail(BernsteinProfile(sigma, K, n), t)
    assert tb.threshold == pytest.approx(sigma * math.sqrt(2 * t) + K * t / math.sqrt(n), rel=1e-14)
    assert tb.prob_bound == min(1.0, 2 * math.exp(-t))


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.integers(1, 10_000))
def test_orlicz_form_constants(sigma, K, n):
    p = bernstein_orlicz_norm(BernsteinProfile(sigma, K, n))
    assert abs(p.tau - math.sqrt(6) * sigma) <= 1e-12 * p.tau
    assert abs(p.L - math.sqrt(6) * K / (math.sqrt(n) * sigma)) <= 1e-12 * p.L


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.integers(1, 10_000), st.floats(0.01, 50))
def test_norm_form_tail_is_weaker_than_direct_tail(sigma, K, n, t):
    # sqrt6 sigma (sqrt t + L t / 2) with L = sqrt6 K/(sqrt n sigma) dominates sigma sqrt(2t) + K t / sqrt n
    prof = BernsteinProfile(sigma, K, n)
    assert tail_from_norm(bernstein_orlicz_norm(prof), t).threshold >= bernstein_tail(prof, t).threshold


def test_degenerate_profile():
    with pytest.raises(ValueError):
        bernstein_orlicz_norm(BernsteinProfile(0.0, 1.0, 5))
    with pytest.raises(ValueError):
        BernsteinProfile(1.0, 0.0)
    with pytest.raises(ValueError):
        bernstein_tail(BernsteinProfile(1.0, 1.0), 0.0)
