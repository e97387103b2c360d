"""Bernstein moment condition, Bernstein tail and its Bernstein-Orlicz form.

Condition on the summands, for every m >= 2:

    (1/n) sum_i E|X_i|^m <= (m! / 2) K^(m-2) sigma^2

Under it, with probability at least 1 - 2 e^{-t},
|n^{-1/2} sum_i X_i| <= sigma sqrt(2t) + K t / sqrt(n),
and in norm form ||n^{-1/2} sum X_i||_{Psi_L} <= sqrt6 sigma with
L = sqrt6 K / (sqrt(n) sigma).
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .distributions import Distribution
from .orlicz import OrliczParams, TailBound

SQRT6 = math.sqrt(6.0)
DEFAULT_M_MAX = 20


class BernsteinMomentError(ArithmeticError):
    def __init__(self, m, value):
        self.m = m
        super().__init__(f"absolute moment of order {m} is not finite ({value!r})")


@dataclass(frozen=True)
class BernsteinProfile:
    sigma: float
    K: float
    n: int = 1

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be >= 0")
        if not self.K > 0:
            raise ValueError("K must be > 0")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")


class BernsteinReport(NamedTuple):
    holds: bool
    worst_m: int
    worst_ratio: float
    ratios: dict


def _moment_source(dist_or_sample):
    """Return m -> averaged E|X|^m for a law, a list of laws, or a raw sample."""
    if isinstance(dist_or_sample, Distribution):
        return dist_or_sample.abs_moment
    items = list(dist_or_sample)
    if items and all(isinstance(d, Distribution) for d in items):
        return lambda m: math.fsum(d.abs_moment(m) for d in items) / len(items)
    x = np.abs(np.asarray(items, dtype=float))
    if x.size == 0:
        raise ValueError("empty sample")
    return lambda m: float(np.mean(x ** m))


def check_bernstein(dist_or_sample, sigma, K, m_max=DEFAULT_M_MAX):
    """Check the moment condition for m = 2..m_max; report the worst lhs / rhs ratio."""
    if m_max < 2:
        raise ValueError("m_max must be >= 2")
    moment = _moment_source(dist_or_sample)
    ratios = {}
    for m in range(2, m_max + 1):
        lhs = moment(m)
        if not math.isfinite(lhs):
            raise BernsteinMomentError(m, lhs)
        rhs = 0.5 * math.factorial(m) * K ** (m - 2) * sigma**2
        if rhs > 0:
            ratios[m] = lhs / rhs
        else:
            ratios[m] = 0.0 if lhs == 0 else math.inf
    worst_m = max(ratios, key=lambda m: ratios[m])
    return BernsteinReport(ratios[worst_m] <= 1.0, worst_m, ratios[worst_m], ratios)


def fit_bernstein(dist_or_sample, n=1, m_max=DEFAULT_M_MAX):
    """Profile with sigma^2 = E X^2 and the smallest K passing check_bernstein."""
    moment = _moment_source(dist_or_sample)
    var = moment(2)
    K = 0.0
    for m in range(3, m_max + 1):
        K = max(K, (2.0 * moment(m) / (math.factorial(m) * var)) ** (1.0 / (m - 2)))
    # guard the m-th root against a last-bit shortfall
    return BernsteinProfile(math.sqrt(var), K * (1.0 + 1e-12) if K > 0 else 1e-300, n)


def bernstein_tail(profile, t):
    """sigma sqrt(2t) + K t / sqrt(n), exceeded with probability <= min(1, 2e^{-t})."""
    if not t > 0:
        raise ValueError("t must be positive")
    thr = profile.sigma * math.sqrt(2.0 * t) + profile.K * t / math.sqrt(profile.n)
    return TailBound(thr, min(1.0, 2.0 * math.exp(-t)))


def bernstein_orlicz_norm(profile):
    if profile.sigma == 0:
        raise ValueError("degenerate profile; use bernstein_tail directly")
    return OrliczParams(L=SQRT6 * profile.K / (math.sqrt(profile.n) * profile.sigma),
                        tau=SQRT6 * profile.sigma)
