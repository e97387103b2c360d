"""Maxima of p variables that share one Bernstein-Orlicz norm bound."""

import math
from dataclasses import dataclass

from .bernstein import bernstein_orlicz_norm
from .orlicz import TAIL_TO_NORM_FACTOR, OrliczParams, TailBound, psi_inverse


@dataclass(frozen=True)
class MaxBoundInput:
    params: OrliczParams
    p: int

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValueError("p must be a positive integer")

    @classmethod
    def from_norms(cls, norms, L):
        """Heterogeneous norms: use the largest one for every variable."""
        norms = list(norms)
        return cls(OrliczParams(L=L, tau=max(norms)), len(norms))


@dataclass(frozen=True)
class ShiftedNormStatement:
    """||(Z - shift)_+||_{Psi_{params.L}} <= params.tau."""

    shift: float
    params: OrliczParams

    def __post_init__(self):
        if not self.shift >= 0:
            raise ValueError("shift must be >= 0")


def max_expectation_bound(inp):
    """E max_j |Z_j| <= tau Psi_L^{-1}(p)."""
    return inp.params.tau * psi_inverse(inp.params.L, inp.p)


def max_bernstein_expectation_bound(profile, p):
    """sigma sqrt(6 log(1+p)) + (3K / sqrt n) log(1+p)."""
    if profile.sigma <= 0:
        raise ValueError("sigma must be positive")
    lg = math.log1p(p)
    return profile.sigma * math.sqrt(6.0 * lg) + 3.0 * profile.K / math.sqrt(profile.n) * lg


def max_bernstein_via_norm(profile, p):
    return max_expectation_bound(MaxBoundInput(bernstein_orlicz_norm(profile), p))


def max_deviation_threshold(inp, t):
    if not t > 0:
        raise ValueError("t must be positive")
    tau, L = inp.params.tau, inp.params.L
    thr = max_expectation_bound(inp) + tau * (math.sqrt(t) + 0.5 * L * t)
    return TailBound(thr, min(1.0, 2.0 * math.exp(-t)))


def max_deviation_norm(inp):
    return ShiftedNormStatement(
        shift=max_expectation_bound(inp),
        params=OrliczParams(L=TAIL_TO_NORM_FACTOR * inp.params.L,
                            tau=TAIL_TO_NORM_FACTOR * inp.params.tau),
    )
