"""Expectation and deviation bounds for sup_g |nu_n(g)| from bracketing entropy.

    E_bar_S = 2^{-S} sqrt n + 14 sum_{s<=S} 2^{-s} sqrt(6 H~_s) + 36 K H~_0 / sqrt n
    E sup |nu_n| <= min_S E_bar_S

Deviation: with L~ = sqrt6 K / (2 sqrt n), for every t > 0,

    P(sup |nu_n| >= min E_bar + 36K/sqrt n + 24 sqrt6 + 24 sqrt6 (sqrt t + L~ t / 2)) <= 2 e^{-t}
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from .bracketing import CHAIN_TAU, chain_L
from .finite_max import ShiftedNormStatement
from .orlicz import TAIL_TO_NORM_FACTOR, OrliczParams, TailBound
from .tree import uniform_tree_L

SQRT6 = math.sqrt(6.0)
SPREAD = 24.0 * SQRT6
ORLICZ_NORM = 72.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class EpBoundInput:
    n: int
    K: float
    profile: object
    S_max: int = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if not self.K >= 1:
            raise ValueError("K must be >= 1")
        if self.S_max is None:
            object.__setattr__(self, "S_max", default_S_max(self.n))
        if self.S_max > self.profile.S:
            raise ValueError(f"entropy profile covers S <= {self.profile.S}, scan needs {self.S_max}")
        # N_0 = N~_0, so both entropies at level 0 agree
        assert self.profile.Hprod[0] == self.profile.Htilde[0]

    @property
    def L_tilde(self):
        return SQRT6 * self.K / (2.0 * math.sqrt(self.n))


def default_S_max(n):
    return max(0, math.ceil(math.log2(n)))


def truncation_levels(inp, S, eps=0.0):
    """K_{s-1} = 2^{-s} sqrt n min(sqrt6 / (3 sqrt H_s), 1/eps), s = 1..S."""
    if S > inp.profile.S:
        raise ValueError("S beyond the entropy profile")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    inv_eps = math.inf if eps == 0 else 1.0 / eps
    rn = math.sqrt(inp.n)
    out = [2.0**-s * rn * min(SQRT6 / (3.0 * math.sqrt(inp.profile.Hprod[s])), inv_eps)
           for s in range(1, S + 1)]
    assert all(b <= a for a, b in zip(out, out[1:])), "truncation levels must be nonincreasing"
    return out


def e_bar(inp, S):
    prof = inp.profile
    rn = math.sqrt(inp.n)
    return (2.0**-S * rn
            + 14.0 * math.fsum(2.0**-s * math.sqrt(6.0 * prof.Htilde[s]) for s in range(S + 1))
            + 36.0 * inp.K * prof.Htilde[0] / rn)


class ExpectationScan(NamedTuple):
    per_S: list
    best_S: int
    best: float


def expectation_bound(inp):
    """Scan E_bar_S over S = 0..S_max; ties go to the smaller S."""
    vals = [e_bar(inp, S) for S in range(inp.S_max + 1)]
    best_S = min(range(len(vals)), key=lambda S: (vals[S], S))
    return ExpectationScan(vals, best_S, vals[best_S])


def chain_expectation(inp, S, eps=0.0):
    """tau sum_s 2^{-s} [sqrt H_s + (L_s/2) H_s] + delta for the truncation levels at eps.

    This is the tree-chain expectation bound before simplification; it is
    at most E_bar_S + 4 eps.
    """
    Ks = truncation_levels(inp, S, eps)
    Ls = chain_L(inp.K, Ks, inp.n)
    H = inp.profile.Hprod
    rn = math.sqrt(inp.n)
    gamma = CHAIN_TAU * math.fsum(2.0**-s * (math.sqrt(H[s]) + 0.5 * Ls[s] * H[s]) for s in range(S + 1))
    delta = 4.0 * rn * math.fsum(4.0**-s / Ks[s - 1] for s in range(1, S + 1)) + rn * 2.0**-S
    return gamma + delta


class ConstantAssembly(NamedTuple):
    L: float
    L_bound: float
    four_tau_term: float
    four_tau_bound: float
    L_slack: float
    four_tau_slack: float


def constant_assembly(inp, eps, S=None):
    """L = sum 2^{-s} L_s (1+s)/4 and 4 tau (1 + L/2) with both of their bounds checked."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    S = inp.S_max if S is None else S
    Ls = chain_L(inp.K, truncation_levels(inp, S, eps), inp.n)
    L = uniform_tree_L(Ls)
    rn = math.sqrt(inp.n)
    L_bound = SQRT6 * inp.K / rn + min(2.0, SQRT6 / eps)
    four_tau = 4.0 * CHAIN_TAU * (1.0 + 0.5 * L)
    four_tau_bound = 36.0 * inp.K / rn + 24.0 * SQRT6
    if L > L_bound * (1.0 + 1e-12) or four_tau > four_tau_bound * (1.0 + 1e-12):
        raise ArithmeticError(f"constant assembly failed: L = {L}, bound {L_bound}; "
                              f"4 tau (1 + L/2) = {four_tau}, bound {four_tau_bound}")
    return ConstantAssembly(L, L_bound, four_tau, four_tau_bound, L_bound - L, four_tau_bound - four_tau)


def deviation_shift(inp, statement_form=False):
    """min_S E_bar_S + 36 K / sqrt n (+ 24 sqrt6 unless the statement form is asked for)."""
    shift = expectation_bound(inp).best + 36.0 * inp.K / math.sqrt(inp.n)
    return shift if statement_form else shift + SPREAD


def deviation_threshold(inp, t, statement_form=False):
    """Threshold exceeded by sup |nu_n| with probability at most min(1, 2 e^{-t}).

    The default includes the standalone 24 sqrt6 term produced when the
    constants are assembled with eps = 3 sqrt t; ``statement_form`` drops it.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    thr = deviation_shift(inp, statement_form) + SPREAD * (math.sqrt(t) + 0.5 * inp.L_tilde * t)
    return TailBound(thr, min(1.0, 2.0 * math.exp(-t)))


def deviation_eps(t):
    return 3.0 * math.sqrt(t)


class EpDeviation(NamedTuple):
    shift: float
    spread_coefficient: float
    L_tilde: float
    orlicz: ShiftedNormStatement


def deviation_orlicz(inp, statement_form=False):
    shift = deviation_shift(inp, statement_form)
    params = OrliczParams(L=TAIL_TO_NORM_FACTOR * inp.L_tilde, tau=ORLICZ_NORM)
    return EpDeviation(shift, SPREAD, inp.L_tilde, ShiftedNormStatement(shift, params))


def massart_threshold(E_sup, K_bound, n, eps, t):
    """(1+eps) E_sup + sqrt(8 t) + (2.5 + 32/eps) K_bound t / sqrt n, probability <= e^{-t}."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not t > 0:
        raise ValueError("t must be positive")
    thr = (1.0 + eps) * E_sup + math.sqrt(2.0 * 4.0 * t) + (2.5 + 32.0 / eps) * K_bound * t / math.sqrt(n)
    return TailBound(thr, min(1.0, math.exp(-t)))
