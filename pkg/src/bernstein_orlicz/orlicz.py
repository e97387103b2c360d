"""Bernstein-Orlicz function Psi_L, Orlicz norms and norm <-> tail conversion.

    Psi_L(z) = exp[((sqrt(1 + 2 L z) - 1) / L)^2] - 1,   z >= 0,

with L = 0 read as the sub-Gaussian limit exp(z^2) - 1. The exponent is
evaluated as 2z / (sqrt(1 + 2 L z) + 1), which is the same quantity without
the cancellation at small L z.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize

from . import kernels

#: Loss factor when a 2 e^{-t} tail bound is turned back into a norm bound.
TAIL_TO_NORM_FACTOR = math.sqrt(3.0)

PSI_MAX = 1e300
LOG_PSI_MAX = math.log(PSI_MAX)
#: partial integrals beyond this are declared divergent
DIVERGENCE_LEVEL = 1e6
NORM_RTOL = 1e-12


class NormNotFiniteError(ArithmeticError):
    """E Psi_L(|Z| / c) stayed infinite over the whole search range of c."""

    def __init__(self, c_range):
        self.c_range = c_range
        super().__init__(f"Orlicz norm not finite within range c in [{c_range[0]:.6g}, {c_range[1]:.6g}]")


@dataclass(frozen=True)
class OrliczParams:
    """Norm statement ||Z||_{Psi_L} <= tau."""

    L: float
    tau: float

    def __post_init__(self):
        if not self.L >= 0:
            raise ValueError(f"L must be >= 0, got {self.L}")
        if not self.tau >= 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")


class TailBound(NamedTuple):
    threshold: float
    prob_bound: float


@dataclass(frozen=True)
class TailStatement:
    """P(|Z| > tau (sqrt t + L t / 2)) <= min(1, prob_cap e^{-t}) for every t > 0."""

    tau: float
    L: float
    prob_cap: float = 2.0

    def threshold(self, t):
        return self.tau * (math.sqrt(t) + 0.5 * self.L * t)

    def bound(self, t):
        return min(1.0, self.prob_cap * math.exp(-t))

    def at(self, t):
        return TailBound(self.threshold(t), self.bound(t))


class PsiValue(NamedTuple):
    value: float
    saturated: bool


def _exponent(L, z):
    u = 2.0 * z / (math.sqrt(1.0 + 2.0 * L * z) + 1.0)
    return u * u


def psi_eval_flagged(L, z):
    """Psi_L(z) together with a flag telling whether it hit the 1e300 ceiling."""
    if L < 0 or z < 0:
        raise ValueError("psi_eval needs L >= 0 and z >= 0")
    if math.isinf(z):
        return PsiValue(PSI_MAX, True)
    e = _exponent(L, z)
    if e > LOG_PSI_MAX:
        return PsiValue(PSI_MAX, True)
    return PsiValue(math.expm1(e), False)


def psi_eval(L, z):
    return psi_eval_flagged(L, z).value


def psi_values(L, z):
    """Vectorised Psi_L with the same saturation rule."""
    return kernels.psi_values(float(L), z)


def psi_inverse(L, t):
    """sqrt(log(1 + t)) + (L / 2) log(1 + t)."""
    if L < 0 or t < 0:
        raise ValueError("psi_inverse needs L >= 0 and t >= 0")
    lg = math.log1p(t)
    return math.sqrt(lg) + 0.5 * L * lg


def _log_psi_derivative(L, z):
    # Psi_L'(z) = 2 u exp(u^2) / sqrt(1 + 2 L z)
    root = np.sqrt(1.0 + 2.0 * L * z)
    u = 2.0 * z / (root + 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        return u * u + np.log(2.0 * u) - np.log(root)


def expected_psi(dist, c, L):
    """E Psi_L(|Z| / c); inf once the integral passes the divergence level."""
    if c <= 0:
        raise ValueError("c must be positive")
    atoms = dist.atoms()
    if atoms is not None:
        vals, probs = atoms
        return float(np.sum(probs * psi_values(L, np.abs(vals) / c)))

    def integrand(x):
        logv = log_integrand(x)
        return math.exp(min(logv, 700.0))

    def log_integrand(x):
        with np.errstate(invalid="ignore"):
            v = float(_log_psi_derivative(L, x / c) + dist.log_abs_sf(x)) - math.log(c)
        return v if v == v else -math.inf

    pts = sorted(p for p in dist.abs_breakpoints if p > 0)
    upper = dist.abs_upper
    quad = dict(epsabs=1e-13, epsrel=1e-12, limit=400, full_output=1)
    if math.isfinite(upper):
        val = integrate.quad(integrand, 0.0, upper,
                             points=[p for p in pts if p < upper] or None, **quad)[0]
        return val if val <= DIVERGENCE_LEVEL else math.inf
    # fixed pieces up to the last kink and a few scales, then doubling segments
    edges = [0.0] + pts
    hi = 2.0 * max(c, dist.abs_scale, edges[-1])
    if hi > edges[-1]:
        edges.append(hi)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(integrand, a, b, **quad)[0]
    lo = edges[-1]
    for _ in range(200):
        if total > DIVERGENCE_LEVEL:
            return math.inf
        piece = integrate.quad(integrand, lo, 2.0 * lo, **quad)[0]
        total += piece
        lo *= 2.0
        if piece <= 1e-16 * total and lo * integrand(lo) <= 1e-16 * total:
            break
    else:
        return math.inf
    # a tail that is negligible here can still blow up further out (e.g. the
    # sub-Gaussian Psi against an exponential tail), so scan far out on a log grid
    # Psi and the tail nearly cancel at a boundary c, so only count growth that
    # clears the rounding error of the two exponents
    log_cut = math.log(DIVERGENCE_LEVEL)
    eps16 = 16.0 * np.finfo(float).eps
    x = lo
    while x < 1e300:
        x *= 8.0
        noise = eps16 * (abs(float(_log_psi_derivative(L, x / c))) + abs(dist.log_abs_sf(x)))
        if log_integrand(x) + math.log(x) > log_cut + noise:
            return math.inf
    return total if total <= DIVERGENCE_LEVEL else math.inf


def _solve_norm(excess, c_lo, c_hi):
    """Root in c of the nonincreasing map excess(c) = E Psi(|Z|/c) - 1, on a log scale."""

    def g(logc):
        v = excess(math.exp(logc))
        return min(v, DIVERGENCE_LEVEL)

    root = optimize.brentq(g, math.log(c_lo), math.log(c_hi), xtol=1e-15, rtol=4 * np.finfo(float).eps,
                           maxiter=500)
    return math.exp(root)


def _bracket(excess, scale, max_steps=200):
    c_hi = scale
    steps = 0
    while excess(c_hi) > 0:
        c_hi *= 4.0
        steps += 1
        if steps > max_steps:
            raise NormNotFiniteError((scale, c_hi))
    c_lo = c_hi
    while excess(c_lo) <= 0:
        c_lo /= 4.0
        steps += 1
        if steps > 2 * max_steps:
            return 0.0, c_lo
    return c_lo, c_hi


def orlicz_norm_quadrature(dist, L):
    """inf{c > 0 : E Psi_L(|Z| / c) <= 1} with E computed by adaptive Gauss-Kronrod."""
    if L < 0:
        raise ValueError("L must be >= 0")
    atoms = dist.atoms()
    if atoms is not None:
        return orlicz_norm_empirical(np.repeat(atoms[0], 1), L, weights=atoms[1])
    if dist.abs_upper == 0.0:
        return 0.0

    def excess(c):
        return expected_psi(dist, c, L) - 1.0

    c_lo, c_hi = _bracket(excess, dist.abs_scale)
    if c_lo == 0.0:
        return 0.0
    return _solve_norm(excess, c_lo, c_hi)


def orlicz_norm_empirical(sample, L, weights=None):
    """Plug-in norm inf{c : sum_i w_i Psi_L(|z_i| / c) <= 1}, w_i = 1/n by default."""
    z = np.abs(np.asarray(sample, dtype=float)).ravel()
    if z.size == 0:
        raise ValueError("sample must be nonempty")
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        keep = (w > 0) & (z > 0)
        z, w = z[keep], w[keep]
        if z.size == 0:
            return 0.0
    zmax = float(np.max(z))
    if zmax == 0.0:
        return 0.0
    # solve on z / max|z| so tiny samples do not underflow the bracket
    z = z / zmax
    if weights is not None:

        def mean_psi(c):
            return float(np.sum(w * psi_values(L, z / c)))
    else:
        z = np.ascontiguousarray(z)

        def mean_psi(c):
            return kernels.psi_mean(z, c, float(L))

    c_lo = 1.0 / psi_inverse(L, 1e12)
    c_hi = 1.0 / psi_inverse(L, 1e-12)
    while mean_psi(c_lo) <= 1.0:
        c_lo /= 2.0

    def excess(c):
        return mean_psi(c) - 1.0

    return zmax * _solve_norm(excess, c_lo, c_hi)


def tail_from_norm(params, t):
    """Threshold tau (sqrt t + L t / 2) exceeded with probability at most min(1, 2 e^{-t})."""
    if not t > 0:
        raise ValueError("t must be positive")
    return TailStatement(params.tau, params.L).at(t)


def norm_from_tail(tau, L):
    """A 2 e^{-t} tail at tau (sqrt t + L t / 2) gives ||Z||_{Psi_{sqrt3 L}} <= sqrt3 tau."""
    return OrliczParams(L=TAIL_TO_NORM_FACTOR * L, tau=TAIL_TO_NORM_FACTOR * tau)
