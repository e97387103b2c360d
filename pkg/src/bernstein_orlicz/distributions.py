"""Built-in laws with CDF, inverse CDF, tail of |X| and absolute moments.

Everything here is sampled by inverse CDF only, so one uniform maps to one
draw and random substreams stay aligned.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special


class Distribution:
    """Common interface. Subclasses fill in the closed forms they have."""

    kind = "abstract"
    #: points where P(|X| > x) has a kink, used to split quadrature
    abs_breakpoints = ()

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, u):
        raise NotImplementedError

    def sample(self, u):
        return self.ppf(u)

    def abs_sf(self, x):
        """P(|X| > x) for x >= 0."""
        raise NotImplementedError

    def log_abs_sf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.abs_sf(x))

    def atoms(self):
        """(values, probabilities) for purely atomic laws, else None."""
        return None

    @property
    def abs_upper(self):
        """Essential supremum of |X| (inf when unbounded)."""
        return math.inf

    @property
    def abs_scale(self):
        """A typical magnitude of |X|, used to seed root brackets."""
        return 1.0

    def abs_moment(self, m):
        """E|X|^m. Generic route: integral of m x^(m-1) P(|X| > x)."""
        atoms = self.atoms()
        if atoms is not None:
            vals, probs = atoms
            return float(np.sum(probs * np.abs(vals) ** m))
        return _tail_moment(self, m)

    def to_dict(self):
        raise NotImplementedError


def _tail_moment(dist, m):
    upper = dist.abs_upper
    pts = [p for p in dist.abs_breakpoints if p > 0]

    def f(x):
        return m * x ** (m - 1) * float(dist.abs_sf(x))

    if math.isfinite(upper):
        val, _ = integrate.quad(f, 0.0, upper, points=pts or None, limit=200,
                                epsabs=0.0, epsrel=1e-12)
        return val
    total = 0.0
    lo, hi = 0.0, max(2.0 * dist.abs_scale, *(pts or [0.0]), 1e-300)
    for _ in range(200):
        piece, _ = integrate.quad(f, lo, hi, limit=200, epsabs=0.0, epsrel=1e-12)
        total += piece
        if piece <= 1e-16 * total and f(hi) * hi <= 1e-16 * total:
            return total
        lo, hi = hi, 2.0 * hi
    raise ArithmeticError(f"moment of order {m} did not converge")


@dataclass(frozen=True)
class StandardNormal(Distribution):
    kind = "standard-normal"

    def cdf(self, x):
        return special.ndtr(x)

    def ppf(self, u):
        return special.ndtri(u)

    def abs_sf(self, x):
        return special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))

    def log_abs_sf(self, x):
        return math.log(2.0) + special.log_ndtr(-np.asarray(x, dtype=float))

    @property
    def abs_scale(self):
        return 1.0

    def abs_moment(self, m):
        return 2.0 ** (m / 2) * math.gamma((m + 1) / 2) / math.sqrt(math.pi)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class CenteredExponential(Distribution):
    """Y - 1/rate with Y ~ Exp(rate)."""

    rate: float = 1.0
    kind = "centered-exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    @property
    def abs_breakpoints(self):
        return (1.0 / self.rate,)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= -1.0 / self.rate, -np.expm1(-1.0 - self.rate * x), 0.0)

    def ppf(self, u):
        return (-np.log1p(-np.asarray(u, dtype=float)) - 1.0) / self.rate

    def abs_sf(self, x):
        x = np.asarray(x, dtype=float)
        right = np.exp(-1.0 - self.rate * x)
        left = np.where(x < 1.0 / self.rate, -np.expm1(-(1.0 - self.rate * x)), 0.0)
        return right + left

    def log_abs_sf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = np.log(self.abs_sf(np.minimum(x, 1.0 / self.rate)))
        return np.where(x >= 1.0 / self.rate, -1.0 - self.rate * x, inner)

    @property
    def abs_scale(self):
        return 1.0 / self.rate

    def abs_moment(self, m):
        # E|E - 1|^m = e^{-1} (int_0^1 u^m e^u du + m!), the integral as a series
        series = math.fsum(1.0 / (math.factorial(k) * (m + k + 1)) for k in range(60))
        return math.exp(-1.0) * (series + math.factorial(m)) / self.rate**m

    def to_dict(self):
        return {"kind": self.kind, "rate": self.rate}


@dataclass(frozen=True)
class Uniform(Distribution):
    a: float = 0.0
    b: float = 1.0
    centered: bool = True
    kind = "uniform"

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("need a < b")

    @property
    def _lo(self):
        return self.a - self._shift

    @property
    def _hi(self):
        return self.b - self._shift

    @property
    def _shift(self):
        return 0.5 * (self.a + self.b) if self.centered else 0.0

    @property
    def abs_breakpoints(self):
        return tuple(sorted({abs(self._lo), abs(self._hi)}))

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self._lo) / (self._hi - self._lo), 0.0, 1.0)

    def ppf(self, u):
        return self._lo + np.asarray(u, dtype=float) * (self._hi - self._lo)

    def abs_sf(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 - self.cdf(x) + self.cdf(-x)

    @property
    def abs_upper(self):
        return max(abs(self._lo), abs(self._hi))

    @property
    def abs_scale(self):
        return 0.5 * self.abs_upper

    def abs_moment(self, m):
        lo, hi = self._lo, self._hi

        def g(x):
            return math.copysign(abs(x) ** (m + 1), x) / (m + 1)

        return (g(hi) - g(lo)) / (hi - lo)

    def to_dict(self):
        return {"kind": self.kind, "a": self.a, "b": self.b, "centered": self.centered}


@dataclass(frozen=True)
class TwoPoint(Distribution):
    """P(X = a) = p, P(X = b) = 1 - p."""

    a: float = -1.0
    b: float = 1.0
    p: float = 0.5
    kind = "two-point"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")

    def atoms(self):
        return np.array([self.a, self.b], dtype=float), np.array([self.p, 1.0 - self.p])

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = sorted([(self.a, self.p), (self.b, 1.0 - self.p)])
        return np.where(x >= hi[0], 1.0, np.where(x >= lo[0], lo[1], 0.0))

    def ppf(self, u):
        lo, hi = sorted([(self.a, self.p), (self.b, 1.0 - self.p)])
        return np.where(np.asarray(u, dtype=float) <= lo[1], lo[0], hi[0])

    def abs_sf(self, x):
        x = np.asarray(x, dtype=float)
        return self.p * (abs(self.a) > x) + (1.0 - self.p) * (abs(self.b) > x)

    @property
    def abs_upper(self):
        return max(abs(self.a), abs(self.b))

    @property
    def abs_scale(self):
        return max(self.abs_upper, 1e-300)

    def to_dict(self):
        return {"kind": self.kind, "a": self.a, "b": self.b, "p": self.p}


def point_mass(a):
    return TwoPoint(a, a, 1.0)


@dataclass(frozen=True)
class Empirical(Distribution):
    sample: tuple = field(default=(0.0,))
    kind = "empirical"

    def __post_init__(self):
        arr = np.sort(np.asarray(self.sample, dtype=float).ravel())
        if arr.size == 0:
            raise ValueError("empirical law needs a nonempty sample")
        object.__setattr__(self, "sample", tuple(arr.tolist()))

    @property
    def _arr(self):
        return np.asarray(self.sample)

    def atoms(self):
        arr = self._arr
        return arr, np.full(arr.size, 1.0 / arr.size)

    def cdf(self, x):
        return np.searchsorted(self._arr, x, side="right") / len(self.sample)

    def ppf(self, u):
        arr = self._arr
        idx = np.ceil(np.asarray(u, dtype=float) * arr.size).astype(int) - 1
        return arr[np.clip(idx, 0, arr.size - 1)]

    def abs_sf(self, x):
        a = np.sort(np.abs(self._arr))
        return 1.0 - np.searchsorted(a, x, side="right") / a.size

    @property
    def abs_upper(self):
        return float(np.max(np.abs(self._arr)))

    @property
    def abs_scale(self):
        return max(self.abs_upper, 1e-300)

    def to_dict(self):
        return {"kind": self.kind, "sample": list(self.sample)}


@dataclass(frozen=True)
class ExactTail(Distribution):
    """Nonnegative Z with P(Z >= tau (sqrt t + L t / 2)) = min(1, 2 e^{-t}) for all t > 0.

    Z = tau (sqrt T + L T / 2) with T = log 2 + Exp(1).
    """

    tau: float = 1.0
    L: float = 1.0
    kind = "exact-tail"

    def __post_init__(self):
        if not (self.tau > 0 and self.L >= 0):
            raise ValueError("need tau > 0 and L >= 0")

    def _t_of(self, x):
        z = np.asarray(x, dtype=float) / self.tau
        u = 2.0 * z / (np.sqrt(1.0 + 2.0 * self.L * z) + 1.0)
        return u * u

    def _x_of(self, t):
        return self.tau * (np.sqrt(t) + 0.5 * self.L * t)

    @property
    def abs_breakpoints(self):
        return (float(self._x_of(math.log(2.0))),)

    def abs_sf(self, x):
        return np.minimum(1.0, 2.0 * np.exp(-self._t_of(x)))

    def log_abs_sf(self, x):
        return np.minimum(0.0, math.log(2.0) - self._t_of(x))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, 1.0 - self.abs_sf(x))

    def ppf(self, u):
        t = math.log(2.0) - np.log1p(-np.asarray(u, dtype=float))
        return self._x_of(t)

    @property
    def abs_scale(self):
        return float(self._x_of(math.log(2.0) + 1.0))

    def to_dict(self):
        return {"kind": self.kind, "tau": self.tau, "L": self.L}


_KINDS = {
    "standard-normal": lambda d: StandardNormal(),
    "centered-exponential": lambda d: CenteredExponential(d.get("rate", 1.0)),
    "uniform": lambda d: Uniform(d.get("a", 0.0), d.get("b", 1.0), d.get("centered", True)),
    "two-point": lambda d: TwoPoint(d["a"], d["b"], d.get("p", 0.5)),
    "empirical": lambda d: Empirical(tuple(d["sample"])),
    "exact-tail": lambda d: ExactTail(d.get("tau", 1.0), d.get("L", 1.0)),
}


def from_dict(spec):
    """Build a distribution from its JSON form, e.g. {"kind": "uniform", "a": 0, "b": 1}."""
    try:
        return _KINDS[spec["kind"]](spec)
    except KeyError as exc:
        raise ValueError(f"unknown or incomplete distribution spec: {spec!r}") from exc
