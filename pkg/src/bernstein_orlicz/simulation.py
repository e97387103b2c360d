"""Seeded Monte Carlo checks of the tail, expectation and chaining bounds.

Each replicate draws its own row of uniforms from the counter-based stream
(see ``rng``), maps them through an inverse CDF and evaluates a statistic.
Results are concatenated in replicate order, so they are bit-identical for
any number of worker threads.
"""

import io
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import stats

from . import kernels
from .bracketing import FunctionClass, HalfLineClass
from .rng import CHUNK, run_replicates

CI_LEVEL = 0.99
SCREEN_SIGMAS = 3.0

# stream ids keep unrelated experiments on disjoint substreams
STREAM_SUP = 1
STREAM_SCALAR = 2
STREAM_SUM = 3
STREAM_MAX = 4


@dataclass(frozen=True)
class SimulationConfig:
    seed: int
    replicates: int
    n: int
    cls: FunctionClass
    t_grid: tuple = (0.5, 1.0, 2.0)
    workers: int = 1
    stream: int = STREAM_SUP
    continuum: bool = True

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.t_grid or any(not t > 0 for t in self.t_grid):
            raise ValueError("t_grid must be nonempty and positive")
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))

    def to_dict(self):
        return {"seed": self.seed, "replicates": self.replicates, "n": self.n,
                "class": self.cls.to_dict(), "t_grid": list(self.t_grid),
                "workers": self.workers, "stream": self.stream, "continuum": self.continuum}


def _cell_counts(cls, u):
    cells = cls.cells_of(u)
    R, m = u.shape[0], cls.m
    flat = cells + (np.arange(R)[:, None] * m)
    return np.bincount(flat.ravel(), minlength=R * m).reshape(R, m)


def empirical_process(cls, u, funcs=None):
    """nu_n(f) = sqrt(n) (P_n f - P f) for rows of uniforms; returns shape (R, number of f)."""
    funcs = cls.values if funcs is None else funcs
    n = u.shape[1]
    dev = _cell_counts(cls, u) / n - cls.w[None, :]
    return math.sqrt(n) * dev @ funcs.T


def _sup_statistic(config):
    cls = config.cls
    if isinstance(cls, HalfLineClass) and config.continuum:
        return lambda u: kernels.ks_sup(np.sort(u, axis=1))
    if not isinstance(cls, FunctionClass):
        raise TypeError("unsupported function class")
    return lambda u: np.max(np.abs(empirical_process(cls, u)), axis=1)


def simulate_sup(config):
    """R realized values of sup_g |nu_n(g)|."""
    return run_replicates(_sup_statistic(config), seed=config.seed, stream=config.stream,
                          replicates=config.replicates, ndraw=config.n, workers=config.workers)


def simulate_scalar(dist, seed, replicates, workers=1, stream=STREAM_SCALAR):
    """|Z| for Z drawn from ``dist`` once per replicate."""
    return run_replicates(lambda u: np.abs(dist.ppf(u[:, 0])), seed=seed, stream=stream,
                          replicates=replicates, ndraw=1, workers=workers)


def simulate_normalized_sum(dist, n, seed, replicates, workers=1, stream=STREAM_SUM):
    """|n^{-1/2} sum_i X_i| for i.i.d. X_i from ``dist`` (assumed centered)."""
    rn = math.sqrt(n)
    return run_replicates(lambda u: np.abs(dist.ppf(u).sum(axis=1)) / rn, seed=seed, stream=stream,
                          replicates=replicates, ndraw=n, workers=workers)


def simulate_max_abs(dist, p, seed, replicates, workers=1, stream=STREAM_MAX):
    """max_{j<=p} |Z_j| for independent Z_j from ``dist``."""
    return run_replicates(lambda u: np.max(np.abs(dist.ppf(u)), axis=1), seed=seed, stream=stream,
                          replicates=replicates, ndraw=p, workers=workers)


class TailRow(NamedTuple):
    t: float
    threshold: float
    bound: float
    count: int
    freq: float
    ci_lo: float
    ci_hi: float
    stderr: float
    refuted: bool
    screen_fail: bool


class ExpectationRow(NamedTuple):
    mean: float
    stderr: float
    bound: float
    ok: bool


def clopper_pearson(k, R, level=CI_LEVEL):
    a = 1.0 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, R - k + 1))
    hi = 1.0 if k == R else float(stats.beta.ppf(1 - a / 2, k + 1, R - k))
    return lo, hi


@dataclass
class TailReport:
    rows: list
    replicates: int
    expectation: ExpectationRow = None
    meta: dict = field(default_factory=dict)

    @property
    def refuted(self):
        return any(r.refuted for r in self.rows) or (self.expectation is not None and not self.expectation.ok)

    @property
    def screen_failed(self):
        return any(r.screen_fail for r in self.rows)

    def ok(self):
        return not self.refuted and not self.screen_failed

    def to_tsv(self):
        buf = io.StringIO()
        buf.write("t\tthreshold\tprob_cap\tmc_freq\tci_lo\tci_hi\tstderr\trefuted\n")
        for r in self.rows:
            buf.write("\t".join([_g(r.t), _g(r.threshold), _g(r.bound), _g(r.freq), _g(r.ci_lo),
                                  _g(r.ci_hi), _g(r.stderr), str(int(r.refuted))]) + "\n")
        if self.expectation is not None:
            e = self.expectation
            buf.write(f"# expectation\tmean={_g(e.mean)}\tstderr={_g(e.stderr)}\tbound={_g(e.bound)}\n")
        return buf.getvalue()

    def to_dict(self):
        out = {"replicates": self.replicates, "rows": [r._asdict() for r in self.rows], "meta": self.meta}
        if self.expectation is not None:
            out["expectation"] = self.expectation._asdict()
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def plot_data_tsv(self):
        """t against log frequency and log bound, for external plotting."""
        buf = io.StringIO()
        buf.write("t\tlog_freq\tlog_bound\tlog_ci_hi\n")
        for r in self.rows:
            lf = math.log(r.freq) if r.freq > 0 else float("-inf")
            buf.write(f"{_g(r.t)}\t{_g(lf)}\t{_g(math.log(r.bound))}\t{_g(math.log(r.ci_hi))}\n")
        return buf.getvalue()


def _g(x):
    return f"{x:#.9g}"


def default_cap(t):
    return min(1.0, 2.0 * math.exp(-t))


def mc_tail_report(values_or_config, thresholds, cap=default_cap, expectation_bound=None,
                   strict=False):
    """Exceedance frequencies of each threshold with exact 99% intervals.

    ``thresholds`` maps t to a threshold (or to a TailBound, whose own
    probability cap is used). A row is refuted when its whole interval lies
    above the bound. The secondary screen flags freq > bound + 3 stderr.
    Exceedance means value >= threshold, or > threshold with ``strict``.
    """
    if isinstance(values_or_config, SimulationConfig):
        values = simulate_sup(values_or_config)
    else:
        values = np.asarray(values_or_config, dtype=float)
    R = values.size
    rows = []
    for t in sorted(thresholds):
        thr = thresholds[t]
        if hasattr(thr, "threshold"):
            thr, bound = thr.threshold, thr.prob_bound
        else:
            bound = cap(t)
        k = int(np.count_nonzero(values > thr if strict else values >= thr))
        freq = k / R
        lo, hi = clopper_pearson(k, R)
        se = math.sqrt(freq * (1 - freq) / R)
        rows.append(TailRow(float(t), float(thr), float(bound), k, freq, lo, hi, se,
                            lo > bound, freq > bound + SCREEN_SIGMAS * se))
    exp_row = None
    if expectation_bound is not None:
        mean = float(np.mean(values))
        se = float(np.std(values, ddof=1) / math.sqrt(R)) if R > 1 else 0.0
        exp_row = ExpectationRow(mean, se, float(expectation_bound), mean - SCREEN_SIGMAS * se <= expectation_bound)
    return TailReport(rows, R, exp_row)


# pathwise chain check

class ChainCheck(NamedTuple):
    replicates: int
    checked: int
    violations: int
    worst_margin: float


def _label_matrix(build):
    """Stack label functions: rows (f1, f2) for every node, generation by generation."""
    rows, spans = [], []
    for s in range(build.S + 1):
        start = len(rows) // 2
        for j in build.node_ids[s]:
            f1, f2 = (term.f for term in build.terms[j])
            rows += [f1, f2]
        spans.append((start, len(rows) // 2))
    return np.array(rows), spans


def _branch_sums(build, W, spans):
    """Sum of node labels along each branch, indexed by end-node row; W has shape (R, nodes)."""
    acc = W[:, spans[0][0]:spans[0][1]]
    for s in range(1, build.S + 1):
        a, b = spans[s]
        acc = W[:, a:b] + acc[:, build.parent_index[s]]
    return acc


def _cell_sup(u_sorted, m):
    """sup over v in each quantile cell [k/m, (k+1)/m] of |sqrt(n)(F_n(v) - v)|, shape (R, m)."""
    R, n = u_sorted.shape
    out = np.zeros((R, m))
    rank = np.arange(1, n + 1, dtype=float)
    cell = np.clip(np.ceil(u_sorted * m).astype(np.int64) - 1, 0, m - 1)
    flat = (np.arange(R)[:, None] * m + cell).ravel()
    right = np.abs(rank / n - u_sorted).ravel()
    left = np.abs((rank - 1) / n - u_sorted).ravel()
    res = out.ravel()
    np.maximum.at(res, flat, right)
    np.maximum.at(res, flat, left)
    edges = np.arange(m + 1, dtype=float) / m
    Fe = np.stack([np.searchsorted(row, edges, side="right") for row in u_sorted]) / n
    edge_dev = np.abs(Fe - edges[None, :])
    out = res.reshape(R, m)
    out = np.maximum(out, edge_dev[:, :-1])
    out = np.maximum(out, edge_dev[:, 1:])
    return math.sqrt(n) * out


def pathwise_chain_check(build, config, delta=None):
    """Count replicates and members where |nu_n(g)| > sum of branch labels + delta."""
    cls = build.cls
    if config.cls is not cls and config.cls.to_dict() != cls.to_dict():
        raise ValueError("simulation class does not match the build")
    if config.n != build.n:
        raise ValueError("simulation n does not match the build")
    delta = build.delta if delta is None else delta
    F, spans = _label_matrix(build)
    end_row = {j: i for i, j in enumerate(build.node_ids[build.S])}
    member_end = np.array([end_row[int(j)] for j in build.end_node])
    continuum = isinstance(cls, HalfLineClass) and config.continuum
    if continuum:
        cell_end = member_end[[cls.cell_member(k) for k in range(cls.m)]]

    def stat(u):
        nu = empirical_process(cls, u, F)
        W = np.abs(nu[:, 0::2]) + np.abs(nu[:, 1::2])
        bound = _branch_sums(build, W, spans) + delta
        lhs = np.abs(empirical_process(cls, u))
        margin = bound[:, member_end] - lhs
        if continuum:
            cs = _cell_sup(np.sort(u, axis=1), cls.m)
            margin = np.concatenate([margin, bound[:, cell_end] - cs], axis=1)
        return np.stack([np.count_nonzero(margin < 0, axis=1), margin.min(axis=1)], axis=1)

    res = run_replicates(stat, seed=config.seed, stream=config.stream, replicates=config.replicates,
                         ndraw=config.n, workers=config.workers, chunk=min(CHUNK, 256))
    per_rep = res[:, 0]
    checked = cls.p + (cls.m if continuum else 0)
    return ChainCheck(config.replicates, checked, int(np.count_nonzero(per_rep)), float(res[:, 1].min()))
