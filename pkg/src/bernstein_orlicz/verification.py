"""End-to-end verification runs bundled by the ``report`` command.

Each check returns a ``CheckResult``; the report passes when every check does.
Replicate counts are parameters so a quick run and a full run share code.
"""

import math
from typing import NamedTuple

import numpy as np

from . import bernstein as bern
from . import bracketing as br
from . import ep_bounds as ep
from . import finite_max as fm
from . import orlicz
from . import simulation as sim
from .distributions import CenteredExponential, ExactTail, StandardNormal
from .rng import uniforms


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: dict


def psi_roundtrip(seed, count=10_000):
    u = uniforms(seed, 11, 0, 1, 2 * count)[0]
    Ls = 10.0 ** (-4.0 + 6.0 * u[:count])
    ts = 10.0 ** (-8.0 + 14.0 * u[count:])
    err = max(abs(orlicz.psi_eval(L, orlicz.psi_inverse(L, t)) - t) / (1.0 + t) for L, t in zip(Ls, ts))
    return CheckResult("psi_roundtrip", err <= 1e-9, {"max_scaled_error": err})


def normal_norm(seed, draws=1_000_000):
    target = math.sqrt(8.0 / 3.0)
    q = orlicz.orlicz_norm_quadrature(StandardNormal(), 1e-8)
    z = StandardNormal().ppf(uniforms(seed, 12, 0, 1, draws)[0])
    e = orlicz.orlicz_norm_empirical(z, 1e-8)
    return CheckResult("normal_norm", abs(q - target) <= 1e-6 and abs(e - target) <= 0.01,
                       {"quadrature": q, "empirical": e, "target": target})


def psi_prob_mc(seed, replicates=100_000, workers=1):
    rows = {}
    ok = True
    z = sim.simulate_scalar(StandardNormal(), seed, replicates, workers)
    for L in (0.1, 1.0):
        tau = orlicz.orlicz_norm_quadrature(StandardNormal(), L)
        stmt = orlicz.TailStatement(tau, L)
        rep = sim.mc_tail_report(z, {t: stmt.at(t) for t in (0.5, 1.0, 2.0, 4.0)})
        ok &= rep.ok()
        rows[f"L={L}"] = [(r.t, r.freq, r.bound) for r in rep.rows]
    return CheckResult("psi_prob_mc", ok, rows)


def prob_psi_converse():
    out, ok = {}, True
    for L in (0.25, 1.0, 4.0):
        c = orlicz.orlicz_norm_quadrature(ExactTail(1.0, L), math.sqrt(3.0) * L)
        out[f"L={L}"] = c
        ok &= c <= math.sqrt(3.0) * (1.0 + 1e-6)
    return CheckResult("prob_psi_converse", ok, out)


def bernstein_mc(seed, replicates=100_000, workers=1):
    dist = CenteredExponential(1.0)
    out, ok = {}, True
    for n in (20, 200):
        prof = bern.fit_bernstein(dist, n)
        vals = sim.simulate_normalized_sum(dist, n, seed, replicates, workers)
        rep = sim.mc_tail_report(vals, {t: bern.bernstein_tail(prof, t) for t in (0.5, 1.0, 2.0, 4.0)})
        ok &= rep.ok()
        out[f"n={n}"] = [(r.t, r.freq, r.bound) for r in rep.rows]
    return CheckResult("bernstein_mc", ok, out)


def finite_max_mc(seed, replicates=100_000, workers=1, L=0.1):
    tau = orlicz.orlicz_norm_quadrature(StandardNormal(), L)
    out, ok = {}, True
    for p in (10, 100):
        inp = fm.MaxBoundInput(orlicz.OrliczParams(L, tau), p)
        vals = sim.simulate_max_abs(StandardNormal(), p, seed, replicates, workers)
        rep = sim.mc_tail_report(vals, {t: fm.max_deviation_threshold(inp, t) for t in (0.5, 1.0, 2.0)},
                                 expectation_bound=fm.max_expectation_bound(inp))
        ok &= rep.ok()
        out[f"p={p}"] = {"mean": rep.expectation.mean, "bound": rep.expectation.bound,
                         "rows": [(r.t, r.freq, r.bound) for r in rep.rows]}
    return CheckResult("finite_max_mc", ok, out)


def chain_constants():
    tau_star = math.fsum(2.0**-s * math.sqrt(1 + s) for s in range(11))
    series = math.sqrt(math.pi) / math.log(2.0) ** 1.5
    ok = abs(tau_star - 2.6945) <= 0.0005 and abs(series - 3.0714) <= 0.0001 and tau_star <= series <= 4
    return CheckResult("chain_constants", ok, {"partial_sum_S10": tau_star, "series_bound": series})


def entropy_lemma(seed, count=1000):
    u = uniforms(seed, 13, 0, count, 12)
    bad = 0
    for row in u:
        S = 1 + int(row[0] * 10)
        counts = [1 + int(x * 1000) for x in row[1:S + 2]]
        if not br.entropy_sum_bound(br.entropy_profile(counts)).holds:
            bad += 1
    return CheckResult("entropy_lemma", bad == 0, {"profiles": count, "failures": bad})


def tree_from_brackets(seed, replicates=100, n=100, S=3, workers=1):
    cls = br.HalfLineClass(S)
    levels = br.bracket_ladder(cls, S)
    inp = ep.EpBoundInput(n, cls.bernstein_K(), br.entropy_profile(levels), S_max=S)
    build = br.build_tree_chain(cls, levels, ep.truncation_levels(inp, S), n)
    msgs = br.check_build(build)
    cfg = sim.SimulationConfig(seed, replicates, n, cls, workers=workers)
    chk = sim.pathwise_chain_check(build, cfg)
    return CheckResult("tree_from_brackets", not msgs and chk.violations == 0,
                       {"problems": msgs, "violations": chk.violations, "delta": build.delta,
                        "sizes": build.tree.sizes})


def ep_deviation(seed, replicates=2000, workers=1, ns=(100, 400)):
    out, ok = {}, True
    for n in ns:
        cls = br.HalfLineClass(0)
        S_max = ep.default_S_max(n)
        inp = ep.EpBoundInput(n, 1.0, br.entropy_profile(cls.bracket_counts(S_max)))
        cfg = sim.SimulationConfig(seed, replicates, n, cls, workers=workers)
        rep = sim.mc_tail_report(cfg, {t: ep.deviation_threshold(inp, t) for t in (0.5, 1.0, 2.0)})
        ok &= rep.ok()
        scan = ep.expectation_bound(inp)
        out[f"n={n}"] = {"best_S": scan.best_S, "S_max": S_max,
                         "rows": [(r.t, r.freq, r.threshold) for r in rep.rows]}
    return CheckResult("ep_deviation", ok, out)


def determinism(seed, replicates=4096):
    cls = br.HalfLineClass(2)
    outs = []
    for workers in (1, 4, 8):
        cfg = sim.SimulationConfig(seed, replicates, 50, cls, workers=workers)
        outs.append(sim.mc_tail_report(cfg, {0.5: 1.0, 1.0: 1.5}).to_tsv())
    return CheckResult("determinism", outs[0] == outs[1] == outs[2], {"workers": [1, 4, 8]})


def run_all(seed=20240601, scalar_replicates=100_000, sup_replicates=2000, chain_replicates=100, workers=1):
    return [
        psi_roundtrip(seed),
        normal_norm(seed),
        psi_prob_mc(seed, scalar_replicates, workers),
        prob_psi_converse(),
        bernstein_mc(seed, scalar_replicates, workers),
        finite_max_mc(seed, scalar_replicates, workers),
        chain_constants(),
        entropy_lemma(seed),
        tree_from_brackets(seed, chain_replicates, workers=workers),
        ep_deviation(seed, sup_replicates, workers),
        determinism(seed),
    ]


def flatten(detail, prefix=""):
    """Key=value pairs for a TSV detail column."""
    if isinstance(detail, dict):
        parts = []
        for k, v in detail.items():
            parts += flatten(v, f"{prefix}{k}.")
        return parts
    if isinstance(detail, float):
        return [f"{prefix[:-1]}={detail:#.9g}"]
    if isinstance(detail, (list, tuple)) and detail and isinstance(detail[0], tuple):
        return [f"{prefix[:-1]}=" + ";".join(",".join(f"{x:#.9g}" if isinstance(x, float) else str(x)
                                                   for x in row) for row in detail)]
    return [f"{prefix[:-1]}={detail}"]


def to_rows(results):
    return [(r.name, "pass" if r.passed else "FAIL", " ".join(flatten(r.detail))) for r in results]


def as_json(results):
    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, np.generic):
            return v.item()
        return v

    return [{"name": r.name, "passed": r.passed, "detail": clean(r.detail)} for r in results]


__all__ = ["CheckResult", "run_all", "to_rows", "as_json"]
