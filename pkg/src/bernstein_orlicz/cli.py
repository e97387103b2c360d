"""Command-line front end.

Exit codes: 0 success, 1 refutation or validation failure, 2 usage or config error.
"""

import argparse
import json
import math
import sys

from . import __version__
from . import bernstein as bern
from . import bracketing as br
from . import ep_bounds as ep
from . import finite_max as fm
from . import io
from . import orlicz
from . import simulation as sim
from . import tree as tr
from . import verification
from .distributions import from_dict as dist_from_dict

DEFAULT_SEED = 20240601
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class Result:
    """What a command produced: TSV/JSON payloads and whether it failed."""

    def __init__(self, header, rows, data, failed=False, extra_tsv=""):
        self.header, self.rows, self.data, self.failed, self.extra_tsv = header, rows, data, failed, extra_tsv
        # format and output path named inside a config file, used when no flag overrides them
        self.cfg_format = self.cfg_output = None

    def render(self, fmt):
        if fmt == "json":
            return io.dumps(self.data)
        return io.tsv(self.header, self.rows) + self.extra_tsv


# argument helpers

def _dist_arg(text):
    """A distribution given as a JSON object, a path to one, or a bare kind name."""
    text = text.strip()
    if text.startswith("{"):
        doc = json.loads(text)
    elif text.endswith(".json"):
        doc = io.load_json(text)
    else:
        doc = {"kind": text}
    io.validate(doc, "distribution")
    return dist_from_dict(doc)


def _load_sample(path):
    import numpy as np

    if path.endswith(".npy"):
        return np.load(path)
    if path.endswith(".json"):
        with open(path) as fh:
            return np.asarray(json.load(fh), dtype=float)
    return np.loadtxt(path, dtype=float, ndmin=1)


def _profile(args):
    if args.profile:
        doc = io.load_json(args.profile, "profile")
        return br.entropy_profile(doc["Ntilde"])
    if args.counts:
        return br.entropy_profile([int(x) for x in args.counts.split(",")])
    if getattr(args, "cls", None):
        cls = br.class_from_dict(io.load_json(args.cls, "function_class"))
        return br.entropy_profile(cls.bracket_counts(args.S_max if args.S_max is not None
                                                     else ep.default_S_max(args.n)))
    raise UsageError("give --profile, --counts or --class")


def _ep_input(args):
    prof = _profile(args)
    S_max = args.S_max if args.S_max is not None else min(ep.default_S_max(args.n), prof.S)
    return ep.EpBoundInput(args.n, args.K, prof, S_max)


# commands

def cmd_psi(args):
    if args.action == "eval":
        val = orlicz.psi_eval_flagged(args.L, args.z)
        return Result(["L", "z", "psi", "saturated"], [(args.L, args.z, val.value, val.saturated)],
                      {"L": args.L, "z": args.z, "psi": val.value, "saturated": val.saturated})
    val = orlicz.psi_inverse(args.L, args.t)
    return Result(["L", "t", "psi_inverse"], [(args.L, args.t, val)], {"L": args.L, "t": args.t, "psi_inverse": val})


def cmd_norm(args):
    if args.action == "quad":
        dist = _dist_arg(args.dist)
        try:
            c = orlicz.orlicz_norm_quadrature(dist, args.L)
        except orlicz.NormNotFiniteError as exc:
            return Result(["error"], [(str(exc),)], {"error": str(exc), "c_range": exc.c_range}, failed=True)
        return Result(["L", "norm"], [(args.L, c)], {"L": args.L, "norm": c, "distribution": dist.to_dict()})
    x = _load_sample(args.sample)
    c = orlicz.orlicz_norm_empirical(x, args.L)
    return Result(["L", "n", "norm"], [(args.L, int(x.size), c)], {"L": args.L, "n": int(x.size), "norm": c})


def cmd_bernstein(args):
    if args.action == "check":
        src = _load_sample(args.sample) if args.sample else _dist_arg(args.dist or "standard-normal")
        rep = bern.check_bernstein(src, args.sigma, args.K, args.m_max)
        rows = [(m, r) for m, r in rep.ratios.items()]
        extra = f"# holds={int(rep.holds)}\tworst_m={rep.worst_m}\tworst_ratio={io.fmt9(rep.worst_ratio)}\n"
        return Result(["m", "ratio"], rows, {"holds": rep.holds, "worst_m": rep.worst_m,
                                             "worst_ratio": rep.worst_ratio,
                                             "ratios": {str(k): v for k, v in rep.ratios.items()}},
                      failed=not rep.holds, extra_tsv=extra)
    prof = bern.BernsteinProfile(args.sigma, args.K, args.n)
    if args.action == "tail":
        tb = bern.bernstein_tail(prof, args.t)
        return Result(["t", "threshold", "prob_cap"], [(args.t, tb.threshold, tb.prob_bound)],
                      {"t": args.t, "threshold": tb.threshold, "prob_cap": tb.prob_bound})
    p = bern.bernstein_orlicz_norm(prof)
    return Result(["tau", "L"], [(p.tau, p.L)], {"tau": p.tau, "L": p.L})


def cmd_finmax(args):
    inp = fm.MaxBoundInput(orlicz.OrliczParams(args.L, args.tau), args.p)
    if args.action == "expect":
        v = fm.max_expectation_bound(inp)
        return Result(["tau", "L", "p", "bound"], [(args.tau, args.L, args.p, v)], {"bound": v})
    if args.t is None:
        st = fm.max_deviation_norm(inp)
        return Result(["shift", "L", "tau"], [(st.shift, st.params.L, st.params.tau)],
                      {"shift": st.shift, "L": st.params.L, "tau": st.params.tau})
    tb = fm.max_deviation_threshold(inp, args.t)
    return Result(["t", "threshold", "prob_cap"], [(args.t, tb.threshold, tb.prob_bound)],
                  {"t": args.t, "threshold": tb.threshold, "prob_cap": tb.prob_bound})


def cmd_tree(args):
    doc = io.load_json(args.input, "tree")
    obj = tr.tree_from_dict(doc)
    if args.action == "validate":
        if isinstance(obj, tr.ChainCertificate):
            bad = obj.violations()
        elif isinstance(obj, tr.LabeledTree):
            bad = obj.violations()
        else:
            bad = tr.validate_tree(obj).violations
        rows = [(v.code, str(v.node), v.message) for v in bad]
        return Result(["code", "node", "message"], rows,
                      {"valid": not bad, "violations": [v._asdict() for v in bad]}, failed=bool(bad))
    if args.action == "gamma":
        if not isinstance(obj, tr.ChainCertificate):
            raise UsageError("tree gamma needs tau (and labels) in the tree file")
        g = tr.gamma_bound(obj)
        return Result(["gamma", "expectation_bound"], [(g.gamma, g.expectation_bound)], g._asdict())
    labeled = obj.labeled if isinstance(obj, tr.ChainCertificate) else obj
    if not isinstance(labeled, tr.LabeledTree):
        raise UsageError("tree needs labels and Ls")
    delta = args.delta if args.delta is not None else getattr(obj, "delta", 0.0)
    if args.action == "generic":
        c = tr.generic_constants(labeled)
        dev = tr.generic_orlicz_deviation(c, delta)
        data = dict(vars(c), shift=dev.statement.shift, expectation_bound=dev.expectation_bound)
        return Result(list(data), [tuple(data.values())], data)
    # deviate
    if args.mode == "uniform":
        if not isinstance(obj, tr.ChainCertificate):
            raise UsageError("uniform mode needs tau in the tree file")
        tb = tr.uniform_tree_deviation(obj, args.t)
    else:
        tb = tr.generic_deviation_threshold(tr.generic_constants(labeled), delta, args.t)
    return Result(["t", "threshold", "prob_cap"], [(args.t, tb.threshold, tb.prob_bound)],
                  {"t": args.t, "mode": args.mode, "threshold": tb.threshold, "prob_cap": tb.prob_bound})


def cmd_bracket(args):
    if args.action == "entropy":
        prof = _profile(args)
        chk = br.entropy_sum_bound(prof)
        rows = [(s, prof.Ntilde[s], prof.Htilde[s], prof.Nprod[s], prof.Hprod[s]) for s in range(prof.S + 1)]
        extra = f"# lemma_lhs={io.fmt9(chk.lhs)}\tlemma_rhs={io.fmt9(chk.rhs)}\tholds={int(chk.holds)}\n"
        return Result(["s", "Ntilde", "Htilde", "N", "H"], rows,
                      {"Ntilde": list(prof.Ntilde), "Htilde": list(prof.Htilde), "N": list(prof.Nprod),
                       "H": list(prof.Hprod), "approximate": prof.approximate,
                       "lemma": chk._asdict()}, failed=not chk.holds, extra_tsv=extra)
    cls = br.class_from_dict(io.load_json(args.cls, "function_class"))
    levels = br.bracket_ladder(cls, args.S, K=args.K_gen, allow_partition=True)
    rows = [(lev.s, lev.count, float(lev.widths(cls.w).max())) for lev in levels]
    data = {"class": cls.to_dict(), "levels": [{"s": lev.s, "count": lev.count,
                                                  "lower": lev.lower, "upper": lev.upper,
                                                  "assign": lev.assign} for lev in levels]}
    return Result(["s", "count", "max_width"], rows, data)


def cmd_ep(args):
    if args.action == "massart":
        tb = ep.massart_threshold(args.E_sup, args.K_bound, args.n, args.eps, args.t)
        return Result(["t", "threshold", "prob_cap"], [(args.t, tb.threshold, tb.prob_bound)],
                      {"t": args.t, "threshold": tb.threshold, "prob_cap": tb.prob_bound})
    inp = _ep_input(args)
    scan = ep.expectation_bound(inp)
    if args.action == "expect":
        extra = f"# argmin_S={scan.best_S}\tmin={io.fmt9(scan.best)}\n"
        return Result(["S", "E_bar_S"], list(enumerate(scan.per_S)),
                      {"per_S": scan.per_S, "best_S": scan.best_S, "best": scan.best}, extra_tsv=extra)
    ts = args.t or [0.5, 1.0, 2.0]
    rows = []
    for t in ts:
        tb = ep.deviation_threshold(inp, t, statement_form=args.statement_form)
        rows.append((t, tb.threshold, tb.prob_bound))
    dev = ep.deviation_orlicz(inp, statement_form=args.statement_form)
    return Result(["t", "threshold", "prob_cap"], rows,
                  {"rows": [dict(zip(["t", "threshold", "prob_cap"], r)) for r in rows],
                   "shift": dev.shift, "L_tilde": dev.L_tilde, "orlicz_L": dev.orlicz.params.L,
                   "orlicz_tau": dev.orlicz.params.tau, "best_S": scan.best_S})


def _with_cfg(result, doc):
    result.cfg_format, result.cfg_output = doc.get("format"), doc.get("output")
    return result


def _sim_config(doc):
    cls = br.class_from_dict(doc["class"])
    return sim.SimulationConfig(seed=doc["seed"], replicates=doc["replicates"], n=doc["n"], cls=cls,
                                t_grid=tuple(doc.get("t_grid", (0.5, 1.0, 2.0))),
                                workers=doc.get("workers", 1), stream=doc.get("stream", sim.STREAM_SUP),
                                continuum=doc.get("continuum", True))


def cmd_simulate(args):
    doc = io.load_json(args.config, "simulation")
    cfg = _sim_config(doc)
    if args.workers:
        cfg = sim.SimulationConfig(cfg.seed, cfg.replicates, cfg.n, cfg.cls, cfg.t_grid, args.workers,
                                   cfg.stream, cfg.continuum)
    resolved = dict(doc, workers=cfg.workers)
    if args.action == "sup":
        vals = sim.simulate_sup(cfg)
        return _with_cfg(Result(["replicate", "sup"], list(enumerate(vals.tolist())),
                                {"config": resolved, "sup": vals.tolist()}), doc)
    cls = cfg.cls
    K = doc.get("K") or cls.bernstein_K()
    if args.action == "verify":
        S_max = ep.default_S_max(cfg.n)
        prof = br.entropy_profile(cls.bracket_counts(S_max))
        inp = ep.EpBoundInput(cfg.n, K, prof, S_max)
        thr = {t: ep.deviation_threshold(inp, t, doc.get("statement_form", False)) for t in cfg.t_grid}
        rep = sim.mc_tail_report(cfg, thr)
        rep.meta = {"config": resolved, "K": K, "best_S": ep.expectation_bound(inp).best_S}
        res = Result([], [], rep.to_dict(), failed=not rep.ok())
        res.render = lambda fmt: (io.dumps(rep.to_dict()) if fmt == "json" else rep.to_tsv())
        return _with_cfg(res, doc)
    # chaincheck
    S = doc.get("S", 3)
    levels = br.bracket_ladder(cls, S, K=K)
    inp = ep.EpBoundInput(cfg.n, K, br.entropy_profile(levels), S_max=S)
    build = br.build_tree_chain(cls, levels, ep.truncation_levels(inp, S, doc.get("eps", 0.0)), cfg.n, K=K)
    problems = br.check_build(build)
    delta = build.delta * doc.get("delta_scale", 1.0)
    chk = sim.pathwise_chain_check(build, cfg, delta=delta)
    data = {"config": resolved, "delta": delta, "sizes": build.tree.sizes, "problems": problems,
            **chk._asdict()}
    return _with_cfg(Result(list(chk._fields) + ["delta"], [tuple(chk) + (delta,)], data,
                            failed=bool(problems) or chk.violations > 0), doc)


def cmd_report(args):
    doc = io.load_json(args.config, "report") if args.config else {}
    resolved = {
        "seed": doc.get("seed", args.seed if args.seed is not None else DEFAULT_SEED),
        "scalar_replicates": doc.get("scalar_replicates", 100_000),
        "sup_replicates": doc.get("sup_replicates", 2000),
        "chain_replicates": doc.get("chain_replicates", 100),
        "workers": doc.get("workers", args.workers or 1),
    }
    results = verification.run_all(**resolved)
    failed = not all(r.passed for r in results)
    extra = "# config\t" + json.dumps(resolved, sort_keys=True) + "\n"
    return _with_cfg(Result(["check", "status", "detail"], verification.to_rows(results),
                            {"config": resolved, "checks": verification.as_json(results), "passed": not failed},
                            failed=failed, extra_tsv=extra), doc)


def build_parser():
    p = argparse.ArgumentParser(prog="bernstein-orlicz", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--format", choices=["tsv", "json"], default=None)
    p.add_argument("--out", help="output file (relative paths go under $%s)" % io.OUTPUT_DIR_ENV)
    sub = p.add_subparsers(dest="command", required=True)

    def add(parent, name, **kw):
        sp = parent.add_parser(name, **kw)
        sp.add_argument("--format", choices=["tsv", "json"], default=argparse.SUPPRESS)
        sp.add_argument("--out", default=argparse.SUPPRESS)
        return sp

    psi = sub.add_parser("psi").add_subparsers(dest="action", required=True)
    e = add(psi, "eval")
    e.add_argument("--L", type=float, required=True)
    e.add_argument("--z", type=float, required=True)
    i = add(psi, "inv")
    i.add_argument("--L", type=float, required=True)
    i.add_argument("--t", type=float, required=True)

    norm = sub.add_parser("norm").add_subparsers(dest="action", required=True)
    q = add(norm, "quad")
    q.add_argument("--dist", required=True, help="kind name, JSON object or .json file")
    q.add_argument("--L", type=float, required=True)
    em = add(norm, "emp")
    em.add_argument("--sample", required=True, help=".txt, .json or .npy file")
    em.add_argument("--L", type=float, required=True)

    bern_p = sub.add_parser("bernstein").add_subparsers(dest="action", required=True)
    c = add(bern_p, "check")
    c.add_argument("--dist")
    c.add_argument("--sample")
    c.add_argument("--sigma", type=float, required=True)
    c.add_argument("--K", type=float, required=True)
    c.add_argument("--m-max", dest="m_max", type=int, default=bern.DEFAULT_M_MAX)
    for name in ("tail", "orlicz"):
        b = add(bern_p, name)
        b.add_argument("--sigma", type=float, required=True)
        b.add_argument("--K", type=float, required=True)
        b.add_argument("--n", type=int, required=True)
        if name == "tail":
            b.add_argument("--t", type=float, required=True)

    fin = sub.add_parser("finmax").add_subparsers(dest="action", required=True)
    for name in ("expect", "deviate"):
        f = add(fin, name)
        f.add_argument("--tau", type=float, required=True)
        f.add_argument("--L", type=float, required=True)
        f.add_argument("--p", type=int, required=True)
        if name == "deviate":
            f.add_argument("--t", type=float, help="omit for the shifted norm form")

    tree_p = sub.add_parser("tree").add_subparsers(dest="action", required=True)
    for name in ("validate", "gamma", "generic", "deviate"):
        t = add(tree_p, name)
        t.add_argument("--in", dest="input", required=True)
        if name in ("generic", "deviate"):
            t.add_argument("--delta", type=float)
        if name == "deviate":
            t.add_argument("--t", type=float, required=True)
            t.add_argument("--mode", choices=["uniform", "generic"], default="uniform")

    brk = sub.add_parser("bracket").add_subparsers(dest="action", required=True)
    bb = add(brk, "build")
    bb.add_argument("--class", dest="cls", required=True)
    bb.add_argument("--S", type=int, required=True)
    bb.add_argument("--K", dest="K_gen", type=float, default=1.0, help="generalized bracket scale")
    be = add(brk, "entropy")
    be.add_argument("--profile")
    be.add_argument("--counts", help="comma-separated bracket counts N~_0,..,N~_S")
    be.add_argument("--class", dest="cls")
    be.add_argument("--S", dest="S_max", type=int)
    be.add_argument("--n", type=int, default=2)

    ep_p = sub.add_parser("ep").add_subparsers(dest="action", required=True)
    for name in ("expect", "deviate"):
        x = add(ep_p, name)
        x.add_argument("--n", type=int, required=True)
        x.add_argument("--K", type=float, default=1.0)
        x.add_argument("--profile")
        x.add_argument("--counts")
        x.add_argument("--class", dest="cls")
        x.add_argument("--S-max", dest="S_max", type=int)
        if name == "deviate":
            x.add_argument("--t", type=float, action="append")
            x.add_argument("--statement-form", action="store_true",
                           help="drop the standalone 24 sqrt6 term from the shift")
    ms = add(ep_p, "massart")
    ms.add_argument("--E-sup", dest="E_sup", type=float, required=True)
    ms.add_argument("--K-bound", dest="K_bound", type=float, required=True)
    ms.add_argument("--n", type=int, required=True)
    ms.add_argument("--eps", type=float, required=True)
    ms.add_argument("--t", type=float, required=True)

    simp = sub.add_parser("simulate").add_subparsers(dest="action", required=True)
    for name in ("sup", "verify", "chaincheck"):
        s = add(simp, name)
        s.add_argument("--config", required=True)
        s.add_argument("--workers", type=int)

    rp = add(sub, "report")
    rp.add_argument("--config")
    rp.add_argument("--seed", type=int)
    rp.add_argument("--workers", type=int)
    return p


COMMANDS = {"psi": cmd_psi, "norm": cmd_norm, "bernstein": cmd_bernstein, "finmax": cmd_finmax,
            "tree": cmd_tree, "bracket": cmd_bracket, "ep": cmd_ep, "simulate": cmd_simulate,
            "report": cmd_report}


def run(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        result = COMMANDS[args.command](args)
    except io.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    fmt = args.format or result.cfg_format or "tsv"
    text = result.render(fmt)
    target = io.resolve_output(args.out or result.cfg_output)
    if target is None:
        stdout.write(text)
    else:
        target.write_text(text)
    return EXIT_FAIL if result.failed else EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
