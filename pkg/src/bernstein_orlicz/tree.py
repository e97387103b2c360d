"""Finite labeled trees, tree chains and the bounds evaluated along them.

A tree has generations G_0 .. G_S of dense integer node ids 1..N and a
parent map sending every node of G_s (s >= 1) into G_{s-1}. Each end node
k in G_S determines a branch j_0(k), .., j_S(k). Labels are stored through
their norms ||W_j||_{Psi_{L_s}}; the random labels themselves only matter
for pathwise checks in the simulation module.
"""

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .finite_max import ShiftedNormStatement
from .orlicz import TAIL_TO_NORM_FACTOR, OrliczParams, TailBound

LOG2 = math.log(2.0)
#: label_norm <= tau 2^{-s} is checked with this relative slack
NORM_RTOL = 1e-12


class Violation(NamedTuple):
    code: str
    node: object
    message: str


class ValidationReport(NamedTuple):
    valid: bool
    violations: list


class TreeError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(f"{v.message} (node {v.node})" for v in self.violations[:5])
        super().__init__(msg)


@dataclass(frozen=True)
class FiniteTree:
    generations: tuple
    parent: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "generations", tuple(tuple(int(j) for j in g) for g in self.generations))
        object.__setattr__(self, "parent", {int(k): int(v) for k, v in dict(self.parent).items()})

    @property
    def S(self):
        return len(self.generations) - 1

    @property
    def sizes(self):
        return [len(g) for g in self.generations]

    def generation_of(self):
        out = {}
        for s, g in enumerate(self.generations):
            for j in g:
                out.setdefault(j, s)
        return out

    def branch(self, k):
        """Nodes j_0(k), .., j_S(k) for an end node k."""
        path = [k]
        for _ in range(self.S):
            path.append(self.parent[path[-1]])
        return path[::-1]


def validate_tree(tree):
    """List every broken tree invariant; never raises on malformed input."""
    bad = []
    gens = tree.generations
    if len(gens) == 0:
        return ValidationReport(False, [Violation("no-generations", None, "tree has no generations")])
    seen = {}
    for s, g in enumerate(gens):
        if len(g) == 0:
            bad.append(Violation("empty-generation", None, f"generation {s} is empty"))
        for j in g:
            if j in seen:
                bad.append(Violation("not-disjoint", j,
                                     f"generations not disjoint: node in G_{seen[j]} and G_{s}"))
            else:
                seen[j] = s
    n_nodes = len(seen)
    stray = sorted(j for j in seen if not 1 <= j <= n_nodes)
    for j in stray:
        bad.append(Violation("ids-not-dense", j, f"node ids must be exactly 1..{n_nodes}"))
    for s, g in enumerate(gens):
        for j in g:
            if s == 0:
                if j in tree.parent:
                    bad.append(Violation("root-has-parent", j, "node in G_0 must not have a parent"))
                continue
            if j not in tree.parent:
                bad.append(Violation("missing-parent", j, f"node in G_{s} has no parent"))
                continue
            p = tree.parent[j]
            if seen.get(p) != s - 1:
                bad.append(Violation("parent-not-previous", j,
                                     f"parent not in previous generation (parent {p} of a G_{s} node)"))
    for j in tree.parent:
        if j not in seen:
            bad.append(Violation("unknown-node", j, "parent map mentions a node outside the generations"))
    return ValidationReport(not bad, bad)


@dataclass(frozen=True)
class LabeledTree:
    tree: FiniteTree
    label_norm: dict
    Ls: tuple

    def __post_init__(self):
        object.__setattr__(self, "label_norm", {int(k): float(v) for k, v in dict(self.label_norm).items()})
        object.__setattr__(self, "Ls", tuple(float(x) for x in self.Ls))

    def violations(self):
        out = list(validate_tree(self.tree).violations)
        if len(self.Ls) != self.tree.S + 1:
            out.append(Violation("Ls-length", None, f"need {self.tree.S + 1} constants L_s, got {len(self.Ls)}"))
        for L in self.Ls:
            if not L >= 0:
                out.append(Violation("Ls-negative", None, f"L_s must be >= 0, got {L}"))
        for g in self.tree.generations:
            for j in g:
                v = self.label_norm.get(j)
                if v is None:
                    out.append(Violation("missing-label", j, "label norm missing"))
                elif not v >= 0:
                    out.append(Violation("negative-label", j, f"label norm must be >= 0, got {v}"))
        return out


@dataclass(frozen=True)
class ChainCertificate:
    """A (delta, tau, L) tree chain: label norms at level s are at most tau 2^{-s}."""

    labeled: LabeledTree
    tau: float
    delta: float = 0.0

    def violations(self):
        out = self.labeled.violations()
        if out:
            return out
        for s, g in enumerate(self.labeled.tree.generations):
            cap = self.tau * 2.0**-s
            for j in g:
                v = self.labeled.label_norm[j]
                if v > cap * (1.0 + NORM_RTOL):
                    out.append(Violation("norm-condition", j,
                                         f"label norm {v:.9g} exceeds tau 2^-{s} = {cap:.9g}"))
        if self.delta < 0:
            out.append(Violation("delta-negative", None, "delta must be >= 0"))
        return out

    def require_valid(self):
        bad = self.violations()
        if bad:
            raise TreeError(bad)
        return self


def _entropy_term(size, L):
    lg = math.log1p(size)
    return math.sqrt(lg) + 0.5 * L * lg


class GammaBound(NamedTuple):
    gamma: float
    expectation_bound: float


def gamma_bound(cert):
    """gamma = tau sum_s 2^{-s} [sqrt log(1+|G_s|) + (L_s/2) log(1+|G_s|)], E sup <= gamma + delta."""
    cert.require_valid()
    tree = cert.labeled.tree
    gamma = cert.tau * math.fsum(2.0**-s * _entropy_term(size, L)
                                 for s, (size, L) in enumerate(zip(tree.sizes, cert.labeled.Ls)))
    return GammaBound(gamma, gamma + cert.delta)


@dataclass(frozen=True)
class GenericConstants:
    gamma1_star: float
    gamma2_star: float
    gamma_star: float
    tau_star: float
    L_star: float


def _branch_maxima(labeled, weights):
    """max over end nodes k of sum_s norm(j_s(k)) * weight(s), for each weight function.

    Accumulated generation by generation, so the cost is linear in the number of nodes.
    """
    tree = labeled.tree
    acc = [dict() for _ in weights]
    for s, g in enumerate(tree.generations):
        ws = [w(s) for w in weights]
        for j in g:
            norm = labeled.label_norm[j]
            for a, w in zip(acc, ws):
                a[j] = norm * w + (a[tree.parent[j]] if s > 0 else 0.0)
    end = tree.generations[-1]
    return [max(a[k] for k in end) for a in acc]


def generic_constants(labeled):
    bad = labeled.violations()
    if bad:
        raise TreeError(bad)
    sizes, Ls = labeled.tree.sizes, labeled.Ls

    def lg(s):
        return math.log1p(sizes[s])

    g1, g2, gam, tau, ltau = _branch_maxima(labeled, [
        lambda s: math.sqrt(lg(s)),
        lambda s: Ls[s] * lg(s),
        lambda s: math.sqrt(lg(s)) + 0.5 * Ls[s] * lg(s),
        lambda s: math.sqrt(1.0 + s),
        lambda s: (1.0 + s) * Ls[s],
    ])
    if tau == 0.0:
        if ltau != 0.0:
            raise ValueError("degenerate labels")
        return GenericConstants(g1, g2, gam, 0.0, 0.0)
    return GenericConstants(g1, g2, gam, tau, ltau / tau)


def generic_deviation_threshold(constants, delta, t):
    """gamma_* + delta + tau_*(1 + L_*/2) + tau_*(sqrt t + L_* t / 2), probability <= min(1, 2e^{-t})."""
    if not t > 0:
        raise ValueError("t must be positive")
    c = constants
    thr = c.gamma_star + delta + c.tau_star * (1.0 + 0.5 * c.L_star) + c.tau_star * (math.sqrt(t) + 0.5 * c.L_star * t)
    return TailBound(thr, min(1.0, 2.0 * math.exp(-t)))


class GenericDeviation(NamedTuple):
    statement: ShiftedNormStatement
    expectation_bound: float


def generic_orlicz_deviation(constants, delta):
    c = constants
    shift = c.gamma_star + delta + c.tau_star * (1.0 + 0.5 * c.L_star)
    params = OrliczParams(L=TAIL_TO_NORM_FACTOR * c.L_star, tau=TAIL_TO_NORM_FACTOR * c.tau_star)
    # Jensen on the shifted norm statement: E Z_+ <= tau' Psi_{L'}^{-1}(1)
    extra = params.tau * (math.sqrt(LOG2) + 0.5 * params.L * LOG2)
    return GenericDeviation(ShiftedNormStatement(shift, params), shift + extra)


def uniform_tree_L(Ls):
    """L = sum_s 2^{-s} L_s (1+s) / 4."""
    return math.fsum(2.0**-s * L * (1 + s) for s, L in enumerate(Ls)) / 4.0


def uniform_tree_deviation(cert, t):
    """gamma + delta + 4 tau (1 + L/2) + 4 tau (sqrt t + L t / 2)."""
    if not t > 0:
        raise ValueError("t must be positive")
    gamma = gamma_bound(cert).gamma
    L = uniform_tree_L(cert.labeled.Ls)
    four_tau = 4.0 * cert.tau
    thr = gamma + cert.delta + four_tau * (1.0 + 0.5 * L) + four_tau * (math.sqrt(t) + 0.5 * L * t)
    return TailBound(thr, min(1.0, 2.0 * math.exp(-t)))


class TalagrandSizes(NamedTuple):
    sizes: list
    admissible: list


#: sizes 2^(2^(2s)) are exact machine integers only while 2^(2s) <= 62
TALAGRAND_MAX_EXPONENT = 62


def talagrand_sizes(S):
    if S < 0:
        raise ValueError("S must be >= 0")
    if 2 ** (2 * S) > TALAGRAND_MAX_EXPONENT:
        raise OverflowError(f"sizes 2^(2^(2s)) overflow for S = {S}; admissible range is 0 <= S <= 2")
    sizes = [2 ** (2 ** (2 * s)) for s in range(S + 1)]
    ok = [math.log1p(n) <= 2.0 ** (2 * (s + 1)) for s, n in enumerate(sizes)]
    return TalagrandSizes(sizes, ok)


class TalagrandGammas(NamedTuple):
    gamma1_0: float
    gamma2_0: float
    gamma_0: float


def talagrand_gammas(labeled):
    """gamma_{1,0} = max_k sum_s norm 2^s, gamma_{2,0} = max_k sum_s norm L_s 4^s, gamma_0 = max_k (g1 + g2/2)."""
    bad = labeled.violations()
    if bad:
        raise TreeError(bad)
    Ls = labeled.Ls
    g1, g2, g0 = _branch_maxima(labeled, [
        lambda s: 2.0**s,
        lambda s: Ls[s] * 4.0**s,
        lambda s: 2.0**s + 0.5 * Ls[s] * 4.0**s,
    ])
    return TalagrandGammas(g1, g2, g0)


def talagrand_expectation_bound(labeled, delta=0.0):
    """(3 + sqrt(3 log 2)) gamma_{1,0} + ((3 + 3 log 2)/2) gamma_{2,0} + delta."""
    g = talagrand_gammas(labeled)
    return (3.0 + math.sqrt(3.0 * LOG2)) * g.gamma1_0 + 0.5 * (3.0 + 3.0 * LOG2) * g.gamma2_0 + delta


# serialization

def tree_to_dict(obj):
    """JSON form {S, generations, parent, labels, Ls, tau, delta} of a tree, labeled tree or certificate."""
    cert = obj if isinstance(obj, ChainCertificate) else None
    labeled = cert.labeled if cert else (obj if isinstance(obj, LabeledTree) else None)
    tree = labeled.tree if labeled else obj
    out = {
        "S": tree.S,
        "generations": [list(g) for g in tree.generations],
        "parent": {str(k): v for k, v in sorted(tree.parent.items())},
    }
    if labeled:
        out["labels"] = {str(k): v for k, v in sorted(labeled.label_norm.items())}
        out["Ls"] = list(labeled.Ls)
    if cert:
        out["tau"] = cert.tau
        out["delta"] = cert.delta
    return out


def tree_from_dict(d):
    """Inverse of tree_to_dict; returns the richest object the fields allow."""
    tree = FiniteTree(d["generations"], {int(k): int(v) for k, v in d.get("parent", {}).items()})
    if "S" in d and d["S"] != tree.S:
        raise ValueError(f"S = {d['S']} disagrees with {len(tree.generations)} generations")
    if "labels" not in d:
        return tree
    labeled = LabeledTree(tree, {int(k): v for k, v in d["labels"].items()}, d["Ls"])
    if "tau" not in d:
        return labeled
    return ChainCertificate(labeled, d["tau"], d.get("delta", 0.0))


def load_tree(path):
    with open(path) as fh:
        return tree_from_dict(json.load(fh))


def save_tree(obj, path):
    with open(path, "w") as fh:
        json.dump(tree_to_dict(obj), fh, indent=2)
