"""Function classes, bracket ladders, entropy accounting and the tree chain built from brackets.

Every class is evaluated on a finite partition of the sample space into
cells with known probabilities ``w``. A function is then a vector over
cells, P f = f . w exactly, and the pointwise order g^L <= g <= g^U is the
order of vectors. Two built-in classes:

* ``FiniteClass``: p functions on a discrete design with explicit support.
* ``HalfLineClass``: indicators 1{x <= theta} under a continuous design law,
  worked in probability scale u = F(x). Its cells are the 4^S quantile
  cells of width 4^{-S}; its finite members are the indicators at the
  cell edges, and the continuum of thresholds is handled cell by cell.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .tree import ChainCertificate, FiniteTree, LabeledTree, validate_tree

SQRT6 = math.sqrt(6.0)
#: scale of a tree chain built from brackets
CHAIN_TAU = 3.0 * SQRT6
DEFAULT_M_MAX = 20
_TOL = 1e-12


class BracketingError(ValueError):
    pass


class GeneralizedBracketError(BracketingError):
    def __init__(self, K, minimal_K):
        self.K = K
        self.minimal_K = minimal_K
        super().__init__(f"generalized bracket certificate fails at K = {K:g}; "
                         f"smallest feasible K found by scan: {minimal_K:.9g}")


def _moment_ratio_ok(width, w, K, m_max):
    """P|width|^m <= (m!/2)(2K)^(m-2) for m = 2..m_max."""
    a = np.abs(width)
    for m in range(2, m_max + 1):
        lhs = float(np.dot(a**m, w))
        rhs = 0.5 * math.factorial(m) * (2.0 * K) ** (m - 2)
        if lhs > rhs * (1.0 + _TOL):
            return False
    return True


def minimal_generalized_K(width, w, m_max=DEFAULT_M_MAX):
    """Smallest K with P|width|^m <= (m!/2)(2K)^(m-2), m = 2..m_max (inf if m = 2 fails)."""
    a = np.abs(np.asarray(width, dtype=float))
    if float(np.dot(a**2, w)) > 1.0 + _TOL:
        return math.inf
    K = 0.0
    for m in range(3, m_max + 1):
        lhs = float(np.dot(a**m, w))
        K = max(K, 0.5 * (2.0 * lhs / math.factorial(m)) ** (1.0 / (m - 2)))
    return K


class FunctionClass:
    """Finite evaluation model: ``values`` (p, m) over cells with probabilities ``w`` (m,)."""

    kind = "abstract"
    values: np.ndarray
    w: np.ndarray

    @property
    def p(self):
        return self.values.shape[0]

    @property
    def m(self):
        return self.values.shape[1]

    def expectations(self):
        return self.values @ self.w

    def norms(self):
        return np.sqrt((self.values**2) @ self.w)

    def check_normalized(self):
        top = float(np.max(self.norms()))
        if top > 1.0 + _TOL:
            raise BracketingError(f"class is not normalized: sup ||g|| = {top:.9g} > 1")
        return top

    def bernstein_K(self, m_max=DEFAULT_M_MAX):
        """Smallest K >= 1 with sup_g P|g|^m <= (m!/2) K^(m-2), m = 2..m_max."""
        a = np.abs(self.values)
        if float(np.max((a**2) @ self.w)) > 1.0 + _TOL:
            raise BracketingError("uniform Bernstein condition fails at m = 2")
        K = 1.0
        for mm in range(3, m_max + 1):
            top = float(np.max((a**mm) @ self.w))
            K = max(K, (2.0 * top / math.factorial(mm)) ** (1.0 / (mm - 2)))
        return K

    def cells_of(self, u):
        """Map uniforms to cell indices by inverse CDF over the cells."""
        cdf = np.cumsum(self.w)
        idx = np.searchsorted(cdf, u, side="left")
        return np.minimum(idx, self.m - 1)

    def bracket_counts(self, S):
        """Bracket counts N~_0..N~_S, built explicitly unless a subclass knows them."""
        return [generalized_brackets(self).count] + [build_brackets(self, s).count for s in range(1, S + 1)]

    def to_dict(self):
        raise NotImplementedError


class FiniteClass(FunctionClass):
    """p functions on a discrete design with support points ``support`` and probabilities ``probs``."""

    kind = "finite-matrix"

    def __init__(self, values, probs, support=None):
        values = np.atleast_2d(np.asarray(values, dtype=float))
        probs = np.asarray(probs, dtype=float)
        if values.shape[1] != probs.size:
            raise BracketingError("values and probs disagree on the number of support points")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise BracketingError("probs must be a probability vector")
        self.values = values
        self.w = probs / probs.sum()
        self.support = (np.arange(probs.size, dtype=float) if support is None
                        else np.asarray(support, dtype=float))

    def to_dict(self):
        return {"kind": self.kind, "p": self.p, "support": self.support.tolist(),
                "probs": self.w.tolist(), "values": self.values.tolist()}


class HalfLineClass(FunctionClass):
    """{1{x <= theta}} under a continuous design, resolved on 4^levels quantile cells."""

    kind = "half-line-indicators"

    def __init__(self, levels, design=None):
        if levels < 0:
            raise BracketingError("levels must be >= 0")
        if design is not None and design.atoms() is not None:
            raise BracketingError("half-line class needs a continuous design law")
        self.levels = int(levels)
        self.design = design
        m = 4**self.levels
        self.edges = np.arange(m + 1, dtype=float) / m
        # member i is 1{u <= q_i}, i = 0..m
        self.values = np.tril(np.ones((m + 1, m)), k=-1)
        self.w = np.full(m, 1.0 / m)

    def thresholds(self):
        """theta_i = F^{-1}(q_i) on the original scale (endpoints map to -inf / +inf)."""
        if self.design is None:
            return self.edges.copy()
        with np.errstate(divide="ignore"):
            return np.asarray(self.design.ppf(self.edges), dtype=float)

    def cells_of(self, u):
        idx = np.ceil(np.asarray(u) * self.m).astype(np.int64) - 1
        return np.clip(idx, 0, self.m - 1)

    def bracket_counts(self, S):
        return [1] + [4**s for s in range(1, S + 1)]

    def cell_member(self, k):
        """Finite member sharing the chain branch of every threshold inside cell k."""
        return k + 1

    def to_dict(self):
        out = {"kind": self.kind, "levels": self.levels}
        if self.design is not None:
            out["design"] = self.design.to_dict()
        return out


def class_from_dict(d):
    from .distributions import from_dict as dist_from_dict

    kind = d.get("kind")
    if kind == "finite-matrix":
        return FiniteClass(d["values"], d["probs"], d.get("support"))
    if kind == "half-line-indicators":
        design = dist_from_dict(d["design"]) if "design" in d else None
        return HalfLineClass(d.get("levels", 3), design)
    raise BracketingError(f"unknown function class kind {kind!r}")


@dataclass
class BracketLevel:
    """Bracket pairs at level s plus the bracket assigned to every finite member (lowest index)."""

    s: int
    lower: np.ndarray
    upper: np.ndarray
    assign: np.ndarray
    K: float = None

    @property
    def count(self):
        return self.lower.shape[0]

    def widths(self, w):
        return np.sqrt(((self.upper - self.lower) ** 2) @ w)


def _first_containing(lower, upper, g):
    ok = np.all(lower <= g + _TOL, axis=1) & np.all(g <= upper + _TOL, axis=1)
    hits = np.flatnonzero(ok)
    return int(hits[0]) if hits.size else -1


def _assign_lowest(lower, upper, values):
    out = np.empty(values.shape[0], dtype=np.int64)
    for i, g in enumerate(values):
        j = _first_containing(lower, upper, g)
        if j < 0:
            raise BracketingError(f"member {i} is not covered by any bracket")
        out[i] = j
    return out


def _greedy_groups(values, accept):
    """First-fit grouping: each function joins the first group whose envelope stays acceptable."""
    lows, ups = [], []
    for g in values:
        for j in range(len(lows)):
            lo, up = np.minimum(lows[j], g), np.maximum(ups[j], g)
            if accept(lo, up):
                lows[j], ups[j] = lo, up
                break
        else:
            lows.append(g.copy())
            ups.append(g.copy())
    return np.array(lows), np.array(ups)


def build_brackets(cls, s):
    """A 2^{-s}-bracketing set (s >= 1) covering the class."""
    if s < 1:
        raise BracketingError("use generalized_brackets for level 0")
    if isinstance(cls, HalfLineClass):
        if s > cls.levels:
            raise BracketingError(f"level {s} is finer than the class resolution {cls.levels}")
        cuts = 4**s
        step = 4 ** (cls.levels - s)
        k = np.arange(cuts)
        lower = cls.values[k * step]
        upper = cls.values[(k + 1) * step]
        member = np.arange(cls.p)
        assign = np.maximum(0, -(-member // step) - 1)
        return BracketLevel(s, lower, upper, assign)
    eps = 2.0**-s
    w = cls.w

    def accept(lo, up):
        return math.sqrt(float(((up - lo) ** 2) @ w)) <= eps

    lower, upper = _greedy_groups(cls.values, accept)
    return BracketLevel(s, lower, upper, _assign_lowest(lower, upper, cls.values))


def generalized_brackets(cls, K=1.0, m_max=DEFAULT_M_MAX, allow_partition=True):
    """Level-0 brackets whose widths satisfy P|width|^m <= (m!/2)(2K)^(m-2).

    The first try is the single pointwise envelope pair [inf_g g, sup_g g].
    """
    w = cls.w
    lo, up = cls.values.min(axis=0), cls.values.max(axis=0)
    if _moment_ratio_ok(up - lo, w, K, m_max):
        lower, upper = lo[None, :], up[None, :]
        return BracketLevel(0, lower, upper, np.zeros(cls.p, dtype=np.int64), K)
    if not allow_partition or isinstance(cls, HalfLineClass):
        raise GeneralizedBracketError(K, minimal_generalized_K(up - lo, w, m_max))
    lower, upper = _greedy_groups(cls.values, lambda a, b: _moment_ratio_ok(b - a, w, K, m_max))
    return BracketLevel(0, lower, upper, _assign_lowest(lower, upper, cls.values), K)


def bracket_ladder(cls, S, K=1.0, m_max=DEFAULT_M_MAX, allow_partition=True):
    return [generalized_brackets(cls, K, m_max, allow_partition)] + [build_brackets(cls, s) for s in range(1, S + 1)]


# entropy accounting

_EXACT_LIMIT = 2**1000


@dataclass(frozen=True)
class EntropyProfile:
    Ntilde: tuple
    Htilde: tuple
    Nprod: tuple
    Hprod: tuple
    approximate: bool = False

    @property
    def S(self):
        return len(self.Ntilde) - 1

    def to_dict(self):
        return {"Ntilde": [int(x) if isinstance(x, int) else x for x in self.Ntilde]}


def entropy_profile(counts):
    """N~_s, H~_s = log(1+N~_s), N_s = prod_{k<=s} N~_k, H_s = log(1+N_s).

    ``counts`` may be bracket levels or plain integers. Products are exact
    integers; past 2^1000 the log is taken in the log domain and flagged.
    """
    nt = [c.count if isinstance(c, BracketLevel) else c for c in counts]
    if not nt:
        raise ValueError("need at least level 0")
    for c in nt:
        if not c >= 1:
            raise ValueError("bracket counts must be >= 1")
    Ht, Np, Hp = [], [], []
    prod, log_prod, approx = 1, 0.0, False
    for c in nt:
        Ht.append(math.log1p(c) if c < 1e300 else math.log(c))
        log_prod += math.log(c)
        if not approx and isinstance(c, (int, np.integer)):
            prod *= int(c)
            if prod > _EXACT_LIMIT:
                approx = True
        else:
            approx = True
        if approx:
            Np.append(math.exp(log_prod) if log_prod < 700 else math.inf)
            Hp.append(log_prod + math.log1p(math.exp(-log_prod)))
        else:
            Np.append(prod)
            Hp.append(math.log1p(prod))
    return EntropyProfile(tuple(nt), tuple(Ht), tuple(Np), tuple(Hp), approx)


class EntropySum(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def entropy_sum_bound(profile, S=None):
    """sum_{s=1}^S 2^{-s} sqrt(H_s) against sqrt(H~_0) + 2 sum_{s=1}^S 2^{-s} sqrt(H~_s)."""
    S = profile.S if S is None else S
    if S > profile.S:
        raise ValueError("profile too short")
    lhs = math.fsum(2.0**-s * math.sqrt(profile.Hprod[s]) for s in range(1, S + 1))
    rhs = math.sqrt(profile.Htilde[0]) + 2.0 * math.fsum(
        2.0**-s * math.sqrt(profile.Htilde[s]) for s in range(1, S + 1))
    return EntropySum(lhs, rhs, lhs <= rhs)


# tree chain from brackets

def chain_L(K, K_levels, n):
    """L_0 = 4 sqrt6 K / sqrt n, L_s = 2 sqrt6 2^s K_{s-1} / (3 sqrt n)."""
    rn = math.sqrt(n)
    return [4.0 * SQRT6 * K / rn] + [2.0 * SQRT6 * 2.0**s * K_levels[s - 1] / (3.0 * rn)
                                     for s in range(1, len(K_levels) + 1)]


def chain_delta(K_levels, n):
    """delta = 4 sqrt n sum_{s=1}^S 4^{-s} / K_{s-1} + sqrt n 2^{-S}."""
    S = len(K_levels)
    rn = math.sqrt(n)
    return 4.0 * rn * math.fsum(4.0**-s / K_levels[s - 1] for s in range(1, S + 1)) + rn * 2.0**-S


class LabelTerm(NamedTuple):
    """One summand |nu_n(f)| of a node label, with the norm it was certified at."""

    f: np.ndarray
    budget_sigma: float
    certified: float


@dataclass
class TruncatedChainBuild:
    cls: FunctionClass
    n: int
    K: float
    K_levels: list
    Ls: list
    delta: float
    levels: list
    # per generation: node envelope pairs and node ids
    node_lower: list
    node_upper: list
    node_ids: list
    parent_index: list
    end_node: np.ndarray
    terms: dict
    cert: ChainCertificate
    recipe: str = "proof"
    failures: list = field(default_factory=list)

    @property
    def S(self):
        return len(self.node_lower) - 1

    @property
    def tree(self):
        return self.cert.labeled.tree

    def certified(self):
        return not self.failures and not self.cert.violations()


def _certify_term(f, w, L_s, n, budget_sigma, m_max):
    """Norm bound for ||nu_n(f)||_{Psi_{L_s}} from the Bernstein moments of f - Pf.

    First tries the actual standard deviation of f with the smallest moment
    scale; falls back to the level budget with K' = L_s sqrt(n) sigma / sqrt6.
    Returns the certified norm or None.
    """
    c = f - float(f @ w)
    a = np.abs(c)
    var = float((a**2) @ w)
    if var <= 0.0:
        return 0.0
    moments = [float((a**m) @ w) for m in range(3, m_max + 1)]

    def scale_needed(sig):
        K = 0.0
        for m, mom in zip(range(3, m_max + 1), moments):
            K = max(K, (2.0 * mom / (math.factorial(m) * sig**2)) ** (1.0 / (m - 2)))
        return K

    rn = math.sqrt(n)
    sig = math.sqrt(var)
    if SQRT6 * scale_needed(sig) / (rn * sig) <= L_s * (1.0 + _TOL):
        return SQRT6 * sig
    if var <= budget_sigma**2 * (1.0 + _TOL):
        if SQRT6 * scale_needed(budget_sigma) / (rn * budget_sigma) <= L_s * (1.0 + _TOL):
            return SQRT6 * budget_sigma
    return None


def _dedupe(lowers, uppers):
    """Distinct (lower, upper) rows in order of first appearance, with the inverse map."""
    key = np.ascontiguousarray(np.hstack([lowers, uppers]))
    seen, first, inv = {}, [], np.empty(key.shape[0], dtype=np.int64)
    for i, row in enumerate(key):
        b = row.tobytes()
        if b not in seen:
            seen[b] = len(first)
            first.append(i)
        inv[i] = seen[b]
    first = np.array(first, dtype=np.int64)
    return lowers[first], uppers[first], inv


def build_tree_chain(cls, levels, K_levels, n, K=None, m_max=DEFAULT_M_MAX, recipe="proof"):
    """Tree chain for {nu_n(g)} from a bracket ladder and truncation levels K_0..K_{S-1}.

    ``recipe="proof"`` uses labels for which |nu_n(g)| <= sum of branch labels + delta
    holds on every sample path; ``recipe="indicator"`` keeps the single-indicator labels
    1{y_{s-1} = 0} for comparison.
    """
    if recipe not in ("proof", "indicator"):
        raise ValueError("recipe must be 'proof' or 'indicator'")
    S = len(levels) - 1
    if S < 0 or levels[0].s != 0:
        raise BracketingError("bracket level 0 missing")
    for s, lev in enumerate(levels):
        if lev.s != s:
            raise BracketingError(f"bracket level {s} missing")
    K_levels = [float(k) for k in K_levels]
    if len(K_levels) != S:
        raise BracketingError(f"need {S} truncation levels, got {len(K_levels)}")
    if any(k <= 0 for k in K_levels):
        raise BracketingError("truncation levels must be positive")
    if any(b > a * (1.0 + _TOL) for a, b in zip(K_levels, K_levels[1:])):
        raise BracketingError("truncation levels must be nonincreasing")
    if K is None:
        K = cls.bernstein_K(m_max)
    w = cls.w
    p = cls.p

    # envelopes per member and level
    env_lo = np.empty((p, S + 1, cls.m))
    env_up = np.empty_like(env_lo)
    lo_run = np.full((p, cls.m), -np.inf)
    up_run = np.full((p, cls.m), np.inf)
    for s, lev in enumerate(levels):
        lo_run = np.maximum(lo_run, lev.lower[lev.assign])
        up_run = np.minimum(up_run, lev.upper[lev.assign])
        env_lo[:, s, :] = lo_run
        env_up[:, s, :] = up_run

    node_lower, node_upper, member_node, node_ids, parent_index = [], [], [], [], []
    next_id = 1
    for s in range(S + 1):
        lo, up, inv = _dedupe(env_lo[:, s, :], env_up[:, s, :])
        node_lower.append(lo)
        node_upper.append(up)
        member_node.append(inv)
        node_ids.append(list(range(next_id, next_id + lo.shape[0])))
        next_id += lo.shape[0]
        if s == 0:
            parent_index.append(None)
            continue
        par = np.empty(lo.shape[0], dtype=np.int64)
        for l in range(lo.shape[0]):
            k = _first_containing_pair(node_lower[s - 1], node_upper[s - 1], lo[l], up[l])
            if k < 0:
                raise BracketingError(f"no parent bracket contains node {l} of generation {s}")
            par[l] = k
        parent_index.append(par)

    Ls = chain_L(K, K_levels, n)
    delta = chain_delta(K_levels, n)

    # node label functions, walking each node's ancestors in the tree
    terms, label_norm, failures = {}, {}, []
    for s in range(S + 1):
        for l in range(node_lower[s].shape[0]):
            fs = _label_functions(node_lower, node_upper, parent_index, K_levels, s, l, S, recipe)
            budgets = _label_budgets(s)
            certified = []
            for f, b in zip(fs, budgets):
                c = _certify_term(f, w, Ls[s], n, b, m_max)
                if c is None:
                    failures.append((node_ids[s][l], s))
                    c = math.inf
                certified.append(c)
            j = node_ids[s][l]
            terms[j] = [LabelTerm(f, b, c) for f, b, c in zip(fs, budgets, certified)]
            label_norm[j] = math.fsum(certified) if all(map(math.isfinite, certified)) else math.inf

    parent = {}
    for s in range(1, S + 1):
        for l, k in enumerate(parent_index[s]):
            parent[node_ids[s][l]] = node_ids[s - 1][int(k)]
    tree = FiniteTree([node_ids[s] for s in range(S + 1)], parent)
    labeled = LabeledTree(tree, label_norm, Ls)
    cert = ChainCertificate(labeled, CHAIN_TAU, delta)
    end_node = np.array([node_ids[S][int(i)] for i in member_node[S]], dtype=np.int64)
    return TruncatedChainBuild(cls, n, K, K_levels, Ls, delta, levels, node_lower, node_upper,
                               node_ids, parent_index, end_node, terms, cert, recipe, failures)


def _first_containing_pair(lower, upper, lo, up):
    ok = np.all(lower <= lo + _TOL, axis=1) & np.all(up <= upper + _TOL, axis=1)
    hits = np.flatnonzero(ok)
    return int(hits[0]) if hits.size else -1


def _label_budgets(s):
    # sigma budgets whose sqrt6-multiples add up to 3 sqrt6 2^{-s}
    if s == 0:
        return (2.0, 1.0)
    return (2.0 * 2.0**-s, 2.0**-s)


def _label_functions(node_lower, node_upper, parent_index, K_levels, s, l, S, recipe):
    """The two functions f1, f2 with W_j = |nu_n(f1)| + |nu_n(f2)| for node l of generation s."""
    # ancestors along the tree: chain[k] = node index at generation k
    chain = [l]
    for k in range(s, 0, -1):
        chain.append(int(parent_index[k][chain[-1]]))
    chain = chain[::-1]
    a = [node_lower[k][chain[k]] for k in range(s + 1)]
    d = [node_upper[k][chain[k]] - node_lower[k][chain[k]] for k in range(s + 1)]
    y = [(d[k] >= K_levels[k]).astype(float) for k in range(min(s + 1, S))]
    if recipe == "indicator":
        if s == 0:
            return a[0], d[0]
        keep = 1.0 - y[s - 1]
        return (a[s] - a[s - 1]) * keep, d[s] * keep
    alive = np.ones_like(a[0])
    for k in range(s):
        alive = alive * (1.0 - y[k])
    if s == 0:
        return a[0], (d[0] * y[0] if S > 0 else d[0])
    inc = (a[s] - a[s - 1]) * alive
    rest = d[s] * (y[s] if s < S else 1.0) * alive
    return inc, rest


def check_build(build):
    """Structural checks on a finished build; returns a list of messages (empty when sound)."""
    msgs = []
    rep = validate_tree(build.tree)
    msgs += [v.message for v in rep.violations]
    msgs += [v.message for v in build.cert.violations() if v not in rep.violations]
    for j, s in build.failures:
        msgs.append(f"label of node {j} (generation {s}) could not be certified")
    cls, w = build.cls, build.cls.w
    for s in range(build.S + 1):
        if build.node_lower[s].shape[0] > _prod_bound(build, s):
            msgs.append(f"generation {s} has more nodes than N_{s}")
        widths = build.node_upper[s] - build.node_lower[s]
        if np.any(widths < -_TOL):
            msgs.append(f"generation {s} has a reversed bracket")
        if s >= 1:
            nrm = np.sqrt((widths**2) @ w)
            if np.any(nrm > 2.0**-s * (1.0 + _TOL)):
                msgs.append(f"generation {s} has a bracket wider than 2^-{s}")
        if s < build.S:
            y = widths >= build.K_levels[s]
            mass = (widths * y) @ w
            if np.any(mass > 4.0**-s / build.K_levels[s] * (1.0 + _TOL)):
                msgs.append(f"truncated mass at level {s} exceeds 4^-{s}/K_{s}")
        if s >= 1:
            par = build.parent_index[s]
            if np.any(build.node_lower[s - 1][par] > build.node_lower[s] + _TOL) or \
                    np.any(build.node_upper[s] > build.node_upper[s - 1][par] + _TOL):
                msgs.append(f"generation {s} is not nested in its parents")
    # members sit inside their end brackets
    S = build.S
    idx = {j: i for i, j in enumerate(build.node_ids[S])}
    rows = np.array([idx[int(j)] for j in build.end_node])
    if np.any(build.node_lower[S][rows] > cls.values + _TOL) or np.any(cls.values > build.node_upper[S][rows] + _TOL):
        msgs.append("a member is not inside its end bracket")
    return msgs


def _prod_bound(build, s):
    return math.prod(lev.count for lev in build.levels[: s + 1])
