"""Stability measures on finite output distributions, and good / excellent sets.

Information quantities are in nats unless ``units="bits"`` is passed (or the
module default ``UNITS`` is changed).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import ConceptClass, FiniteDistribution
from .errors import InvalidArgument, ParseError, ResourceLimit

UNITS = "nats"
ENUMERATION_BUDGET = 200_000
_TOL = 1e-12


def _unit(units):
    """Divisor turning nats into the requested unit."""
    units = units or UNITS
    if units == "nats":
        return 1.0
    if units == "bits":
        return math.log(2)
    raise InvalidArgument(f"unknown units {units!r}")


class FiniteOutputDistribution:
    """Probabilities over an explicit, ordered outcome space (zero-probability outcomes allowed)."""

    __slots__ = ("space", "probs", "_index")

    def __init__(self, probs: dict, space=None):
        if space is None:
            space = sorted(probs)
        space = tuple(space)
        index = {o: i for i, o in enumerate(space)}
        if len(index) != len(space):
            raise InvalidArgument("outcome space has duplicates")
        p = np.zeros(len(space))
        for o, w in probs.items():
            if o not in index:
                raise InvalidArgument(f"outcome {o!r} is not in the outcome space")
            p[index[o]] += w
        if (p < 0).any() or not math.isfinite(p.sum()) or abs(p.sum() - 1) > _TOL:
            raise InvalidArgument(f"probabilities must be nonnegative and sum to 1 (sum {p.sum()!r})")
        self.space, self.probs, self._index = space, p, index

    @classmethod
    def dirac(cls, outcome, space=None):
        return cls({outcome: 1.0}, space)

    @classmethod
    def uniform(cls, outcomes, space=None):
        outcomes = list(outcomes)
        return cls({o: 1 / len(outcomes) for o in outcomes}, space)

    def prob(self, outcome) -> float:
        i = self._index.get(outcome)
        return 0.0 if i is None else float(self.probs[i])

    def support(self):
        return [o for o, w in zip(self.space, self.probs) if w > 0]

    def items(self):
        return zip(self.space, self.probs.tolist())

    def on(self, space):
        """The same distribution over a larger outcome space."""
        return FiniteOutputDistribution(dict(self.items()), space)

    def __repr__(self):
        return f"FiniteOutputDistribution({dict(self.items())!r})"


def _same_space(p, q):
    if p.space != q.space:
        raise InvalidArgument("distributions live on different outcome spaces")


def hockey_stick(p: FiniteOutputDistribution, q: FiniteOutputDistribution, eps: float,
                 symmetric: bool = False) -> float:
    """Least delta with p(E) <= e^eps q(E) + delta for every event E."""
    _same_space(p, q)
    if eps < 0:
        raise InvalidArgument("eps must be nonnegative")
    d = float(np.maximum(p.probs - math.exp(eps) * q.probs, 0).sum())
    if symmetric:
        d = max(d, float(np.maximum(q.probs - math.exp(eps) * p.probs, 0).sum()))
    return d


def indistinguishable(p, q, eps, delta) -> bool:
    return hockey_stick(p, q, eps, symmetric=True) <= delta


def kl(p: FiniteOutputDistribution, q: FiniteOutputDistribution, units=None) -> float:
    """sum p log(p/q) with 0 log 0 = 0; +inf when p puts mass where q does not."""
    unit = _unit(units)
    terms = []
    for o, w in p.items():
        if w == 0:
            continue
        v = q.prob(o)
        if v == 0:
            return math.inf
        terms.append(w * math.log(w / v))
    return max(math.fsum(terms), 0.0) / unit


# -- joints and mutual information ----------------------------------------------------


@dataclass(frozen=True)
class JointRow:
    sample: tuple
    prob: float
    posterior: FiniteOutputDistribution


class JointTable:
    """The joint law of (S, A(S)): sample probabilities and the posterior for each sample."""

    def __init__(self, rows):
        rows = list(rows)
        if len({r.sample for r in rows}) != len(rows):
            raise InvalidArgument("joint table lists a sample twice")
        total = math.fsum(r.prob for r in rows)
        if abs(total - 1) > _TOL or any(r.prob < 0 for r in rows):
            raise InvalidArgument(f"sample probabilities must be nonnegative and sum to 1 (sum {total!r})")
        space = sorted({o for r in rows for o in r.posterior.space})
        self.space = tuple(space)
        self.rows = [JointRow(r.sample, r.prob, r.posterior.on(space) if r.posterior.space != self.space
                              else r.posterior) for r in rows]

    def __len__(self):
        return len(self.rows)

    def matrix(self):
        """P(S = s, A = h) as a samples x outcomes array."""
        return np.array([r.prob * r.posterior.probs for r in self.rows])


def mean_posterior(joint: JointTable) -> FiniteOutputDistribution:
    w = np.array([r.prob for r in joint.rows])
    post = np.array([r.posterior.probs for r in joint.rows])
    m = w @ post
    return FiniteOutputDistribution(dict(zip(joint.space, (m / m.sum()).tolist())), joint.space)


def _entropy(p):
    p = p[p > 0]
    return -math.fsum((p * np.log(p)).tolist())


def mutual_information(joint: JointTable, units=None) -> float:
    """I(S; A(S)) = H(S) + H(A) - H(S, A), summed directly over the joint table."""
    P = joint.matrix()
    i = _entropy(P.sum(axis=1)) + _entropy(P.sum(axis=0)) - _entropy(P.ravel())
    return max(i, 0.0) / _unit(units)


def pac_bayes_gap(joint: JointTable, prior: FiniteOutputDistribution, units=None) -> float:
    """E_S kl(A(S) || prior)."""
    total = 0.0
    for r in joint.rows:
        if r.prob == 0:
            continue
        v = kl(r.posterior, prior, units)
        if math.isinf(v):
            return math.inf
        total += r.prob * v
    return total


class EnumerableCoins:
    """A randomized learner given by its finitely many coin outcomes: ``[(prob, factory), ...]``."""

    def __init__(self, branches):
        self.branches = [(float(p), f) for p, f in branches]
        if abs(math.fsum(p for p, _ in self.branches) - 1) > _TOL or any(p < 0 for p, _ in self.branches):
            raise InvalidArgument("coin probabilities must be nonnegative and sum to 1")


def _posterior(learner, cls, sample):
    branches = learner.branches if isinstance(learner, EnumerableCoins) else [(1.0, learner)]
    out = {}
    for p, factory in branches:
        a = factory()
        a.reset(cls)
        for x, y in sample:
            a.observe(x, y)
        h = a.current_hypothesis()
        out[h] = out.get(h, 0.0) + p
    return FiniteOutputDistribution(out)


def sample_joint(learner, cls: ConceptClass, dist: FiniteDistribution, n: int,
                 budget: int = ENUMERATION_BUDGET) -> JointTable:
    """Enumerate every ordered n-sample from ``dist`` with its probability and posterior."""
    atoms = dist.atoms
    if len(atoms) ** n > budget:
        raise ResourceLimit(f"{len(atoms)}^{n} samples exceed the enumeration budget {budget}")
    rows = []
    for idx in itertools.product(range(len(atoms)), repeat=n):
        sample = tuple((atoms[i][0], atoms[i][1]) for i in idx)
        prob = math.prod(atoms[i][2] for i in idx)
        rows.append(JointRow(sample, prob, _posterior(learner, cls, sample)))
    return JointTable(rows)


def learner_mutual_information(learner, cls, dist, n, units=None, budget=ENUMERATION_BUDGET):
    """Exact I(S; A(S)) for n i.i.d. examples; returns ``(value, joint)``."""
    joint = sample_joint(learner, cls, dist, n, budget)
    return mutual_information(joint, units), joint


# -- good sets ------------------------------------------------------------------------


def _cutoff(eps, size):
    """Smallest integer c with (k < eps * size) <=> (k < c), computed exactly."""
    if eps <= 0:
        raise InvalidArgument("eps must be positive")
    return math.ceil(Fraction(eps) * size)


def _minorities(matrix, points):
    sub = matrix[:, points]
    ones = sub.sum(axis=1, dtype=np.int64)
    return np.minimum(ones, len(points) - ones)


def _points(A, m):
    pts = sorted(set(int(a) for a in A))
    if not pts:
        raise InvalidArgument("point set must be nonempty")
    if pts[0] < 0 or pts[-1] >= m:
        raise InvalidArgument("point set leaves the domain")
    return pts


def epsilon_good_check(A, cls: ConceptClass, eps: float):
    """``(True, None)`` if every hypothesis has a minority side of size < eps|A| on A,
    else ``(False, h)`` for the first hypothesis that splits A too evenly."""
    pts = _points(A, cls.m)
    if len(cls) == 0:
        return True, None
    bad = np.flatnonzero(_minorities(cls.matrix, pts) >= _cutoff(eps, len(pts)))
    if bad.size:
        return False, cls.hypotheses[int(bad[0])]
    return True, None


@dataclass
class GoodSubset:
    points: tuple
    exact: bool
    exponent: float


def largest_good_subset(Y, cls: ConceptClass, eps: float, budget: int = 16) -> GoodSubset:
    """Largest eps-good A within Y: exhaustive by decreasing size when |Y| <= budget, greedy otherwise."""
    Y = _points(Y, cls.m)
    exact = len(Y) <= budget
    best = _largest_exact(Y, cls, eps) if exact else _largest_greedy(Y, cls, eps)
    expo = 1.0 if len(Y) == 1 else math.log(len(best)) / math.log(len(Y))
    return GoodSubset(tuple(best), exact, expo)


def _largest_exact(Y, cls, eps):
    if len(cls) == 0:
        return Y
    M = cls.matrix.astype(np.int64)[:, Y]
    for size in range(len(Y), 0, -1):
        cut = _cutoff(eps, size)
        combos = np.array(list(itertools.combinations(range(len(Y)), size)), dtype=np.int64)
        # ones[h, c] = number of points of combination c inside h
        ones = M[:, combos].sum(axis=2)
        ok = (np.minimum(ones, size - ones) < cut).all(axis=0)
        hit = np.flatnonzero(ok)
        if hit.size:
            return [Y[i] for i in combos[hit[0]]]
    raise AssertionError("a single point is always good")


def _largest_greedy(Y, cls, eps):
    """Drop one point at a time, each time the one leaving the least total excess over the cutoff."""
    if len(cls) == 0:
        return Y
    M = cls.matrix.astype(np.int64)
    cur = list(Y)
    while True:
        if epsilon_good_check(cur, cls, eps)[0]:
            return cur
        size = len(cur) - 1
        cut = _cutoff(eps, size)
        ones = M[:, cur].sum(axis=1)
        # effect of removing each point: ones drops by M[h, x]
        after = ones[:, None] - M[:, cur]
        minority = np.minimum(after, size - after)
        excess = np.maximum(minority - cut + 1, 0)
        score = np.stack([(excess > 0).sum(axis=0), excess.sum(axis=0)])
        drop = int(np.lexsort(score[::-1])[0])
        cur.pop(drop)


# -- graphs: majority opinion and excellence --------------------------------------------


class Graph:
    """Finite graph from a symmetric 0/1 adjacency matrix."""

    def __init__(self, adj):
        a = np.asarray(adj)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidArgument("adjacency must be a square matrix")
        if not np.isin(a, (0, 1)).all():
            raise InvalidArgument("adjacency entries must be 0 or 1")
        if not (a == a.T).all():
            i, j = map(int, np.argwhere(a != a.T)[0])
            raise InvalidArgument(f"adjacency is not symmetric at ({i}, {j})")
        self.adj = a.astype(np.uint8)
        self.adj.flags.writeable = False

    @property
    def n(self):
        return self.adj.shape[0]

    def to_json(self):
        return {"n": self.n, "adj": self.adj.tolist()}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or "adj" not in obj:
            raise ParseError("graph must be an object with an 'adj' matrix", field="adj")
        try:
            g = cls(obj["adj"])
        except (InvalidArgument, ValueError) as e:
            raise ParseError(str(e), field="adj") from None
        if "n" in obj and obj["n"] != g.n:
            raise ParseError(f"'n' is {obj['n']} but the matrix has {g.n} rows", field="n")
        return g


def read_graph(path) -> Graph:
    with open(path) as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, line=e.lineno) from None
    return Graph.from_json(obj)


def majority_opinion(x: int, A, eps: float, graph: Graph):
    """1 if x has fewer than eps|A| neighbours in A, 0 if fewer than eps|A| non-neighbours, else None."""
    pts = _points(A, graph.n)
    cut = _cutoff(eps, len(pts))
    k = int(graph.adj[x, pts].sum())
    if k < cut:
        return 1
    if len(pts) - k < cut:
        return 0
    return None


def graph_good_check(A, graph: Graph, eps: float):
    """A is eps-good when every vertex's neighbourhood splits A with minority < eps|A|."""
    pts = _points(A, graph.n)
    bad = np.flatnonzero(_minorities(graph.adj, pts) >= _cutoff(eps, len(pts)))
    return (False, int(bad[0])) if bad.size else (True, None)


def good_sets(graph: Graph, eps: float, max_vertices: int = 14):
    """Every nonempty eps-good vertex set (exhaustive)."""
    if graph.n > max_vertices:
        raise ResourceLimit(f"enumerating good sets of {graph.n} vertices exceeds the limit {max_vertices}")
    out = []
    for size in range(1, graph.n + 1):
        for A in itertools.combinations(range(graph.n), size):
            if graph_good_check(A, graph, eps)[0]:
                out.append(A)
    return out


@dataclass
class ExcellentReport:
    ok: bool
    witness: tuple | None = None   # a good set on which B's opinions split
    checked: int = 0


def epsilon_excellent_check(B, graph: Graph, eps: float, good=None, max_vertices: int = 14) -> ExcellentReport:
    """B is eps-excellent against ``good`` when, for every listed good A, all but at most
    eps|B| members of B share one majority opinion (an undefined opinion never agrees).
    With ``good=None`` every good set of the graph is enumerated."""
    B = _points(B, graph.n)
    if good is None:
        good = good_sets(graph, eps, max_vertices)
    else:
        good = [tuple(_points(A, graph.n)) for A in good]
        for A in good:
            ok, v = graph_good_check(A, graph, eps)
            if not ok:
                raise InvalidArgument(f"supplied set {list(A)} is not {eps}-good (vertex {v} splits it)")
    allowed = Fraction(eps) * len(B)
    for A in good:
        ops = [majority_opinion(b, A, eps, graph) for b in B]
        agree = max(ops.count(0), ops.count(1))
        if len(B) - agree > allowed:
            return ExcellentReport(False, tuple(A), len(good))
    return ExcellentReport(True, None, len(good))
