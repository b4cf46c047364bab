"""Combinatorial dimensions of finite classes and their certificates.

Conventions for the empty class: ``vc_dim = ldim = -1``, ``threshold_dim = 0``.
"""
from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .core import ConceptClass, Domain, Hypothesis
from .errors import InvalidArgument

_TABLES: dict = {}
_TABLES_LOCK = threading.Lock()
_TABLES_MAX = 4096


def ldim_table(cls: ConceptClass):
    """Process-wide memo of ``ldim`` over the sub-classes of ``cls``."""
    key = cls.key
    with _TABLES_LOCK:
        table = _TABLES.get(key)
        if table is None:
            if len(_TABLES) >= _TABLES_MAX:
                _TABLES.clear()
            table = _kernels.LdimTable(cls.ones, len(cls))
            _TABLES[key] = table
    return table


def clear_memo():
    with _TABLES_LOCK:
        _TABLES.clear()


# -- VC dimension ----------------------------------------------------------------

@dataclass(frozen=True)
class ShatteredSetCert:
    points: tuple
    witnesses: tuple  # witness hypothesis per pattern, patterns in binary order


def pattern_count(cls: ConceptClass, points) -> int:
    """Number of distinct restrictions of the hypotheses to ``points``."""
    pts = [int(p) for p in points]
    if len(set(pts)) != len(pts):
        raise InvalidArgument("points must be distinct")
    if any(not 0 <= p < cls.m for p in pts):
        raise InvalidArgument("point outside the domain")
    return _kernels.pattern_count(cls.matrix[:, pts])


def _shattered(cls, pts):
    return _kernels.pattern_count(cls.matrix[:, list(pts)]) == 1 << len(pts)


def shattered_set_certificate(cls: ConceptClass) -> ShatteredSetCert | None:
    """A largest shattered set with one witness per pattern (None for the empty class)."""
    if len(cls) == 0:
        return None
    best = ()
    for size in range(1, min(cls.m, len(cls).bit_length() - 1) + 1):
        found = next((c for c in itertools.combinations(range(cls.m), size) if _shattered(cls, c)), None)
        if found is None:
            break  # shattering is hereditary, so no larger set is shattered either
        best = found
    witnesses = []
    sub = cls.matrix[:, list(best)]
    for code in range(1 << len(best)):
        pattern = [(code >> (len(best) - 1 - i)) & 1 for i in range(len(best))]
        j = int(np.flatnonzero((sub == pattern).all(axis=1))[0])
        witnesses.append(cls.hypotheses[j])
    return ShatteredSetCert(tuple(best), tuple(witnesses))


def vc_dim(cls: ConceptClass) -> int:
    cert = shattered_set_certificate(cls)
    return -1 if cert is None else len(cert.points)


def verify_shattered(cert: ShatteredSetCert, cls: ConceptClass):
    pts = list(cert.points)
    if len(set(pts)) != len(pts):
        return False, "points are not distinct"
    if len(cert.witnesses) != 1 << len(pts):
        return False, f"expected {1 << len(pts)} witnesses, got {len(cert.witnesses)}"
    members = set(cls.hypotheses)
    patterns = set()
    for w in cert.witnesses:
        if tuple(w) not in members:
            return False, f"witness {w} is not in the class"
        patterns.add(tuple(w[p] for p in pts))
    if len(patterns) != 1 << len(pts):
        return False, "witnesses do not realize every pattern"
    return True, "ok"


# -- Littlestone dimension -------------------------------------------------------

def ldim(cls: ConceptClass, mask: int | None = None) -> int:
    """Littlestone dimension of ``cls`` (or of its sub-class ``mask``)."""
    if len(cls) == 0:
        return -1
    return ldim_table(cls).ldim(cls.full_mask if mask is None else mask)


@dataclass(frozen=True)
class TreeLeaf:
    hypothesis: Hypothesis

    depth = 0


@dataclass(frozen=True)
class TreeNode:
    point: int
    left: "TreeLeaf | TreeNode"   # branch labeled 0
    right: "TreeLeaf | TreeNode"  # branch labeled 1

    @property
    def depth(self):
        return 1 + self.left.depth


MistakeTreeCert = TreeLeaf | TreeNode


def _build_tree(cls, table, mask, depth):
    if depth == 0:
        return TreeLeaf(cls.hypotheses[cls.indices(mask)[0]])
    for x in range(cls.m):
        a = mask & cls.ones[x]
        b = mask ^ a
        if a and b and table.ldim(a) >= depth - 1 and table.ldim(b) >= depth - 1:
            return TreeNode(x, _build_tree(cls, table, b, depth - 1), _build_tree(cls, table, a, depth - 1))
    raise AssertionError("ldim memo inconsistent with tree construction")


def ldim_certificate(cls: ConceptClass, depth: int | None = None) -> MistakeTreeCert:
    """A shattered mistake tree of depth ``ldim(cls)`` (or of the given smaller depth)."""
    if len(cls) == 0:
        raise InvalidArgument("the empty class has no mistake tree")
    d = ldim(cls)
    if depth is None:
        depth = d
    elif not 0 <= depth <= d:
        raise InvalidArgument(f"no shattered tree of depth {depth}: ldim is {d}")
    return _build_tree(cls, ldim_table(cls), cls.full_mask, depth)


def tree_branches(tree):
    """Yield ``(path, leaf)`` where path is the list of (point, direction) pairs."""
    stack = [(tree, ())]
    while stack:
        node, path = stack.pop()
        if isinstance(node, TreeLeaf):
            yield list(path), node.hypothesis
        else:
            stack.append((node.right, path + ((node.point, 1),)))
            stack.append((node.left, path + ((node.point, 0),)))


def _tree_points(tree):
    if isinstance(tree, TreeLeaf):
        return []
    return [tree.point] + _tree_points(tree.left) + _tree_points(tree.right)


def verify_tree(tree, cls: ConceptClass, strict_distinct: bool = False):
    """Check that ``tree`` is a complete binary tree shattered by ``cls``.

    Returns ``(ok, message)``; on failure the message names the violated branch.
    ``strict_distinct`` additionally requires all node points to be distinct
    across the whole tree.
    """
    depths = set()
    members = set(cls.hypotheses)
    leaves = []
    for path, h in tree_branches(tree):
        depths.add(len(path))
        branch = "".join(str(y) for _, y in path) or "<root>"
        h = tuple(h)
        if len(h) != cls.m:
            return False, f"branch {branch}: leaf has length {len(h)}, domain size {cls.m}"
        if h not in members:
            return False, f"branch {branch}: leaf hypothesis {''.join(map(str, h))} is not in the class"
        for x, y in path:
            if not 0 <= x < cls.m:
                return False, f"branch {branch}: node point {x} outside the domain"
            if h[x] != y:
                return False, f"branch {branch}: leaf gives point {x} label {h[x]}, branch requires {y}"
        leaves.append(h)
    if len(depths) != 1:
        return False, f"tree is not complete: leaf depths {sorted(depths)}"
    if len(set(leaves)) != len(leaves):
        return False, "leaf hypotheses are not pairwise distinct"
    if strict_distinct:
        pts = _tree_points(tree)
        if len(set(pts)) != len(pts):
            return False, "node points repeat across the tree"
    return True, "ok"


def tree_to_json(tree):
    if isinstance(tree, TreeLeaf):
        return {"hypothesis": list(tree.hypothesis)}
    return {"point": tree.point, "left": tree_to_json(tree.left), "right": tree_to_json(tree.right)}


def tree_from_json(obj):
    if not isinstance(obj, dict):
        raise InvalidArgument("tree node must be an object")
    if "hypothesis" in obj:
        return TreeLeaf(tuple(int(b) for b in obj["hypothesis"]))
    try:
        return TreeNode(int(obj["point"]), tree_from_json(obj["left"]), tree_from_json(obj["right"]))
    except KeyError as e:
        raise InvalidArgument(f"tree node missing {e.args[0]!r}") from None


def ldim_by_tree_search(cls: ConceptClass):
    """Ldim from direct search for shattered trees, with the deepest tree found.

    Independent of the memoized max-min recursion: trees are built from their
    definition over sets of hypothesis tuples and checked by ``verify_tree``.
    A depth-d tree needs 2^d distinct leaves, which bounds the search.
    """
    hyps = frozenset(cls.hypotheses)
    if not hyps:
        return -1, None
    best = _find_tree(hyps, cls.m, 0)
    d = 0
    while 1 << (d + 1) <= len(hyps):
        tree = _find_tree(hyps, cls.m, d + 1)
        if tree is None:
            break
        best, d = tree, d + 1
    ok, msg = verify_tree(best, cls)
    assert ok, msg
    return d, best


@lru_cache(maxsize=200_000)
def _find_tree(hyps, m, depth):
    if depth == 0:
        return TreeLeaf(min(hyps))
    if len(hyps) < 1 << depth:
        return None
    for x in range(m):
        zero = frozenset(h for h in hyps if h[x] == 0)
        one = hyps - zero
        if len(zero) < 1 << (depth - 1) or len(one) < 1 << (depth - 1):
            continue
        left = _find_tree(zero, m, depth - 1)
        if left is None:
            continue
        right = _find_tree(one, m, depth - 1)
        if right is not None:
            return TreeNode(x, left, right)
    return None


def ldim_strict(cls: ConceptClass, max_depth: int | None = None) -> int:
    """Depth of the deepest shattered tree whose node points are all distinct.

    Exponential; meant for small classes only.
    """
    if len(cls) == 0:
        return -1
    limit = ldim(cls) if max_depth is None else min(max_depth, ldim(cls))
    d = 0
    while d < limit and next(_strict_trees(cls, cls.full_mask, d + 1, frozenset()), None) is not None:
        d += 1
    return d


def _strict_trees(cls, mask, depth, used):
    """Yield the point sets of strict shattered trees of this depth avoiding ``used``."""
    if depth == 0:
        yield frozenset()
        return
    seen = set()
    for x in range(cls.m):
        if x in used:
            continue
        a = mask & cls.ones[x]
        b = mask ^ a
        if not a or not b:
            continue
        for left in _strict_trees(cls, b, depth - 1, used | {x}):
            for right in _strict_trees(cls, a, depth - 1, used | {x} | left):
                pts = frozenset({x}) | left | right
                if pts not in seen:
                    seen.add(pts)
                    yield pts


# -- threshold dimension ---------------------------------------------------------

@dataclass(frozen=True)
class HalfGraphCert:
    points: tuple       # x_1..x_k
    hypotheses: tuple   # h_1..h_k with x_i in h_j iff i < j


@dataclass(frozen=True)
class ThresholdResult:
    k: int
    certificate: HalfGraphCert
    exact: bool         # False: budget hit, k is only a lower bound
    nodes: int

    def __int__(self):
        return self.k


def threshold_dim(cls: ConceptClass, max_k: int = 12, node_budget: int = 2_000_000) -> ThresholdResult:
    """Largest half-graph by depth-first search over point orderings.

    Adding point x to an ordering x_1..x_k keeps, for each j, the hypotheses
    whose trace on the ordering is ones on x_1..x_{j-1} and zeros elsewhere;
    an ordering is dead as soon as one of those sets empties, and sets only
    shrink, so dead prefixes are pruned.
    """
    k_cap = min(cls.m, len(cls), max_k)
    state = {"best": (), "best_sets": [], "nodes": 0, "cut": False}

    def dfs(order, sets, top):
        state["nodes"] += 1
        if len(order) > len(state["best"]):
            state["best"], state["best_sets"] = tuple(order), list(sets)
        if len(state["best"]) >= k_cap:
            return True
        if state["nodes"] >= node_budget:
            state["cut"] = True
            return True
        remaining = [x for x in range(cls.m) if x not in order]
        if len(order) + len(remaining) <= len(state["best"]):
            return False
        for x in remaining:
            zeros = cls.zeros(x)
            new_top = top & zeros
            if not new_top:
                continue
            new_sets = [s & zeros for s in sets]
            if not all(new_sets):
                continue
            new_sets.append(new_top)
            if dfs(order + [x], new_sets, top & cls.ones[x]):
                return True
        return False

    if len(cls):
        dfs([], [], cls.full_mask)
    order = state["best"]
    hyps = tuple(cls.hypotheses[cls.indices(s)[0]] for s in state["best_sets"])
    true_cap = min(cls.m, len(cls))
    exact = not state["cut"] and not (len(order) == max_k and max_k < true_cap)
    return ThresholdResult(len(order), HalfGraphCert(order, hyps), exact, state["nodes"])


def verify_half_graph(cert: HalfGraphCert, cls: ConceptClass):
    pts, hyps = list(cert.points), [tuple(h) for h in cert.hypotheses]
    if len(pts) != len(hyps):
        return False, "points and hypotheses differ in number"
    if len(set(pts)) != len(pts) or len(set(hyps)) != len(hyps):
        return False, "points or hypotheses are not distinct"
    members = set(cls.hypotheses)
    for j, h in enumerate(hyps):
        if h not in members:
            return False, f"h_{j + 1} is not in the class"
        for i, x in enumerate(pts):
            if not 0 <= x < cls.m:
                return False, f"x_{i + 1} outside the domain"
            if h[x] != (1 if i < j else 0):
                return False, f"x_{i + 1} in h_{j + 1} is {bool(h[x])}, expected {i < j}"
    return True, "ok"


def half_graph_to_json(cert: HalfGraphCert):
    return {"points": list(cert.points), "hypotheses": [list(h) for h in cert.hypotheses]}


def half_graph_from_json(obj) -> HalfGraphCert:
    return HalfGraphCert(tuple(int(p) for p in obj["points"]),
                         tuple(tuple(int(b) for b in h) for h in obj["hypotheses"]))


# -- counting --------------------------------------------------------------------

def binom_leq(n: int, d: int) -> int:
    """sum_{i <= d} C(n, i)."""
    return sum(math.comb(n, i) for i in range(0, max(d, -1) + 1))


@dataclass(frozen=True)
class SspRow:
    n: int
    bound: int
    max_patterns: int
    subsets: int
    exhaustive: bool

    @property
    def ok(self):
        return self.max_patterns <= self.bound


@dataclass(frozen=True)
class SspReport:
    d: int
    rows: tuple

    @property
    def ok(self):
        return all(r.ok for r in self.rows)

    @property
    def max_ratio(self):
        return max((r.max_patterns / r.bound for r in self.rows if r.bound), default=0.0)


def ssp_check(cls: ConceptClass, sample_sizes, max_subsets: int = 5000, seed: int = 0) -> SspReport:
    """Compare pattern counts on n-subsets with the bound C(n, <= vc_dim)."""
    d = vc_dim(cls)
    rng = np.random.default_rng(seed)
    rows = []
    for n in sample_sizes:
        if not 0 <= n <= cls.m:
            raise InvalidArgument(f"sample size {n} outside 0..{cls.m}")
        total = math.comb(cls.m, n)
        if total <= max_subsets:
            subsets = itertools.combinations(range(cls.m), n)
            exhaustive, count = True, total
        else:
            subsets = (sorted(rng.choice(cls.m, size=n, replace=False)) for _ in range(max_subsets))
            exhaustive, count = False, max_subsets
        worst = max(pattern_count(cls, s) for s in subsets)
        rows.append(SspRow(n, binom_leq(n, d), worst, count, exhaustive))
    return SspReport(d, tuple(rows))


def dualize(cls: ConceptClass):
    """The dual class (H, X): returns ``(dual, merged)`` where merged counts collapsed duplicate rows."""
    if len(cls) == 0:
        raise InvalidArgument("cannot dualize the empty class")
    labels = tuple("".join(map(str, h)) for h in cls.hypotheses)
    cols = {tuple(int(v) for v in cls.matrix[:, x]) for x in range(cls.m)}
    dual = ConceptClass(Domain(len(cls), labels), cols)
    return dual, cls.m - len(cols)


def tree_threshold_report(cls: ConceptClass) -> dict:
    """Both directions of the half-graph/tree relation, measured."""
    d = ldim(cls)
    thr = threshold_dim(cls)
    return {
        "ldim": d,
        "threshold": thr.k,
        "threshold_exact": thr.exact,
        # a k-half-graph holds only k hypotheses, hence depth floor(log2 k), not floor(log2 (k+1))
        "tree_lower_bound": int(math.log2(thr.k)) if thr.k else 0,
        "half_graph_log_ldim": math.log2(d) if d > 0 else None,
    }
