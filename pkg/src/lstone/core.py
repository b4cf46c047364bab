"""Finite concept classes, labeled sequences, distributions and their file formats.

Points are 0-based indices into a finite domain.  A hypothesis is a tuple of
0/1 ints, one per point.  Classes are kept in canonical form (hypotheses sorted
lexicographically) so that they can serve as memo keys.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InvalidArgument, ParseError, ResourceLimit

Hypothesis = tuple  # tuple[int, ...] of 0/1 values

POWERSET_MAX = 20


@dataclass(frozen=True)
class Domain:
    size: int
    labels: tuple | None = None

    def __post_init__(self):
        if not isinstance(self.size, (int, np.integer)) or self.size < 1:
            raise InvalidArgument(f"domain size must be a positive integer, got {self.size!r}")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size:
                raise InvalidArgument(f"{len(labels)} labels for a domain of size {self.size}")
            if len(set(labels)) != len(labels):
                raise InvalidArgument("domain labels must be distinct")
            object.__setattr__(self, "labels", labels)

    def label(self, point: int) -> str:
        return self.labels[point] if self.labels is not None else str(point)


def as_hypothesis(bits, size: int | None = None) -> Hypothesis:
    h = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in h):
        raise InvalidArgument(f"hypothesis entries must be 0/1: {bits!r}")
    if size is not None and len(h) != size:
        raise InvalidArgument(f"hypothesis of length {len(h)} over a domain of size {size}")
    return h


def bits_str(h: Hypothesis) -> str:
    return "".join(map(str, h))


class ConceptClass:
    """An explicitly enumerated class ``(X, H)`` over a finite domain.

    Hypotheses are stored sorted; ``ones[x]`` is the bitmask (over hypothesis
    indices) of hypotheses containing point ``x``.  Sub-classes are addressed by
    such masks throughout the package.
    """

    __slots__ = ("domain", "hypotheses", "matrix", "ones", "full_mask", "_key")

    def __init__(self, domain: Domain | int, hypotheses: Iterable = ()):
        if not isinstance(domain, Domain):
            domain = Domain(int(domain))
        m = domain.size
        hyps = [as_hypothesis(h, m) for h in hypotheses]
        if len(set(hyps)) != len(hyps):
            raise InvalidArgument("hypotheses must be distinct")
        hyps.sort()
        self.domain = domain
        self.hypotheses = tuple(hyps)
        mat = np.array(hyps, dtype=np.uint8).reshape(len(hyps), m)
        mat.setflags(write=False)
        self.matrix = mat
        ones = []
        for x in range(m):
            mask = 0
            for j in np.flatnonzero(mat[:, x]):
                mask |= 1 << int(j)
            ones.append(mask)
        self.ones = tuple(ones)
        self.full_mask = (1 << len(hyps)) - 1
        self._key = (m, mat.tobytes())

    @property
    def m(self) -> int:
        return self.domain.size

    def __len__(self):
        return len(self.hypotheses)

    def __iter__(self):
        return iter(self.hypotheses)

    def __contains__(self, h):
        return tuple(h) in set(self.hypotheses)

    def __eq__(self, other):
        return isinstance(other, ConceptClass) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        shown = ", ".join(bits_str(h) for h in self.hypotheses[:8])
        more = ", ..." if len(self) > 8 else ""
        return f"ConceptClass(m={self.m}, |H|={len(self)}: {shown}{more})"

    @property
    def key(self):
        return self._key

    def zeros(self, x: int) -> int:
        return self.full_mask ^ self.ones[x]

    def side(self, x: int, y: int) -> int:
        """Mask of hypotheses with ``h(x) == y``."""
        return self.ones[x] if y else self.full_mask ^ self.ones[x]

    def mask_of(self, examples) -> int:
        mask = self.full_mask
        for x, y in examples:
            mask &= self.side(x, y)
        return mask

    def indices(self, mask: int) -> list[int]:
        out = []
        j = 0
        while mask:
            if mask & 1:
                out.append(j)
            mask >>= 1
            j += 1
        return out

    def subclass(self, mask: int) -> "ConceptClass":
        return ConceptClass(self.domain, [self.hypotheses[j] for j in self.indices(mask)])


class LabeledExample(NamedTuple):
    point: int
    label: int


def as_sequence(items, domain_size: int | None = None) -> tuple[LabeledExample, ...]:
    seq = []
    for it in items:
        x, y = int(it[0]), int(it[1])
        if y not in (0, 1):
            raise InvalidArgument(f"label must be 0/1, got {y}")
        if x < 0 or (domain_size is not None and x >= domain_size):
            raise InvalidArgument(f"point {x} outside domain of size {domain_size}")
        seq.append(LabeledExample(x, y))
    return tuple(seq)


@dataclass(frozen=True)
class FiniteDistribution:
    """Finitely supported distribution over ``X x {0,1}``; zero-weight atoms are dropped."""

    atoms: tuple = ()
    _arrays: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        clean = []
        seen = set()
        for a in self.atoms:
            x, y, w = int(a[0]), int(a[1]), float(a[2])
            if y not in (0, 1) or x < 0:
                raise InvalidArgument(f"bad atom {a!r}")
            if w < 0 or not math.isfinite(w):
                raise InvalidArgument(f"atom weight must be nonnegative, got {w}")
            if (x, y) in seen:
                raise InvalidArgument(f"duplicate atom {(x, y)}")
            seen.add((x, y))
            if w > 0:
                clean.append((x, y, w))
        total = math.fsum(w for _, _, w in clean)
        if abs(total - 1.0) > 1e-12:
            raise InvalidArgument(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "atoms", tuple(clean))
        xs = np.array([a[0] for a in clean], dtype=np.int64)
        ys = np.array([a[1] for a in clean], dtype=np.uint8)
        ws = np.array([a[2] for a in clean], dtype=np.float64)
        object.__setattr__(self, "_arrays", (xs, ys, ws))

    @classmethod
    def uniform(cls, examples) -> "FiniteDistribution":
        distinct = list(dict.fromkeys((int(x), int(y)) for x, y in examples))
        if not distinct:
            raise InvalidArgument("uniform distribution over an empty set")
        k = len(distinct)
        return cls(tuple((x, y, 1.0 / k) for x, y in distinct[:-1]) + ((*distinct[-1], 1.0 - (k - 1) / k),))

    @classmethod
    def from_weights(cls, examples, weights) -> "FiniteDistribution":
        w = np.asarray(weights, dtype=np.float64)
        w = w / w.sum()
        w[-1] = 1.0 - math.fsum(w[:-1])
        return cls(tuple((x, y, float(p)) for (x, y), p in zip(examples, w)))

    @property
    def points(self) -> np.ndarray:
        return self._arrays[0]

    @property
    def labels(self) -> np.ndarray:
        return self._arrays[1]

    @property
    def weights(self) -> np.ndarray:
        return self._arrays[2]

    def support(self):
        return [(x, y) for x, y, _ in self.atoms]

    def draw(self, rng: np.random.Generator, size: int):
        """``size`` i.i.d. examples as ``(points, labels)`` arrays."""
        idx = rng.choice(len(self.atoms), size=size, p=self.weights)
        return self.points[idx], self.labels[idx]


# -- generators ---------------------------------------------------------------

def _check_n(n):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgument(f"size must be a positive integer, got {n!r}")


def make_thresholds(n: int) -> ConceptClass:
    """Down-sets ``{x : x <= t}`` for t = 0..n over the points 1..n."""
    _check_n(n)
    dom = Domain(n, tuple(str(i + 1) for i in range(n)))
    return ConceptClass(dom, [tuple(1 if i < t else 0 for i in range(n)) for t in range(n + 1)])


def make_singletons(n: int) -> ConceptClass:
    _check_n(n)
    dom = Domain(n, tuple(str(i + 1) for i in range(n)))
    return ConceptClass(dom, [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)])


def make_powerset(m: int) -> ConceptClass:
    _check_n(m)
    if m > POWERSET_MAX:
        raise ResourceLimit(f"powerset({m}) would hold 2^{m} hypotheses (limit m <= {POWERSET_MAX})")
    hyps = [tuple((v >> (m - 1 - i)) & 1 for i in range(m)) for v in range(1 << m)]
    return ConceptClass(m, hyps)


def make_random(m: int, k: int, seed: int = 0) -> ConceptClass:
    """``k`` distinct hypotheses drawn uniformly from ``{0,1}^m``."""
    _check_n(m)
    if m > 62:
        raise ResourceLimit("random classes need m <= 62")
    total = 1 << m
    if k < 0 or k > total:
        raise InvalidArgument(f"cannot draw {k} distinct hypotheses over {m} points")
    rng = np.random.default_rng(seed)
    codes = rng.choice(total, size=k, replace=False) if total <= 1 << 20 else _distinct_codes(rng, total, k)
    return ConceptClass(m, [tuple((int(v) >> (m - 1 - i)) & 1 for i in range(m)) for v in codes])


def _distinct_codes(rng, total, k):
    got = set()
    while len(got) < k:
        got.add(int(rng.integers(total)))
    return sorted(got)


GENERATORS = {
    "thresholds": make_thresholds,
    "singletons": make_singletons,
    "powerset": make_powerset,
    "random": make_random,
}


def class_from_spec(spec: str) -> ConceptClass:
    """Resolve ``name:params`` (e.g. ``thresholds:7``, ``random:5,12,3``) or a file path."""
    name, sep, params = spec.partition(":")
    if sep and name in GENERATORS:
        try:
            args = [int(p) for p in params.split(",") if p.strip()]
        except ValueError:
            raise InvalidArgument(f"bad generator parameters in {spec!r}") from None
        return GENERATORS[name](*args)
    if not os.path.exists(spec):
        raise InvalidArgument(f"{spec!r} is neither a generator (name:params) nor a file")
    with open(spec, "rb") as fh:
        return read_class(fh.read())


# -- operations ---------------------------------------------------------------

def restrict(cls: ConceptClass, point: int, label: int) -> ConceptClass:
    if not 0 <= point < cls.m:
        raise InvalidArgument(f"point {point} outside domain of size {cls.m}")
    return cls.subclass(cls.side(point, label))


def loss(h, dist: FiniteDistribution) -> float:
    h = np.asarray(h, dtype=np.uint8)
    if dist.atoms and int(dist.points.max()) >= h.shape[0]:
        raise InvalidArgument("distribution has atoms outside the hypothesis' domain")
    wrong = h[dist.points] != dist.labels
    return float(math.fsum(dist.weights[wrong]))


def is_realizable_seq(cls: ConceptClass, seq) -> bool:
    return cls.mask_of(as_sequence(seq, cls.m)) != 0


def is_realizable_dist(cls: ConceptClass, dist: FiniteDistribution) -> bool:
    if len(cls) == 0:
        return False
    if dist.atoms and int(dist.points.max()) >= cls.m:
        raise InvalidArgument("distribution has atoms outside the class domain")
    return cls.mask_of(dist.support()) != 0


# -- file formats --------------------------------------------------------------

def _load_json(data, what):
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"{what}: not UTF-8 ({e})") from None
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"{what}: {e.msg} (column {e.colno})", line=e.lineno) from None
    if not isinstance(obj, dict):
        raise ParseError(f"{what}: top level must be an object")
    return obj


def _bit(v, field_name):
    if v is True or v is False or v not in (0, 1):
        raise ParseError(f"entries must be 0 or 1, got {v!r}", field=field_name)
    return int(v)


def read_class(data) -> ConceptClass:
    obj = _load_json(data, "set-system")
    if "domain" not in obj:
        raise ParseError("missing key", field="domain")
    if "hypotheses" not in obj:
        raise ParseError("missing key", field="hypotheses")
    dom = obj["domain"]
    if isinstance(dom, int) and not isinstance(dom, bool):
        domain = Domain(dom)
    elif isinstance(dom, list) and dom:
        if len(set(map(str, dom))) != len(dom):
            raise ParseError("domain labels must be distinct", field="domain")
        domain = Domain(len(dom), tuple(map(str, dom)))
    else:
        raise ParseError("must be a nonempty list of labels", field="domain")
    rows = obj["hypotheses"]
    if not isinstance(rows, list):
        raise ParseError("must be a list of rows", field="hypotheses")
    seen = {}
    hyps = []
    for i, row in enumerate(rows):
        fname = f"hypotheses[{i}]"
        if not isinstance(row, list):
            raise ParseError("row must be a list", field=fname)
        if len(row) != domain.size:
            raise ParseError(f"row length {len(row)} != domain size {domain.size}", field=fname)
        h = tuple(_bit(v, fname) for v in row)
        if h in seen:
            raise ParseError(f"duplicate of hypotheses[{seen[h]}]", field=fname)
        seen[h] = i
        hyps.append(h)
    return ConceptClass(domain, hyps)


def write_class(cls: ConceptClass) -> bytes:
    labels = cls.domain.labels or tuple(str(i) for i in range(cls.m))
    lines = ["{", f'  "domain": {json.dumps(list(labels))},', '  "hypotheses": [']
    rows = [f"    {json.dumps(list(h))}" for h in cls.hypotheses]
    if rows:
        lines.append(",\n".join(rows))
    lines +=["  ]", "}", ""]
    return "\n".join(lines).encode("utf-8")


def read_sequence(data, domain_size: int | None = None):
    obj = _load_json(data, "sequence")
    items = obj.get("items")
    if not isinstance(items, list):
        raise ParseError("must be a list of [point, label]", field="items")
    for i, it in enumerate(items):
        if not (isinstance(it, list) and len(it) == 2):
            raise ParseError("expected [point, label]", field=f"items[{i}]")
        _bit(it[1], f"items[{i}][1]")
        if not isinstance(it[0], int) or it[0] < 0 or (domain_size is not None and it[0] >= domain_size):
            raise ParseError(f"point {it[0]!r} outside domain", field=f"items[{i}][0]")
    return as_sequence(items, domain_size)


def write_sequence(seq) -> bytes:
    return (json.dumps({"items": [[int(x), int(y)] for x, y in seq]}) + "\n").encode("utf-8")


def read_distribution(data) -> FiniteDistribution:
    obj = _load_json(data, "distribution")
    atoms = obj.get("atoms")
    if not isinstance(atoms, list):
        raise ParseError("must be a list of [point, label, weight]", field="atoms")
    for i, a in enumerate(atoms):
        if not (isinstance(a, list) and len(a) == 3):
            raise ParseError("expected [point, label, weight]", field=f"atoms[{i}]")
    try:
        return FiniteDistribution(tuple(tuple(a) for a in atoms))
    except InvalidArgument as e:
        raise ParseError(str(e), field="atoms") from None


def write_distribution(dist: FiniteDistribution) -> bytes:
    return (json.dumps({"atoms": [[x, y, w] for x, y, w in dist.atoms]}) + "\n").encode("utf-8")


def hypotheses_matrix(hyps: Sequence[Hypothesis], m: int) -> np.ndarray:
    return np.array(list(hyps), dtype=np.uint8).reshape(len(hyps), m)
