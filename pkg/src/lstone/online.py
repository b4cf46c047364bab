"""The online game and the online expert cover (binom(n, <=d) label-oblivious predictors).

Step indices inside a cover are 0-based: expert ``I`` flips the SOA's
prediction at steps ``i in I`` and feeds its own output back as the label.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import ConceptClass, as_sequence, is_realizable_seq
from .dims import binom_leq, ldim, ldim_table
from .errors import InvalidArgument, ResourceLimit

MAX_EXPERTS = 100_000
ENUMERATION_BUDGET = 2_000_000


@dataclass
class OnlineResult:
    mistakes: int
    realizable: bool
    trace: list  # StepRecords


def run_online(learner, seq, cls: ConceptClass | None = None, allow_unrealizable: bool = False) -> OnlineResult:
    """Predict-then-reveal over ``seq``; the learner is reset on ``cls`` when given.

    Unrealizable input is refused unless ``allow_unrealizable``; then
    version-space learners switch to tolerant mode and mistakes are still counted.
    """
    cls = cls if cls is not None else learner.cls
    seq = as_sequence(seq, cls.m if cls is not None else None)
    realizable = cls is None or is_realizable_seq(cls, seq)
    if not realizable and not allow_unrealizable:
        raise InvalidArgument("sequence is not realizable by the class")
    if not realizable and hasattr(learner, "tolerant"):
        learner.tolerant = True
    if cls is not None:
        learner.reset(cls)
    trace = [learner.observe(x, y) for x, y in seq]
    return OnlineResult(sum(r.mistake for r in trace), realizable, trace)


class _SoaStates:
    """SOA hypotheses per version-space mask, memoized for one class."""

    def __init__(self, cls):
        self.cls = cls
        self.table = ldim_table(cls)
        self.cache = {}

    def labels(self, mask):
        h = self.cache.get(mask)
        if h is None:
            h = tuple(int(b) for b in self.table.soa_labels(mask))
            self.cache[mask] = h
        return h

    def step(self, state, x, flip):
        """Expert transition: returns ``(output, new_state)`` for state ``(mask, hypothesis)``."""
        mask, h = state
        p = h[x]
        out = 1 - p if flip else p
        new = mask & self.cls.side(x, out)
        if new:
            mask = new
        if flip:
            h = self.labels(mask)
        return out, (mask, h)


@dataclass
class ExpertCover:
    """``sum_{i<=d} C(n, i)`` label-oblivious online predictors, one per flip set."""

    cls: ConceptClass
    n: int
    d: int
    subsets: tuple

    def __post_init__(self):
        self._soa = _SoaStates(self.cls) if len(self.cls) else None

    def __len__(self):
        return len(self.subsets)

    def initial_state(self):
        full = self.cls.full_mask
        return (full, self._soa.labels(full))

    def outputs(self, j: int, points) -> tuple:
        """Labels expert ``j`` emits on the point sequence (it never sees true labels)."""
        flips = self.subsets[j]
        state = self.initial_state()
        out = []
        for i, x in enumerate(points):
            y, state = self._soa.step(state, int(x), i in flips)
            out.append(y)
        return tuple(out)

    def expert(self, j: int) -> "Expert":
        return Expert(self, self.subsets[j])

    def to_json(self):
        return {"n": self.n, "d": self.d, "subsets": [sorted(s) for s in self.subsets]}

    @classmethod
    def from_json(cls_, obj, cls: ConceptClass):
        subsets = tuple(frozenset(int(i) for i in s) for s in obj["subsets"])
        return cls_(cls, int(obj["n"]), int(obj["d"]), subsets)


class Expert:
    """One cover member as an online predictor: ``predict(x)`` then ``observe(x, y)``.

    The true label passed to ``observe`` only feeds the mistake count; the
    internal state advances on the expert's own output.
    """

    def __init__(self, cover: ExpertCover, flips):
        self._soa = cover._soa
        self.flips = frozenset(flips)
        self.state = cover.initial_state()
        self.step = 0
        self.mistakes = 0

    def predict(self, x: int) -> int:
        return self._soa.step(self.state, int(x), self.step in self.flips)[0]

    def observe(self, x: int, y: int) -> int:
        out, self.state = self._soa.step(self.state, int(x), self.step in self.flips)
        self.step += 1
        self.mistakes += out != int(y)
        return out


def build_cover(cls: ConceptClass, n: int, max_experts: int = MAX_EXPERTS) -> ExpertCover:
    if len(cls) == 0:
        raise InvalidArgument("the empty class has no realizable sequences to cover")
    if n < 0:
        raise InvalidArgument("horizon must be nonnegative")
    d = ldim(cls)
    size = binom_leq(n, d)
    if size > max_experts:
        raise ResourceLimit(f"cover needs {size} experts (limit {max_experts})")
    subsets = tuple(frozenset(c) for k in range(min(d, n) + 1) for c in itertools.combinations(range(n), k))
    return ExpertCover(cls, n, d, subsets)


@dataclass
class CoverReport:
    ok: bool
    exhaustive: bool
    sequences: int
    counterexample: tuple | None = None

    def to_json(self):
        return {"ok": self.ok, "exhaustive": self.exhaustive, "sequences": self.sequences,
                "counterexample": None if self.counterexample is None else [list(z) for z in self.counterexample]}


def verify_cover(cls: ConceptClass, n: int, cover: ExpertCover, budget: int = ENUMERATION_BUDGET,
                 samples: int = 20_000, seed: int = 0) -> CoverReport:
    """Check that every realizable length-n sequence is predicted exactly by some expert.

    Depth-first over point prefixes.  At each prefix the hypotheses are grouped
    by their labeling of the prefix, and each group carries the bitmask of
    experts whose outputs equal that labeling so far; a nonempty group whose
    expert set is empty is a realizable sequence nobody predicts.  Above the
    enumeration budget, random realizable sequences are checked instead.
    """
    if cover.n != n:
        raise InvalidArgument(f"cover built for horizon {cover.n}, asked to verify {n}")
    if len(cls) == 0:
        return CoverReport(True, True, 0)
    if cls.m ** n > budget:
        return _verify_sampled(cls, n, cover, samples, seed)
    soa = cover._soa
    nexp = len(cover)
    start = [cover.initial_state()] * nexp
    all_experts = (1 << nexp) - 1
    leaves = 0
    stack = [((), start, [(cls.full_mask, all_experts)])]
    while stack:
        points, states, groups = stack.pop()
        i = len(points)
        if i == n:
            leaves += len(groups)
            continue
        for x in range(cls.m):
            ones_e = 0
            new_states = []
            for e in range(nexp):
                y, st = soa.step(states[e], x, i in cover.subsets[e])
                new_states.append(st)
                if y:
                    ones_e |= 1 << e
            new_groups = []
            for g, experts in groups:
                g1 = g & cls.ones[x]
                for gy, ey in ((g ^ g1, experts & ~ones_e), (g1, experts & ones_e)):
                    if not gy:
                        continue
                    if not ey:
                        return CoverReport(False, True, leaves, _witness(cls, points + (x,), gy))
                    new_groups.append((gy, ey))
            stack.append((points + (x,), new_states, new_groups))
    return CoverReport(True, True, leaves)


def _witness(cls, points, group_mask):
    h = cls.hypotheses[cls.indices(group_mask)[0]]
    return tuple((x, h[x]) for x in points)


def _verify_sampled(cls, n, cover, samples, seed):
    rng = np.random.default_rng(seed)
    for t in range(samples):
        pts = tuple(int(x) for x in rng.integers(cls.m, size=n))
        h = cls.hypotheses[int(rng.integers(len(cls)))]
        labels = tuple(h[x] for x in pts)
        if not any(cover.outputs(j, pts) == labels for j in range(len(cover))):
            return CoverReport(False, False, t + 1, tuple(zip(pts, labels)))
    return CoverReport(True, False, samples)
