"""Online learners: the lazy SOA and the baselines used against it.

Every learner follows the same protocol::

    learner.reset(cls)
    rec = learner.observe(x, y)       # predict with the current hypothesis, then update
    learner.current_hypothesis()      # a total 0/1 labeling of the domain

``mistakes`` counts observations whose label disagreed with the prediction made
before the update; ``mind_changes`` counts updates that changed the hypothesis.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .core import ConceptClass, as_hypothesis
from .dims import ldim_table
from .errors import InvalidArgument, Unrealizable


@dataclass(frozen=True)
class StepRecord:
    step: int
    point: int
    label: int
    predicted: int
    mistake: bool
    mind_change: bool
    hypothesis: tuple

    def to_json(self):
        d = asdict(self)
        d["hypothesis"] = list(self.hypothesis)
        return d


class Learner:
    frozen = False

    def __init__(self, record: bool = False):
        self.record = record
        self.cls = None
        self.history: list[StepRecord] = []
        self.mistakes = 0
        self.mind_changes = 0
        self.steps = 0
        self._h = None
        self._h_arr = None

    def reset(self, cls: ConceptClass | None):
        self.cls = cls
        self.history = []
        self.mistakes = self.mind_changes = self.steps = 0
        self._set(self._start(cls))
        return self

    def _set(self, h):
        self._h = tuple(int(b) for b in h)
        self._h_arr = np.array(self._h, dtype=np.uint8)

    def _start(self, cls):
        raise NotImplementedError

    def _update(self, x: int, y: int, mistake: bool):
        """Absorb one example; return the new hypothesis (or the current one)."""
        raise NotImplementedError

    def current_hypothesis(self) -> tuple:
        return self._h

    def predict(self, x: int) -> int:
        return self._h[x]

    def observe(self, x, y=None) -> StepRecord:
        if y is None:
            x, y = x
        x, y = int(x), int(y)
        pred = self._h[x]
        mistake = pred != y
        old = self._h
        new = self._update(x, y, mistake)
        changed = new is not old and tuple(new) != old
        if changed:
            self._set(new)
            self.mind_changes += 1
        self.mistakes += mistake
        rec = StepRecord(self.steps, x, y, pred, mistake, changed, self._h)
        self.steps += 1
        if self.record:
            self.history.append(rec)
        return rec

    def observe_many(self, xs, ys):
        """Observe a batch; returns ``[(i, hypothesis)]`` for each batch index i that changed the hypothesis."""
        changes = []
        for i, (x, y) in enumerate(zip(np.asarray(xs).tolist(), np.asarray(ys).tolist())):
            if self.observe(x, y).mind_change:
                changes.append((i, self._h))
        return changes


class _MaskLearner(Learner):
    """Learner whose state is the version space, kept as a hypothesis bitmask.

    Subclasses that only move on contradicted predictions set ``lazy`` and get a
    vectorized ``observe_many`` that skips over runs of correct predictions.
    """

    lazy = True
    tolerant = False  # True: an example that would empty the version space is ignored instead of raising

    def _start(self, cls):
        if cls is None or len(cls) == 0:
            raise InvalidArgument(f"{type(self).__name__} needs a nonempty class")
        self.mask = cls.full_mask
        return self._hypothesis_for(self.mask)

    def _hypothesis_for(self, mask):
        raise NotImplementedError

    def _absorb(self, x, y):
        new = self.mask & self.cls.side(x, y)
        if new:
            self.mask = new
        elif not self.tolerant:
            raise Unrealizable(f"example ({x}, {y}) at step {self.steps} empties the version space")

    def version_space(self):
        return [self.cls.hypotheses[j] for j in self.cls.indices(self.mask)]

    def observe_many(self, xs, ys):
        if not self.lazy or self.record:
            return super().observe_many(xs, ys)
        xs = np.ascontiguousarray(xs, dtype=np.int64)
        ys = np.ascontiguousarray(ys, dtype=np.uint8)
        n = xs.shape[0]
        changes = []
        i = 0
        while i < n:
            j = _kernels.first_mismatch(self._h_arr, xs, ys, i)
            if j > i:
                before = self.mask
                for code in np.unique(xs[i:j] * 2 + ys[i:j]).tolist():
                    self.mask &= self.cls.side(code >> 1, code & 1)
                if not self.mask:
                    self.mask = before
                    # some example in the run empties the version space: replay it step by step
                    rest = super().observe_many(xs[i:], ys[i:])
                    return changes + [(i + k, h) for k, h in rest]
                self.steps += j - i
            if j == n:
                break
            if self.observe(int(xs[j]), int(ys[j])).mind_change:
                changes.append((j, self._h))
            i = j + 1
        return changes


class SOA(_MaskLearner):
    """Standard optimal algorithm with ties (and forced labels) resolved as in its definition.

    The prediction at x is the label y maximizing ldim of the version space
    restricted to h(x) = y, ties going to 1; an empty side has ldim -1, so a
    forced label always wins.  Lazy mode recomputes only after a mistake.
    ``eager=True`` recomputes after every example; ``diagnostic=True`` keeps
    the lazy output but records the steps where the eager one would differ.
    """

    def __init__(self, cls=None, eager=False, diagnostic=False, record=False, tolerant=False):
        super().__init__(record)
        self.tolerant = tolerant
        self.eager = eager
        self.diagnostic = diagnostic
        self.lazy = not (eager or diagnostic)
        self.divergences: list[int] = []
        if cls is not None:
            self.reset(cls)

    def reset(self, cls):
        self.divergences = []
        return super().reset(cls)

    def _start(self, cls):
        if cls is not None and len(cls):
            self._table = ldim_table(cls)
        return super()._start(cls)

    def _hypothesis_for(self, mask):
        return self._table.soa_labels(mask)

    def _update(self, x, y, mistake):
        self._absorb(x, y)
        if self.eager or mistake:
            return self._hypothesis_for(self.mask)
        if self.diagnostic:
            eager = tuple(int(b) for b in self._hypothesis_for(self.mask))
            if eager != self._h:
                self.divergences.append(self.steps)
        return self._h


class FirstConsistent(_MaskLearner):
    """Outputs the lexicographically first hypothesis of the class consistent with everything seen."""

    def __init__(self, cls=None, record=False, tolerant=False):
        super().__init__(record)
        self.tolerant = tolerant
        if cls is not None:
            self.reset(cls)

    def _hypothesis_for(self, mask):
        low = (mask & -mask).bit_length() - 1
        return self.cls.hypotheses[low]

    def _update(self, x, y, mistake):
        self._absorb(x, y)
        return self._hypothesis_for(self.mask)


class Constant(Learner):
    frozen = True

    def __init__(self, h, record=False):
        super().__init__(record)
        self.h = as_hypothesis(h)
        self.reset(None)

    def _start(self, cls):
        if cls is not None and len(self.h) != cls.m:
            raise InvalidArgument("constant hypothesis does not match the domain")
        return self.h

    def _update(self, x, y, mistake):
        return self._h


class BudgetWrapper(Learner):
    """Forwards to ``inner`` until it has changed its hypothesis ``budget`` times, then freezes."""

    def __init__(self, inner: Learner, budget: int, record=False):
        if budget < 0:
            raise InvalidArgument("budget must be nonnegative")
        super().__init__(record)
        self.inner = inner
        self.budget = budget

    @property
    def frozen(self):
        return self.mind_changes >= self.budget or self.inner.frozen

    def _start(self, cls):
        self.inner.reset(cls)
        return self.inner.current_hypothesis()

    def _update(self, x, y, mistake):
        if self.frozen:
            return self._h
        self.inner.observe(x, y)
        return self.inner.current_hypothesis()


def soa_new(cls: ConceptClass, **kw) -> SOA:
    return SOA(cls, **kw)


def constant_learner(h) -> Constant:
    return Constant(h)


def first_consistent_learner(cls: ConceptClass) -> FirstConsistent:
    return FirstConsistent(cls)


def budget_wrapper(inner: Learner, budget: int) -> BudgetWrapper:
    return BudgetWrapper(inner, budget)


def learner_factory(name: str, cls: ConceptClass, budget: int | None = None):
    """Zero-argument factory for the named learner, optionally budget-wrapped (CLI helper)."""
    if name == "soa":
        make = SOA
    elif name in ("first", "first_consistent", "erm"):
        make = FirstConsistent
    elif name.startswith("constant"):
        _, _, bits = name.partition(":")
        h = tuple(int(c) for c in bits) if bits else cls.hypotheses[0]
        def make():
            return Constant(h)
    else:
        raise InvalidArgument(f"unknown learner {name!r}")
    if budget is None:
        return make
    return lambda: BudgetWrapper(make(), budget)
