"""PEC-learning simulation, the global-stability harness, and the mind-change adversary."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .core import ConceptClass, FiniteDistribution, is_realizable_dist, loss
from .dims import TreeNode, ldim, ldim_certificate
from .errors import InvalidArgument

DEFAULT_REPETITION_CAP = 10_000


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for ``(seed, trial)``; the same pair always yields the same stream."""
    return np.random.default_rng([int(seed), int(trial)])


@dataclass
class PecTrace:
    """Hypotheses h_0..h_N along one i.i.d. run; index n is the output after n examples."""

    horizon: int
    hypothesis_ids: np.ndarray
    losses: np.ndarray
    changes: np.ndarray
    hypotheses: list

    @property
    def mind_changes(self) -> int:
        return int(self.changes.sum())

    @property
    def terminal_loss(self) -> float:
        return float(self.losses[-1])

    @property
    def first_zero_loss_step(self):
        """Smallest n with loss 0 at every step n..N, or None if the final loss is positive."""
        nz = np.flatnonzero(self.losses > 0)
        if nz.size == 0:
            return 0
        last = int(nz[-1])
        return None if last == self.horizon else last + 1

    def summary(self) -> dict:
        return {
            "horizon": self.horizon,
            "mind_changes": self.mind_changes,
            "first_zero_loss_step": self.first_zero_loss_step,
            "terminal_loss": self.terminal_loss,
        }

    def records(self):
        for n in range(self.horizon + 1):
            yield {"step": n, "hypothesis_id": int(self.hypothesis_ids[n]),
                   "loss": float(self.losses[n]), "mind_change": bool(self.changes[n])}


def _check_realizable(cls, dist):
    if not is_realizable_dist(cls, dist):
        raise InvalidArgument("distribution is not realizable by the class")


def simulate_pec(learner, dist: FiniteDistribution, cls: ConceptClass, horizon: int, seed: int = 0,
                 trial: int = 0, check: bool = True) -> PecTrace:
    """Feed ``horizon`` i.i.d. draws from ``dist`` to a freshly reset learner and record h_0..h_N.

    Eventual correctness can only be observed up to the horizon; the trace
    reports where the loss last became zero, it does not certify the limit.
    """
    if check:
        _check_realizable(cls, dist)
    learner.reset(cls)
    xs, ys = dist.draw(trial_rng(seed, trial), horizon)
    h0 = learner.current_hypothesis()
    changes = learner.observe_many(xs, ys)
    ids = np.zeros(horizon + 1, dtype=np.int32)
    losses = np.empty(horizon + 1, dtype=np.float64)
    flags = np.zeros(horizon + 1, dtype=np.bool_)
    hyps = [h0]
    losses[:] = loss(h0, dist)
    for i, h in changes:
        step = i + 1  # h_n is the output after n examples
        hyps.append(h)
        ids[step:] = len(hyps) - 1
        losses[step:] = loss(h, dist)
        flags[step] = True
    return PecTrace(horizon, ids, losses, flags, hyps)


def pec_monte_carlo(learner_factory, dist, cls, horizon, trials, seed=0):
    """One summary row per trial: trial, mind_changes, first_zero_loss_step, terminal_loss."""
    _check_realizable(cls, dist)
    rows = []
    for t in range(trials):
        tr = simulate_pec(learner_factory(), dist, cls, horizon, seed=seed, trial=t, check=False)
        rows.append({"trial": t, **{k: v for k, v in tr.summary().items() if k != "horizon"}})
    return rows


@dataclass(frozen=True)
class GlobalStability:
    modal: tuple
    frequency: float
    half_width: float
    trials: int
    counts: dict = field(repr=False)

    def frequencies(self):
        return {h: c / self.trials for h, c in self.counts.items()}


def estimate_global_stability(learner_factory, dist, cls, n, trials, seed=0, z=1.96) -> GlobalStability:
    """Frequency of the most common output hypothesis over ``trials`` independent n-samples."""
    _check_realizable(cls, dist)
    counts = Counter()
    for t in range(trials):
        learner = learner_factory()
        learner.reset(cls)
        xs, ys = dist.draw(trial_rng(seed, t), n)
        learner.observe_many(xs, ys)
        counts[learner.current_hypothesis()] += 1
    # ties in the mode go to the lexicographically smallest hypothesis
    modal, c = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    p = c / trials
    return GlobalStability(modal, p, z * math.sqrt(p * (1 - p) / trials), trials, dict(counts))


# -- adversary ---------------------------------------------------------------------

EXCEEDED_BUDGET = "EXCEEDED_BUDGET"
PERSISTENT_ERROR = "PERSISTENT_ERROR"
INCONCLUSIVE = "INCONCLUSIVE"
SURVIVED = "SURVIVED"


@dataclass
class AdversaryVerdict:
    kind: str
    sequence: list          # every example fed, in order (repetitions included)
    branch: list            # the distinct examples placed along the tree branch
    distribution: FiniteDistribution
    transcript: list        # StepRecords
    budget: int
    mind_changes: int
    final_loss: float

    def to_json(self):
        return {
            "kind": self.kind,
            "budget": self.budget,
            "mind_changes": self.mind_changes,
            "final_loss": self.final_loss,
            "sequence": [list(z) for z in self.sequence],
            "branch": [list(z) for z in self.branch],
            "distribution": [[x, y, w] for x, y, w in self.distribution.atoms],
            "transcript": [r.to_json() for r in self.transcript],
        }


def force_mind_changes(learner_factory, cls: ConceptClass, budget: int,
                       repetition_cap: int = DEFAULT_REPETITION_CAP, allow_shallow: bool = False,
                       tree=None) -> AdversaryVerdict:
    """Build a realizable sequence along a shattered tree that defeats a budget-``d`` learner.

    Level 1 labels the root against the learner's initial output.  Each later
    level replays the examples placed so far, round-robin, until the learner
    changes its mind, then steps to the child of the last node in the
    direction of that node's label and again labels the new node against the
    current output.  With a tree of depth d+1 the learner must either change
    its mind d+1 times or stay wrong on the uniform distribution over the
    branch examples.

    ``allow_shallow`` runs on a tree of depth ldim <= budget instead of
    raising; a learner that ends with zero loss there is reported SURVIVED.
    """
    if budget < 0:
        raise InvalidArgument("budget must be nonnegative")
    d = ldim(cls)
    if tree is None:
        if d < budget + 1 and not allow_shallow:
            raise InvalidArgument(f"need a shattered tree of depth {budget + 1}, ldim is {d}")
        if d < 1:
            raise InvalidArgument("the class shatters no tree of depth 1")
        tree = ldim_certificate(cls, min(d, budget + 1))
    depth = tree.depth

    learner = learner_factory()
    learner.record = True
    learner.reset(cls)
    fed, branch = [], []

    def verdict(kind):
        dist = FiniteDistribution.uniform(branch)
        return AdversaryVerdict(kind, fed, list(branch), dist, learner.history, budget,
                                learner.mind_changes, loss(learner.current_hypothesis(), dist))

    def erring():
        h = learner.current_hypothesis()
        return any(h[x] != y for x, y in branch)

    node = tree
    h = learner.current_hypothesis()
    branch.append((node.point, 1 - h[node.point]))
    for level in range(1, depth + 1):
        fed.append(branch[-1])
        learner.observe(*branch[-1])
        reps = 0
        while learner.mind_changes < level:
            if learner.frozen and erring():
                return verdict(PERSISTENT_ERROR)
            if reps >= repetition_cap:
                return verdict(INCONCLUSIVE)
            z = branch[reps % len(branch)]
            fed.append(z)
            learner.observe(*z)
            reps += 1
        if learner.mind_changes > budget:
            return verdict(EXCEEDED_BUDGET)
        if level == depth:
            break
        node = node.right if branch[-1][1] == 1 else node.left
        assert isinstance(node, TreeNode)
        h = learner.current_hypothesis()
        branch.append((node.point, 1 - h[node.point]))

    # shallow tree: mind changes <= budget so far and no deeper node to exploit
    reps = 0
    while True:
        if learner.mind_changes > budget:
            return verdict(EXCEEDED_BUDGET)
        if not erring():
            return verdict(SURVIVED)
        if learner.frozen:
            return verdict(PERSISTENT_ERROR)
        if reps >= repetition_cap:
            return verdict(INCONCLUSIVE)
        z = branch[reps % len(branch)]
        fed.append(z)
        learner.observe(*z)
        reps += 1
