"""The small-class suite: every class with m <= 4 points and 1..8 hypotheses,
one representative per orbit under permutations of the domain.

All the learners, the adversary and the cover construction commute with
renaming points, so one representative per orbit covers the whole family.
"""
import itertools
from functools import lru_cache

from lstone import ConceptClass
from lstone.learners import Learner


def _permute(code, perm, m):
    out = 0
    for i in range(m):
        if code >> i & 1:
            out |= 1 << perm[i]
    return out


@lru_cache(maxsize=None)
def orbit_representatives(m, max_size=8):
    perms = list(itertools.permutations(range(m)))
    table = [[_permute(c, p, m) for c in range(1 << m)] for p in perms]
    reps = []
    for k in range(1, min(max_size, 1 << m) + 1):
        for hs in itertools.combinations(range(1 << m), k):
            if all(tuple(sorted(t[c] for c in hs)) >= hs for t in table):
                reps.append(hs)
    return tuple(reps)


def to_class(m, codes):
    return ConceptClass(m, [tuple(c >> i & 1 for i in range(m)) for c in codes])


def small_classes(max_m=4, max_size=8):
    for m in range(1, max_m + 1):
        for codes in orbit_representatives(m, max_size):
            yield to_class(m, codes)


def soa_game(cls, length, make=None):
    """Worst case of the lazy SOA over every realizable sequence of length <= ``length``.

    Depth-first over sequences, driving a real learner; its behaviour is a
    function of (version space, current hypothesis), so subtrees are memoized on
    that pair and the remaining length.  Returns ``(max mistakes, lazy)``
    where ``lazy`` is False if some step changed the hypothesis without a mistake.
    """
    from lstone.learners import SOA
    learner = (make or SOA)()
    learner.reset(cls)
    memo = {}

    def go(mask, h, left):
        key = (mask, h, left)
        if key in memo:
            return memo[key]
        best, lazy = 0, True
        if left:
            for x in range(cls.m):
                for y in (0, 1):
                    if not mask & cls.side(x, y):
                        continue
                    learner.mask = mask
                    learner._set(h)
                    rec = learner.observe(x, y)
                    sub, sub_lazy = go(learner.mask, learner.current_hypothesis(), left - 1)
                    best = max(best, sub + rec.mistake)
                    lazy = lazy and sub_lazy and (rec.mistake or not rec.mind_change)
        memo[key] = (best, lazy)
        return best, lazy

    return go(cls.full_mask, learner.current_hypothesis(), length)


class FirstLabel(Learner):
    """Outputs the constant hypothesis equal to the first label seen."""

    def _start(self, cls):
        self.m = cls.m
        return (0,) * cls.m

    def _update(self, x, y, mistake):
        return (y,) * self.m if self.steps == 0 else self._h
