"""Online uniform subsequence sampling against (possibly adaptive) stream adversaries."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .core import ConceptClass
from .dims import ldim
from .errors import InvalidArgument, ProtocolError


def _check_sizes(N, n):
    if not 1 <= n <= N:
        raise InvalidArgument(f"need 1 <= n <= N, got n={n}, N={N}")


class UniformSubsequenceSampler:
    """Sequential selection: at step i with r picks left, retain with probability r/(N-i)."""

    def __init__(self, N: int, n: int, rng):
        _check_sizes(N, n)
        self.N, self.n = N, n
        self.rng = rng
        self.i = 0
        self.left = n

    def decide(self) -> bool:
        if self.i >= self.N:
            raise ProtocolError("sampler asked for more than N decisions")
        keep = self.rng.random() * (self.N - self.i) < self.left
        self.i += 1
        self.left -= keep
        return bool(keep)

    def batch(self) -> np.ndarray:
        """All N decisions at once (same law; used when the stream ignores feedback)."""
        return _kernels.retain_batch(self.N, self.n, self.rng.random((1, self.N)))[0]


def subset_probabilities(N: int, n: int) -> dict:
    """Exact law of the retained position set, by summing path probabilities of the sequential rule."""
    _check_sizes(N, n)
    out = {}
    for keep in itertools.product((0, 1), repeat=N):
        p, left = Fraction(1), n
        for i, b in enumerate(keep):
            q = Fraction(left, N - i)
            p *= q if b else 1 - q
            left -= b
            if not p:
                break
        if p:
            out[tuple(i for i, b in enumerate(keep) if b)] = p
    return out


# -- adversaries --------------------------------------------------------------------
#
# An adversary implements next_point(step, feedback) where feedback is a
# read-only array of the retain bits for steps < step.  ``start(N, rng)`` is
# called once per run before the first point.


class ObliviousIID:
    """Uniform i.i.d. points; ignores feedback."""

    oblivious = True

    def __init__(self, m: int):
        self.m = m

    def start(self, N, rng):
        self.points = rng.integers(self.m, size=N)

    def next_point(self, step, feedback):
        return int(self.points[step])

    def stream(self, N, rng):
        return rng.integers(self.m, size=N)


class RoundRobin:
    oblivious = True

    def __init__(self, m: int):
        self.m = m

    def start(self, N, rng):
        pass

    def next_point(self, step, feedback):
        return step % self.m

    def stream(self, N, rng):
        return np.arange(N) % self.m


class ThresholdChaser:
    """Adaptive: finds the hypothesis whose retained frequency deviates most from the
    stream frequency so far and emits points off that hypothesis when the retained
    sample overweights it (on it otherwise), widening the gap on the unretained side."""

    oblivious = False

    def __init__(self, cls: ConceptClass):
        self.cls = cls
        self.cols = cls.matrix.T.astype(np.int64)  # point -> membership vector over hypotheses
        self.sides = [[np.flatnonzero(cls.matrix[j] == b) for b in (0, 1)] for j in range(len(cls))]

    def start(self, N, rng):
        self.rng = rng
        k = len(self.cls)
        self.seen = np.zeros(k, dtype=np.int64)
        self.kept = np.zeros(k, dtype=np.int64)
        self.n_seen = self.n_kept = 0
        self.last = None

    def next_point(self, step, feedback):
        if self.last is not None:
            col = self.cols[self.last]
            self.seen += col
            self.n_seen += 1
            if feedback[step - 1]:
                self.kept += col
                self.n_kept += 1
        if self.n_kept == 0:
            x = int(self.rng.integers(self.cls.m))
        else:
            dev = self.kept / self.n_kept - self.seen / self.n_seen
            j = int(np.argmax(np.abs(dev)))
            side = self.sides[j][0 if dev[j] > 0 else 1]
            if side.size == 0:
                side = self.sides[j][1 if dev[j] > 0 else 0]
            x = int(side[self.rng.integers(side.size)])
        self.last = x
        return x


ADVERSARIES = {
    "iid": lambda cls: ObliviousIID(cls.m),
    "roundrobin": lambda cls: RoundRobin(cls.m),
    "chaser": ThresholdChaser,
}


def make_adversary(name: str, cls: ConceptClass):
    try:
        return ADVERSARIES[name](cls)
    except KeyError:
        raise InvalidArgument(f"unknown adversary {name!r} (known: {', '.join(ADVERSARIES)})") from None


# -- the game -----------------------------------------------------------------------


@dataclass
class AllnResult:
    N: int
    n: int
    discrepancy: float
    retained: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)


def discrepancy(cls: ConceptClass, points, retained) -> float:
    """sup over h of |mu_S(h) - mu_hat(h)| for the stream ``points`` and the retained positions."""
    points = np.asarray(points, dtype=np.int64)
    full = np.bincount(points, minlength=cls.m)
    sub = np.bincount(points[retained], minlength=cls.m)
    n = int(sub.sum())
    if len(cls) == 0 or n == 0:
        return 0.0
    # compare mu_S * N * n with mu_hat * N * n in integers, then scale once
    diff = _kernels.masses(cls.matrix, full) * n - _kernels.masses(cls.matrix, sub) * points.size
    return float(np.abs(diff).max()) / (n * points.size)


def _streams(seed, trial):
    return np.random.default_rng([seed, trial, 0]), np.random.default_rng([seed, trial, 1])


def run_alln(cls: ConceptClass, adversary, N: int, n: int, seed: int = 0, trial: int = 0) -> AllnResult:
    """One protocol run: the adversary emits x_i, then learns whether x_i was retained."""
    _check_sizes(N, n)
    s_rng, a_rng = _streams(seed, trial)
    sampler = UniformSubsequenceSampler(N, n, s_rng)
    if getattr(adversary, "oblivious", False) and hasattr(adversary, "stream"):
        points = np.asarray(adversary.stream(N, a_rng), dtype=np.int64)
        bits = sampler.batch()
        if points.shape != (N,) or points.min(initial=0) < 0 or points.max(initial=0) >= cls.m:
            raise ProtocolError("adversary stream has the wrong length or leaves the domain")
    else:
        adversary.start(N, a_rng)
        points = np.empty(N, dtype=np.int64)
        bits = np.zeros(N, dtype=bool)
        view = bits.view()
        view.flags.writeable = False
        for i in range(N):
            x = adversary.next_point(i, view[:i])
            if not (isinstance(x, (int, np.integer)) and 0 <= x < cls.m):
                raise ProtocolError(f"adversary emitted {x!r} at step {i}, outside the domain")
            points[i] = x
            bits[i] = sampler.decide()
    retained = np.flatnonzero(bits)
    return AllnResult(N, n, discrepancy(cls, points, retained), retained, points)


@dataclass
class QuantileReport:
    quantile: float
    delta: float
    reference: float
    ratio: float
    discrepancies: np.ndarray = field(repr=False)

    def to_json(self):
        return {"quantile": self.quantile, "delta": self.delta, "reference": self.reference,
                "ratio": self.ratio, "median": float(np.median(self.discrepancies)),
                "trials": int(self.discrepancies.size)}


def reference_rate(d: int, n: int, delta: float, C: float = 1.0) -> float:
    """C * sqrt((d + log(1/delta)) / n); C is a display constant only."""
    return C * math.sqrt((d + math.log(1 / delta)) / n)


def alln_trials(cls, adversary, N, n, trials, seed=0) -> np.ndarray:
    return np.array([run_alln(cls, adversary, N, n, seed, t).discrepancy for t in range(trials)])


def quantile_discrepancy(cls, adversary, N, n, trials, delta, seed=0, C=1.0) -> QuantileReport:
    """Empirical (1 - delta)-quantile of the discrepancy over seeded trials."""
    if not 0 < delta <= 1:
        raise InvalidArgument("delta must lie in (0, 1]")
    disc = alln_trials(cls, adversary, N, n, trials, seed)
    q = float(np.quantile(disc, 1 - delta, method="inverted_cdf"))
    ref = reference_rate(max(ldim(cls), 0), n, delta, C)
    return QuantileReport(q, delta, ref, q / ref if ref else math.inf, disc)
