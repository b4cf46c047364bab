import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from lstone.core import ConceptClass, make_random, make_thresholds
from lstone.errors import InvalidArgument, ProtocolError
from lstone.sampling import (ObliviousIID, RoundRobin, ThresholdChaser, UniformSubsequenceSampler,
                             discrepancy, make_adversary, quantile_discrepancy, run_alln,
                             subset_probabilities)

T64 = make_thresholds(64)


@pytest.mark.parametrize("N", range(1, 7))
def test_exact_subset_law_is_uniform(N):
    for n in range(1, N + 1):
        probs = subset_probabilities(N, n)
        assert len(probs) == math.comb(N, n)
        assert set(probs.values()) == {Fraction(1, math.comb(N, n))}


def test_take_everything():
    s = UniformSubsequenceSampler(5, 5, np.random.default_rng(0))
    assert [s.decide() for _ in range(5)] == [True] * 5
    with pytest.raises(ProtocolError):
        s.decide()


def test_bad_sizes():
    with pytest.raises(InvalidArgument):
        UniformSubsequenceSampler(3, 4, np.random.default_rng(0))
    with pytest.raises(InvalidArgument):
        UniformSubsequenceSampler(3, 0, np.random.default_rng(0))


def test_half_chance_for_one_of_two():
    rng = np.random.default_rng(11)
    first = sum(UniformSubsequenceSampler(2, 1, rng).decide() for _ in range(100_000))
    assert stats.chisquare([first, 100_000 - first]).pvalue > 0.01


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40), st.data())
def test_always_exactly_n(N, data):
    n = data.draw(st.integers(1, N))
    s = UniformSubsequenceSampler(N, n, np.random.default_rng(N * 100 + n))
    assert sum(s.decide() for _ in range(N)) == n
    s2 = UniformSubsequenceSampler(N, n, np.random.default_rng(N * 100 + n))
    assert s2.batch().sum() == n


def test_batch_matches_sequential_decisions():
    a = UniformSubsequenceSampler(50, 7, np.random.default_rng(3))
    b = UniformSubsequenceSampler(50, 7, np.random.default_rng(3))
    assert [a.decide() for _ in range(50)] == b.batch().tolist()


def test_full_sample_has_no_discrepancy():
    for adv in (ObliviousIID(64), ThresholdChaser(T64)):
        assert run_alln(T64, adv, 300, 300, seed=2).discrepancy == 0.0


def test_all_ones_class_has_no_discrepancy():
    c = ConceptClass(5, [(1,) * 5])
    assert run_alln(c, ObliviousIID(5), 200, 17, seed=1).discrepancy == 0.0


def test_discrepancy_by_hand():
    c = make_thresholds(2)  # 00, 10, 11
    points = [0, 0, 1, 1]
    # retained {0, 2}: mu_hat(10) = 1/2 vs mu(10) = 1/2; everything matches
    assert discrepancy(c, points, [0, 2]) == 0.0
    # retained {0, 1}: mu_hat(10) = 1 vs 1/2
    assert discrepancy(c, points, [0, 1]) == 0.5


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 1000))
def test_discrepancy_invariant_under_complement(seed):
    c = make_random(6, 12, seed=seed)
    comp = ConceptClass(6, [tuple(1 - b for b in h) for h in c.hypotheses])
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, 6, 100)
    kept = np.sort(rng.choice(100, 13, replace=False))
    assert discrepancy(c, pts, kept) == pytest.approx(discrepancy(comp, pts, kept), abs=1e-15)
    assert 0.0 <= discrepancy(c, pts, kept) <= 1.0


def test_fast_path_matches_protocol_loop():
    # the oblivious fast path consumes the random streams exactly like the step-by-step protocol
    class Stepwise(ObliviousIID):
        oblivious = False

    a = run_alln(T64, ObliviousIID(64), 500, 40, seed=5, trial=3)
    b = run_alln(T64, Stepwise(64), 500, 40, seed=5, trial=3)
    assert (a.points == b.points).all() and (a.retained == b.retained).all()
    assert a.discrepancy == b.discrepancy


def test_feedback_is_causal_and_read_only():
    seen = []

    class Spy:
        oblivious = False

        def start(self, N, rng):
            pass

        def next_point(self, step, feedback):
            assert len(feedback) == step
            with pytest.raises(ValueError):
                feedback[:] = 0
            seen.append(int(np.sum(feedback)))
            return 0

    res = run_alln(T64, Spy(), 60, 10, seed=0)
    assert seen[-1] == int(np.sum(res.retained < 59))


def test_out_of_domain_point_is_a_protocol_error():
    class Bad:
        oblivious = False

        def start(self, N, rng):
            pass

        def next_point(self, step, feedback):
            return 64

    with pytest.raises(ProtocolError):
        run_alln(T64, Bad(), 10, 2)


def test_round_robin_stream():
    res = run_alln(make_thresholds(4), RoundRobin(4), 8, 4, seed=0)
    assert res.points.tolist() == [0, 1, 2, 3, 0, 1, 2, 3]


def test_quantile_at_delta_one_is_the_minimum():
    rep = quantile_discrepancy(T64, make_adversary("iid", T64), 512, 32, trials=25, delta=1.0, seed=4)
    assert rep.quantile == rep.discrepancies.min()
    assert rep.reference == pytest.approx(math.sqrt(6 / 32))


def test_quantile_shrinks_with_n():
    adv = make_adversary("iid", T64)
    small = quantile_discrepancy(T64, adv, 2048, 50, trials=60, delta=0.1, seed=8)
    large = quantile_discrepancy(T64, adv, 2048, 800, trials=60, delta=0.1, seed=8)
    assert large.quantile < small.quantile


def test_unknown_adversary():
    with pytest.raises(InvalidArgument):
        make_adversary("oracle", T64)
