import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lstone import stability
from lstone.core import FiniteDistribution, make_singletons, make_thresholds
from lstone.errors import InvalidArgument, ParseError, ResourceLimit
from lstone.learners import SOA, Constant, FirstConsistent
from lstone.stability import (EnumerableCoins, FiniteOutputDistribution as P, Graph, JointRow, JointTable,
                              epsilon_excellent_check, epsilon_good_check, graph_good_check, hockey_stick,
                              kl, largest_good_subset, learner_mutual_information, majority_opinion,
                              mean_posterior, mutual_information, pac_bayes_gap)
from oracles import hyps_of, naive_good, naive_mutual_information, naive_soa
from strategies import classes
from suite import FirstLabel


@st.composite
def distributions(draw, k=4):
    w = draw(st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k))
    total = sum(w)
    return P({i: v / total for i, v in enumerate(w)}, range(k))


def test_hockey_stick_examples():
    p, q = P({0: 0.7, 1: 0.3}), P({0: 0.5, 1: 0.5})
    assert hockey_stick(p, q, 0) == pytest.approx(0.2)
    assert hockey_stick(p, p, 0.3) == 0
    assert hockey_stick(P({0: 1.0}, [0, 1]), P({1: 1.0}, [0, 1]), 0) == 1.0
    with pytest.raises(InvalidArgument):
        hockey_stick(p, P({0: 1.0}), 0)


@settings(max_examples=100, deadline=None)
@given(distributions(), distributions(), st.floats(0, 2), st.floats(0, 2))
def test_hockey_stick_properties(p, q, e1, e2):
    tv = 0.5 * np.abs(p.probs - q.probs).sum()
    assert hockey_stick(p, q, 0) == pytest.approx(tv, abs=1e-12)
    lo, hi = sorted((e1, e2))
    assert hockey_stick(p, q, hi) <= hockey_stick(p, q, lo) + 1e-15
    # against the definition: the worst event over all 2^4 events
    worst = max(max(0.0, sum(p.probs[list(E)]) - math.exp(lo) * sum(q.probs[list(E)]))
                for r in range(5) for E in itertools.combinations(range(4), r))
    assert hockey_stick(p, q, lo) == pytest.approx(worst, abs=1e-12)


def test_kl_examples():
    assert kl(P({0: 0.5, 1: 0.5}), P({0: 0.9, 1: 0.1})) == pytest.approx(
        0.5 * math.log(0.5 / 0.9) + 0.5 * math.log(0.5 / 0.1))
    assert kl(P({0: 1.0}, range(5)), P.uniform(range(5))) == pytest.approx(math.log(5))
    assert kl(P({0: 1.0}, range(5)), P.uniform(range(5)), units="bits") == pytest.approx(math.log2(5))
    assert kl(P.uniform([0, 1]), P({0: 1.0}, [0, 1])) == math.inf


@settings(max_examples=100, deadline=None)
@given(distributions(), distributions())
def test_kl_nonnegative(p, q):
    assert kl(p, q) >= 0
    assert kl(p, p) == 0


def test_output_distribution_validation():
    with pytest.raises(InvalidArgument):
        P({0: 0.5, 1: 0.6})
    with pytest.raises(InvalidArgument):
        P({0: 1.0}, [1])
    with pytest.raises(InvalidArgument):
        JointTable([JointRow("a", 0.5, P({0: 1.0})), JointRow("a", 0.5, P({0: 1.0}))])


def two_atom():
    return FiniteDistribution(((0, 0, 0.5), (1, 1, 0.5)))


def test_constant_learner_has_zero_information():
    c = make_thresholds(3)
    d = FiniteDistribution.uniform([(0, 1), (1, 0), (2, 0)])
    mi, joint = learner_mutual_information(lambda: Constant((1, 0, 0)), c, d, 3)
    assert mi == 0.0 and len(joint) == 27


def test_first_label_learner_leaks_one_bit():
    c = make_singletons(2)
    for n in (1, 3):
        mi, _ = learner_mutual_information(lambda: FirstLabel(), c, two_atom(), n)
        assert abs(mi - math.log(2)) <= 1e-12
        assert learner_mutual_information(lambda: FirstLabel(), c, two_atom(), n, units="bits")[0] == pytest.approx(1.0)


def naive_joint(c, dist, n):
    """Sample law and SOA posteriors by direct enumeration through the naive SOA."""
    rows = []
    for idx in itertools.product(range(len(dist.atoms)), repeat=n):
        seq = [dist.atoms[i][:2] for i in idx]
        prob = math.prod(dist.atoms[i][2] for i in idx)
        _, outs = naive_soa(hyps_of(c), c.m, seq)
        rows.append((prob, {outs[-1]: 1.0}))
    return rows


def test_soa_information_on_thresholds3():
    c = make_thresholds(3)
    d = FiniteDistribution.uniform([(0, 1), (1, 0), (2, 0)])
    mi, joint = learner_mutual_information(lambda: SOA(), c, d, 3)
    expected = naive_mutual_information(naive_joint(c, d, 3))
    assert mi == pytest.approx(expected, abs=1e-12)
    assert mi == pytest.approx(0.6076934238709564, abs=1e-12)  # regression value


def test_identity_with_randomized_learner():
    c = make_thresholds(3)
    d = FiniteDistribution.from_weights([(0, 1), (1, 1), (2, 0)], [1, 2, 3])
    coins = EnumerableCoins([(0.3, lambda: SOA()), (0.5, lambda: FirstConsistent()), (0.2, lambda: Constant((0, 0, 0)))])
    mi, joint = learner_mutual_information(coins, c, d, 3)
    assert abs(mi - pac_bayes_gap(joint, mean_posterior(joint))) <= 1e-9
    rows = [(r.prob, dict(r.posterior.items())) for r in joint.rows]
    assert mi == pytest.approx(naive_mutual_information(rows), abs=1e-12)


def test_pac_bayes_gap_edge_cases():
    prior = P({(0,): 0.5, (1,): 0.5})
    joint = JointTable([JointRow(i, 0.25, prior) for i in range(4)])
    assert pac_bayes_gap(joint, prior) == 0
    assert mutual_information(joint) == 0
    off = P({(1,): 1.0}, [(0,), (1,)])
    assert pac_bayes_gap(joint, off) == math.inf


def test_enumeration_budget():
    d = FiniteDistribution.uniform([(0, 1), (1, 0), (2, 0)])
    with pytest.raises(ResourceLimit):
        learner_mutual_information(lambda: SOA(), make_thresholds(3), d, 12, budget=1000)


# -- good sets


def test_good_examples():
    ok, h = epsilon_good_check(range(8), make_thresholds(8), 0.25)
    assert not ok
    ones = sum(h)
    assert min(ones, 8 - ones) >= 2
    assert epsilon_good_check(range(8), make_singletons(8), 0.25) == (True, None)
    assert epsilon_good_check([3], make_thresholds(8), 0.01) == (True, None)


def test_strict_inequality_at_the_boundary():
    # thresholds(4) on all 4 points: a cut at 1 leaves minority 1; eps * |A| = 1 exactly fails
    c = make_thresholds(4)
    assert not epsilon_good_check([0, 1, 2, 3], c, 0.25)[0]
    assert not naive_good([0, 1, 2, 3], hyps_of(c), 0.25)
    # eps = 0.3 on 10 points: the float 0.3 is just below 3/10, so minority 3 is not < eps * 10
    c10 = make_singletons(10)
    assert epsilon_good_check(range(10), c10, 0.3)[0] == naive_good(range(10), hyps_of(c10), 0.3)


@settings(max_examples=60, deadline=None)
@given(classes(max_m=6, max_k=12), st.sampled_from([0.1, 0.25, 0.3, 1 / 3, 0.5]))
def test_good_check_matches_naive(c, eps):
    for r in range(1, c.m + 1):
        for A in itertools.combinations(range(c.m), r):
            ok, h = epsilon_good_check(A, c, eps)
            assert ok == naive_good(A, hyps_of(c), eps)
            if not ok:
                assert not naive_good(A, [h], eps)


def test_largest_good_subset():
    assert largest_good_subset([5], make_thresholds(8), 0.25).points == (5,)
    full = largest_good_subset(range(8), make_singletons(8), 0.25)
    assert full.points == tuple(range(8)) and full.exponent == 1.0


def test_largest_good_subset_is_maximum():
    c = make_thresholds(8)
    for eps in (0.25, 0.5, 0.6):
        res = largest_good_subset(range(8), c, eps)
        assert res.exact and epsilon_good_check(res.points, c, eps)[0]
        bigger = [A for A in itertools.combinations(range(8), len(res.points) + 1)
                  if naive_good(A, hyps_of(c), eps)]
        assert not bigger


def test_greedy_beyond_budget():
    c = make_singletons(30)
    res = largest_good_subset(range(30), c, 0.1, budget=16)
    assert not res.exact
    assert epsilon_good_check(res.points, c, 0.1)[0]


def test_goodness_is_not_hereditary():
    # a good set can have bad subsets, so no monotonicity may be assumed
    c = make_singletons(8)
    assert epsilon_good_check(range(8), c, 0.25)[0]
    assert not epsilon_good_check([0, 1], c, 0.25)[0]


# -- graphs


def matching(k):
    adj = np.zeros((2 * k, 2 * k), dtype=int)
    for i in range(k):
        adj[i, k + i] = adj[k + i, i] = 1
    return Graph(adj)


def half_graph(k):
    """a_i = vertex i, b_j = vertex k + j, a_i ~ b_j iff i < j."""
    adj = np.zeros((2 * k, 2 * k), dtype=int)
    for i in range(k):
        for j in range(k):
            if i < j:
                adj[i, k + j] = adj[k + j, i] = 1
    return Graph(adj)


def test_majority_opinion():
    g = matching(4)
    assert majority_opinion(0, [4, 5, 6, 7], 0.3, g) == 1  # one neighbour of four: 1 < 1.2
    full = Graph(np.ones((5, 5), dtype=int) - np.eye(5, dtype=int))
    assert majority_opinion(0, [1, 2, 3, 4], 0.25, full) == 0
    half = Graph([[0, 1, 1, 0, 0], [1, 0, 0, 0, 0], [1, 0, 0, 0, 0], [0, 0, 0, 0, 0], [0, 0, 0, 0, 0]])
    assert majority_opinion(0, [1, 2, 3, 4], 0.25, half) is None
    assert majority_opinion(3, [0, 1, 2], 0.25, half) == 1  # isolated


def test_graph_must_be_symmetric():
    with pytest.raises(InvalidArgument):
        Graph([[0, 1], [0, 0]])
    with pytest.raises(ParseError):
        Graph.from_json({"n": 3, "adj": [[0, 1], [1, 0]]})
    g = Graph.from_json(json.loads(json.dumps(matching(2).to_json())))
    assert g.n == 4


def test_matching_left_side_is_excellent():
    g = matching(5)
    B = list(range(5))
    good = [A for r in range(4, 11) for A in itertools.combinations(range(10), r) if graph_good_check(A, g, 0.3)[0]]
    assert good
    rep = epsilon_excellent_check(B, g, 0.3, good)
    assert rep.ok and rep.checked == len(good)


def test_half_graph_straddling_set_is_not_excellent():
    k = 6
    g = half_graph(k)
    B = [k + 1, k + 2, k + 4, k + 5]  # b_j on both sides of the order
    rep = epsilon_excellent_check(B, g, 0.25)
    assert not rep.ok
    A = rep.witness
    assert graph_good_check(A, g, 0.25)[0]
    ops = [majority_opinion(b, A, 0.25, g) for b in B]
    assert len(B) - max(ops.count(0), ops.count(1)) > 0.25 * len(B)


def test_single_vertices_are_excellent():
    # a good set gives every vertex a defined opinion, so a singleton never has an exception
    g = half_graph(4)
    good = stability.good_sets(g, 0.3)
    assert all(epsilon_excellent_check([v], g, 0.3, good).ok for v in range(8))


def test_supplied_sets_must_be_good():
    g = half_graph(4)
    with pytest.raises(InvalidArgument):
        epsilon_excellent_check([4], g, 0.25, [[0, 1, 2, 3, 4, 5, 6, 7]])


def test_good_set_enumeration_budget():
    with pytest.raises(ResourceLimit):
        stability.good_sets(half_graph(10), 0.25, max_vertices=14)
