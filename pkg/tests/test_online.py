import dataclasses
import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from lstone.core import ConceptClass, make_random, make_singletons, make_thresholds
from lstone.dims import binom_leq, ldim
from lstone.errors import InvalidArgument, ResourceLimit
from lstone.learners import SOA, Constant
from lstone.online import ExpertCover, build_cover, run_online, verify_cover
from oracles import hyps_of, realizable_sequences
from strategies import class_and_sequence, classes


def test_run_online_counts_mistakes():
    c = ConceptClass(3, [(0, 1, 1)])
    assert run_online(SOA(), [(0, 0), (1, 1)], c).mistakes == 0
    h = (0, 1, 0)
    res = run_online(Constant(h), [(x, 1 - h[x]) for x in range(3)] * 2, make_singletons(3),
                     allow_unrealizable=True)
    assert res.mistakes == 6 and not res.realizable


def test_run_online_refuses_unrealizable():
    with pytest.raises(InvalidArgument):
        run_online(SOA(), [(0, 0), (2, 1)], make_thresholds(3))
    res = run_online(SOA(), [(0, 0), (2, 1), (2, 1)], make_thresholds(3), allow_unrealizable=True)
    assert len(res.trace) == 3


@settings(max_examples=100, deadline=None)
@given(class_and_sequence())
def test_run_online_mistake_bound(case):
    c, seq = case
    assert run_online(SOA(), seq, c).mistakes <= ldim(c)


def test_cover_sizes():
    assert len(build_cover(make_thresholds(3), 4)) == 11
    assert len(build_cover(ConceptClass(2, [(0, 1)]), 5)) == 1
    with pytest.raises(ResourceLimit):
        build_cover(make_random(8, 200, seed=0), 30, max_experts=1000)


def test_singleton_class_cover_is_the_soa():
    c = ConceptClass(3, [(1, 0, 1)])
    cover = build_cover(c, 3)
    assert cover.subsets == (frozenset(),)
    assert cover.outputs(0, [0, 1, 2]) == (1, 0, 1)


@pytest.mark.parametrize("n", range(1, 6))
def test_thresholds3_cover_verifies(n):
    c = make_thresholds(3)
    rep = verify_cover(c, n, build_cover(c, n))
    assert rep.ok and rep.exhaustive


def test_every_expert_is_needed_on_a_tight_instance():
    c = make_thresholds(3)
    cover = build_cover(c, 4)
    for j in range(len(cover)):
        rest = dataclasses.replace(cover, subsets=cover.subsets[:j] + cover.subsets[j + 1:])
        rep = verify_cover(c, 4, rest)
        assert not rep.ok
        # the counterexample is realizable and no remaining expert predicts it
        pts = [x for x, _ in rep.counterexample]
        labels = tuple(y for _, y in rep.counterexample)
        assert c.mask_of(rep.counterexample)
        assert all(rest.outputs(i, pts) != labels for i in range(len(rest)))


@settings(max_examples=40, deadline=None)
@given(classes(max_m=3, max_k=6))
def test_soa_mistake_set_names_the_expert(c):
    # the expert flipping exactly at SOA's mistakes reproduces the sequence
    n = 3
    cover = build_cover(c, n)
    index = {s: j for j, s in enumerate(cover.subsets)}
    for seq in realizable_sequences(hyps_of(c), c.m, n):
        soa = SOA(c)
        mistakes = frozenset(i for i, (x, y) in enumerate(seq) if soa.observe(x, y).mistake)
        j = index[mistakes]
        assert cover.outputs(j, [x for x, _ in seq]) == tuple(y for _, y in seq)


def test_experts_ignore_labels():
    # replaying the same points under every labeling yields the same outputs
    c = make_thresholds(4)
    cover = build_cover(c, 4)
    pts = [2, 0, 3, 1]
    for j in range(len(cover)):
        runs = set()
        for labels in itertools.product((0, 1), repeat=4):
            e = cover.expert(j)
            runs.add(tuple(e.observe(x, y) for x, y in zip(pts, labels)))
        assert runs == {cover.outputs(j, pts)}


def test_expert_counts_mistakes():
    c = make_thresholds(3)
    cover = build_cover(c, 2)
    e = cover.expert(0)
    p = e.predict(1)
    e.observe(1, 1 - p)
    assert e.mistakes == 1


def test_cover_json_round_trip():
    c = make_thresholds(3)
    cover = build_cover(c, 3)
    obj = json.loads(json.dumps(cover.to_json()))
    assert obj["n"] == 3 and obj["d"] == 2
    assert ExpertCover.from_json(obj, c).subsets == cover.subsets


def test_sampled_verification_above_budget():
    c = make_thresholds(3)
    rep = verify_cover(c, 5, build_cover(c, 5), budget=10, samples=300, seed=1)
    assert rep.ok and not rep.exhaustive and rep.sequences == 300


def test_horizon_mismatch():
    c = make_thresholds(3)
    with pytest.raises(InvalidArgument):
        verify_cover(c, 4, build_cover(c, 3))


def test_cover_size_formula():
    for c in (make_thresholds(7), make_random(5, 12, seed=4)):
        for n in range(6):
            assert len(build_cover(c, n)) == binom_leq(n, ldim(c))


@settings(max_examples=60, deadline=None)
@given(classes(max_m=3, max_k=6), st.integers(1, 3), st.integers(0, 2 ** 16))
def test_verifier_agrees_with_literal_enumeration(c, n, drop):
    cover = build_cover(c, n)
    kept = tuple(s for j, s in enumerate(cover.subsets) if not drop >> j & 1) or cover.subsets[:1]
    partial = dataclasses.replace(cover, subsets=kept)
    literal = all(
        any(partial.outputs(j, [x for x, _ in seq]) == tuple(y for _, y in seq) for j in range(len(partial)))
        for seq in realizable_sequences(hyps_of(c), c.m, n))
    assert verify_cover(c, n, partial).ok == literal
