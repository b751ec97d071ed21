import random

import pytest
from hypothesis import given, strategies as st

from forcematch import engine
from forcematch.errors import MalformedStateError
from forcematch.generators import gen_random, gen_tight_balanced
from forcematch.model import Instance, Matching

import reference
from strategies import instances


def pairs(mu):
    return sorted(mu.pairs())


def test_tight_witness_men_proposing(tight3):
    inst, mu = tight3
    assert engine.run(inst)[0] == mu


def test_distinct_tops_stop_after_first_night():
    inst = Instance(3, 3, ((2, 0, 1), (0, 1, 2), (1, 2, 0)), ((1, 0, 2), (2, 0, 1), (0, 1, 2)))
    mu, rt = engine.run(inst, trace=True)
    assert pairs(mu) == [(0, 2), (1, 0), (2, 1)]
    assert rt.n_nights == 1 and rt.n_rejections == 0


def test_two_stable_sides(two_stable):
    men, _ = engine.run(two_stable, engine.MEN)
    women, _ = engine.run(two_stable, engine.WOMEN)
    assert pairs(men) == [(0, 0), (1, 1)]
    assert pairs(women) == [(0, 1), (1, 0)]


def test_women_serenaded_only_by_blacklisted_men_reject_all():
    inst = Instance(1, 2, ((),), ((0,), (0,)))
    mu, rt = engine.run(inst, trace=True)
    assert mu.size == 0
    assert sorted(r.proposer for r in rt.nights[0].rejections) == [0, 1]
    assert all(r.favoured is None for r in rt.nights[0].rejections)


def test_stable_initial_state_is_a_fixed_point(two_stable):
    mu, _ = engine.run(two_stable)
    again, rt = engine.run_from_state(two_stable, mu, trace=True)
    assert again == mu and rt.n_rejections == 0


def test_tight_instance_from_shifted_state(tight3):
    inst, mu = tight3
    shifted = Matching.from_pairs(3, 3, [(1, 0), (2, 1), (0, 2)])
    assert engine.run_from_state(inst, shifted)[0] == mu


def test_flat_example_from_first_night():
    inst = Instance(2, 2, ((1,), (0, 1)), ((0, 1), (1, 0)))
    first = Matching.from_pairs(2, 2, [(0, 0), (1, 1)])
    assert pairs(engine.run_from_state(inst, first)[0]) == [(0, 1), (1, 0)]


def test_state_with_unlisted_woman_is_rejected():
    inst = Instance(2, 1, ((0,), (0,)), ((0,),))
    with pytest.raises(MalformedStateError):
        engine.run_from_state(inst, Matching.from_pairs(2, 1, [(1, 0)]))


def test_forced_rejection_must_dissolve_a_held_pair(two_stable):
    mu, _ = engine.run(two_stable)
    with pytest.raises(MalformedStateError):
        engine.run_from_state(two_stable, mu, forced=[(0, 1)])


def test_single_man_sequential_matches_run():
    inst = Instance(3, 1, ((0,), (0,), ()), ((2, 1, 0),))
    assert engine.run_sequential(inst) == engine.run(inst)[0]
    assert pairs(engine.run(inst)[0]) == [(1, 0)]


def test_blocking_pairs_on_empty_matching():
    inst = Instance(1, 1, ((0,),), ((0,),))
    assert engine.find_blocking_pairs(inst, Matching.empty(1, 1)) == [(0, 0)]


def test_blocking_pairs_two_stable(two_stable):
    both = Matching.from_pairs(2, 2, [(0, 0), (1, 1)])
    swapped = Matching.from_pairs(2, 2, [(0, 1), (1, 0)])
    assert engine.find_blocking_pairs(two_stable, both) == []
    assert engine.find_blocking_pairs(two_stable, swapped) == []
    partial = Matching.from_pairs(2, 2, [(0, 0)])
    # w0 prefers m1 to m0 and m1 is single, so (w0, m1) blocks as well as (w1, m1)
    assert engine.find_blocking_pairs(two_stable, partial) == [(0, 1), (1, 1)]
    assert reference.blocking_pairs(two_stable.prefs_w, two_stable.prefs_m, partial.w2m) == [(0, 1), (1, 1)]


def test_rationality_reported_separately():
    inst = Instance(1, 1, ((),), ((0,),))
    mu = Matching.from_pairs(1, 1, [(0, 0)])
    assert engine.rationality_violations(inst, mu) == [(0, 0)]
    assert engine.find_blocking_pairs(inst, mu) == []
    assert not engine.is_stable(inst, mu)


def test_trace_text():
    inst = Instance(1, 2, ((1, 0),), ((0,), (0,)))
    _, rt = engine.run(inst, trace=True)
    assert rt.format() == "night 1: m0 -> w0; m1 -> w0; reject w0 x m0\nnight 2: \n"


def test_untraced_run_refuses_trace_queries(two_stable):
    _, rt = engine.run(two_stable)
    with pytest.raises(ValueError):
        rt.rejectors()


@given(instances(max_women=6, max_men=6))
def test_run_is_stable_and_men_optimal(inst):
    mu, _ = engine.run(inst)
    assert engine.is_stable(inst, mu)
    assert mu.w2m == reference.men_optimal(inst.prefs_w, inst.prefs_m)


@given(instances(max_women=6, max_men=6))
def test_women_proposing_is_the_transposed_run(inst):
    mu, _ = engine.run(inst, engine.WOMEN)
    assert mu == engine.run(inst.transposed())[0].transposed()
    assert engine.is_stable(inst, mu)


@given(instances(max_women=6, max_men=6), st.integers(0, 2 ** 32))
def test_sequential_timing_invariance(inst, seed):
    assert engine.run_sequential(inst, order_policy=engine.random_policy(seed)) == engine.run(inst)[0]
    assert engine.run_sequential(inst, order_policy=engine.highest_first) == engine.run(inst)[0]


@given(instances(max_women=6, max_men=6))
def test_trace_invariants(inst):
    mu, rt = engine.run(inst, trace=True)
    assert rt.nights[-1].rejections == []
    assert rt.proposals <= sum(len(lst) for lst in inst.prefs_m)
    served = {}
    for night in rt.nights:
        men = [m for m, _ in night.serenades]
        assert len(men) == len(set(men))
        for m, w in night.serenades:
            served[m] = w
        for rej in night.rejections:
            # the rejected man stands at the rejecting woman's window
            assert served[rej.proposer] == rej.receiver


@given(instances(max_women=6, max_men=6))
def test_women_only_trade_up(inst):
    _, rt = engine.run(inst, trace=True)
    held = [None] * inst.n_women
    rw = inst.rank_w
    for night in rt.nights:
        for rej in night.rejections:
            if rej.favoured is not None:
                if held[rej.receiver] is not None:
                    assert rw[rej.receiver][rej.favoured] <= rw[rej.receiver][held[rej.receiver]]
                held[rej.receiver] = rej.favoured


@given(instances(max_women=5, max_men=5))
def test_blocking_pairs_match_brute_force(inst):
    for w2m in list(reference.all_matchings(inst.n_women, inst.n_men))[:50]:
        mu = Matching.from_woman_map(w2m, inst.n_men)
        assert engine.find_blocking_pairs(inst, mu) == reference.blocking_pairs(inst.prefs_w, inst.prefs_m, w2m)
        assert engine.is_stable(inst, mu) == reference.is_stable(inst.prefs_w, inst.prefs_m, w2m)


def test_run_from_state_matches_run_from_partial_progress():
    # continuing from the state after a prefix of a sequential run ends where run() ends
    for seed in range(100):
        inst, _ = gen_random(5, 5, seed=seed)
        rng = random.Random(seed)
        held = {}
        m2w = {}
        for m in rng.sample(range(5), 2):
            w = inst.prefs_m[m][0]
            if w not in held:
                held[w] = m
                m2w[m] = w
        start = Matching.from_pairs(5, 5, held.items())
        assert engine.run_from_state(inst, start)[0] == engine.run(inst)[0]


def test_tight_family_witnesses_are_men_optimal():
    for n in range(2, 7):
        inst, mu, _ = gen_tight_balanced(n, (n - 1,))
        assert engine.run(inst)[0] == mu == engine.run(inst, engine.WOMEN)[0]
