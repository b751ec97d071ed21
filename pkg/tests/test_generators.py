import statistics

import pytest
from hypothesis import given, strategies as st

from forcematch import engine, oracle
from forcematch.errors import DomainError
from forcematch.generators import gen_divorce_tight, gen_random, gen_tight_balanced, gen_tight_partial
from forcematch.manipulation import blacklist_stats, cycle_partition, tops_distinct
from forcematch.model import format_instance, format_matching, parse_instance, parse_matching


def blacklist_sizes(witness, n_men, women):
    return sorted(n_men - len(witness[w]) for w in women if len(witness[w]) < n_men)


def size_tuples(n):
    """Every valid multiset of block sizes for n couples."""
    def rec(left, max_l, count):
        yield ()
        for l in range(min(max_l, left - 1), 0, -1):
            for rest in rec(left - l - 1, l, count + 1):
                yield (l,) + rest
    return list(rec(n, n, 0))


def test_tight_three_matches_fixture(fixtures_dir):
    inst, mu, witness = gen_tight_balanced(3, (2,))
    assert format_instance(inst) == (fixtures_dir / "tight_n3.inst").read_text()
    assert format_matching(mu) == (fixtures_dir / "tight_n3.match").read_text()
    assert witness == ((0,), (1, 0, 2), (2, 1, 0))
    assert blacklist_sizes(witness, 3, range(3)) == [2]


def test_tight_two():
    inst, mu, witness = gen_tight_balanced(2, (1,))
    assert blacklist_sizes(witness, 2, range(2)) == [1]
    assert oracle.is_unique_stable(inst, mu)
    assert oracle.enumerate_stable(inst) == {mu}


def test_tight_four_two_blocks():
    inst, mu, witness = gen_tight_balanced(4, (1, 1))
    assert witness[0] == (0, 2, 3) and witness[2] == (2, 0, 1)
    assert blacklist_sizes(witness, 4, range(4)) == [1, 1]
    assert inst.prefs_m[0][:2] == (1, 0) and inst.prefs_m[2][:2] == (3, 2)
    assert blacklist_stats(witness, 4, range(4)) == (2, 2, True)


@pytest.mark.parametrize("n", range(1, 8))
def test_every_tight_witness_is_forcing(n):
    for sizes in size_tuples(n):
        inst, mu, witness = gen_tight_balanced(n, sizes)
        assert inst.prefs_w == witness
        assert blacklist_sizes(witness, n, range(n)) == sorted(sizes)
        assert engine.run(inst)[0] == mu == engine.run(inst, engine.WOMEN)[0]
        if n <= 6:
            assert oracle.enumerate_stable(inst) == {mu}


@pytest.mark.parametrize("n,sizes", [(3, (0,)), (3, (1, 1)), (4, (2, 2)), (4, (3, 1)), (-1, ())])
def test_tight_bad_sizes(n, sizes):
    with pytest.raises(DomainError):
        gen_tight_balanced(n, sizes)


def test_divorce_tight_shapes():
    inst, mu = gen_divorce_tight(1)
    assert inst.prefs_m == ((0,),) and mu.size == 1
    inst, mu = gen_divorce_tight(4)
    assert inst.prefs_m[0] == (1, 2, 3, 0)
    assert all(lst == (0, 1, 2, 3) for lst in inst.prefs_w)
    with pytest.raises(DomainError):
        gen_divorce_tight(0)


def test_partial_all_helped():
    inst, mu, witness, n_h = gen_tight_partial(3, 4, range(3), range(3))
    assert n_h == 3
    assert blacklist_sizes(witness, 4, range(3)) == []
    assert oracle.enumerate_stable(inst) == {mu}


def test_partial_more_women():
    # with every man matched, the single woman needs no blacklist at all
    inst, mu, witness, n_h = gen_tight_partial(4, 3, range(3), range(3), sizes=(1,),
                                               outsider_blacklists_w={3: ()})
    assert n_h == 0
    assert witness[3] == (0, 1, 2)
    assert oracle.enumerate_stable(inst) == {mu}
    # an unmatched man who accepts her must be on her blacklist
    inst, mu, witness, _ = gen_tight_partial(4, 5, range(3), range(3),
                                             outsider_blacklists_w={3: ()},
                                             outsider_blacklists_m={3: {3}, 4: set()})
    assert 3 not in inst.prefs_m[3]
    assert 3 in witness[3] and 4 not in witness[3]
    assert oracle.enumerate_stable(inst) == {mu}


def test_partial_single_woman_blacklist_is_necessary():
    inst, mu, witness, n_h = gen_tight_partial(3, 3, [0, 1], [0, 1],
                                               outsider_blacklists_w={2: ()},
                                               outsider_blacklists_m={2: set()})
    assert n_h == 2 and 2 not in witness[2]
    # every profile whose men-optimal matching is mu has woman 2 blacklisting man 2
    assert oracle.exhaust_w_profiles(inst.prefs_m, mu, lambda p: 2 not in p[2]) is None


def test_partial_blocks_and_helpers():
    inst, mu, witness, n_h = gen_tight_partial(6, 7, range(6), range(6), sizes=(2,),
                                               outsider_blacklists_m={6: {0, 1, 2}})
    assert n_h == 3
    matched = sorted(mu.matched_women)
    n_b, combined, disjoint = blacklist_stats(witness, 7, matched)
    assert (n_b, combined, disjoint) == (1, 2, True)
    for w in matched:
        assert set(range(7)) - set(witness[w]) <= mu.matched_men
    assert oracle.enumerate_stable(inst) == {mu}


def test_partial_outsider_preferences():
    # woman 2 stays single and blacklists man 0; man 0 must rank her ahead of his partner
    inst, mu, witness, _ = gen_tight_partial(3, 2, [0, 1], [0, 1], outsider_blacklists_w={2: {0}})
    assert inst.prefs_m[0][0] == 2
    assert 0 not in witness[2]
    assert oracle.enumerate_stable(inst) == {mu}


@pytest.mark.parametrize("kwargs", [
    dict(matched_women=[0, 1], matched_men=[0]),
    dict(matched_women=[0], matched_men=[0], sizes=(1,)),
    dict(matched_women=[0], matched_men=[0], outsider_blacklists_w={0: {1}}),
    dict(matched_women=[0], matched_men=[0], outsider_blacklists_m={0: {1}}),
    dict(matched_women=[5], matched_men=[0]),
])
def test_partial_bad_parameters(kwargs):
    with pytest.raises(DomainError):
        gen_tight_partial(3, 3, **kwargs)


@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_partial_witness_property(nw, nm, data):
    k = data.draw(st.integers(0, min(nw, nm)))
    women = data.draw(st.permutations(range(nw)))[:k]
    men = data.draw(st.permutations(range(nm)))[:k]
    Wo = [w for w in range(nw) if w not in women]
    Mo = [m for m in range(nm) if m not in men]
    bw = {w: data.draw(st.sets(st.integers(0, nm - 1))) for w in Wo}
    bm = {m: data.draw(st.sets(st.integers(0, nw - 1))) for m in Mo}
    helped = sum(1 for w in women if any(w not in bm[m] for m in Mo))
    free = k - helped
    sizes = data.draw(st.sampled_from([s for s in size_tuples(free)] or [()]))
    inst, mu, witness, n_h = gen_tight_partial(nw, nm, women, men, sizes, bw, bm)
    assert n_h == helped
    assert mu.matched_women == frozenset(women) and mu.matched_men == frozenset(men)
    n_b, combined, disjoint = blacklist_stats(witness, nm, sorted(women))
    assert disjoint and n_b == len(sizes) and combined == sum(sizes)
    for w in women:
        assert set(range(nm)) - set(witness[w]) <= set(men)
    for w in Wo:
        assert set(range(nm)) - set(witness[w]) >= bw[w]
    assert engine.run(inst)[0] == mu == engine.run(inst, engine.WOMEN)[0]
    assert oracle.enumerate_stable(inst) == {mu}
    assert parse_instance(format_instance(inst)) == inst


def test_random_is_deterministic():
    assert gen_random(5, 4, seed=11) == gen_random(5, 4, seed=11)
    assert gen_random(5, 4, seed=11) != gen_random(5, 4, seed=12)


def test_random_flat_tops():
    inst, _ = gen_random(5, seed=1, flat=True)
    assert tops_distinct(inst)
    assert len({lst[0] for lst in inst.prefs_m}) == 5
    with pytest.raises(DomainError):
        gen_random(3, 4, flat=True)


@pytest.mark.parametrize("nw,nm", [(4, 4), (3, 5), (5, 3)])
def test_random_saturates_smaller_side(nw, nm):
    for seed in range(20):
        inst, mu = gen_random(nw, nm, seed=seed)
        assert mu.size == min(nw, nm)
        assert all(len(lst) == nm for lst in inst.prefs_w)
        text = format_instance(inst)
        assert parse_instance(text) == inst
        assert parse_matching(format_matching(mu), nw, nm) == mu


def test_random_target_cycle_count_is_harmonic():
    # the target is independent of the lists, so against the men-optimal matching
    # it is a uniform permutation, whose expected cycle count is H_n
    n = 6
    counts = []
    for seed in range(1000):
        inst, mu = gen_random(n, seed=seed)
        counts.append(len(cycle_partition(engine.run(inst)[0], mu)))
    h = sum(1 / j for j in range(1, n + 1))
    se = statistics.stdev(counts) / len(counts) ** 0.5
    assert abs(statistics.mean(counts) - h) <= 3 * se
