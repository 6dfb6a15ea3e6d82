"""Sequences, domination, and the two pool builders against oracles."""

import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import line_instance, matrix_instance, random_instance, two_depot_instance
from multitrip import (
    Dominance,
    PoolCapExceeded,
    SequencePool,
    compatible_vehicles,
    dominates,
    enumerate_all_feasible,
    generate_heuristic_pool,
    is_compatible,
    is_feasible,
    make_sequence,
    sequence_duration,
    trip_duration,
)
from multitrip.sequences import extend_sequence, reversed_sequence
from oracles import oracle_feasible_classes


def test_sequence_duration_matches_hand_sum():
    inst = line_instance(xs=(1.0, 2.0, 4.0), service=2.0)
    # 1 -> 2 -> 3: travel 1 + 2, service 3 * 2.
    assert sequence_duration(inst, [1, 2, 3]) == pytest.approx(9.0)
    seq = make_sequence(inst, [3, 1, 2])
    # travel 3 + 1, service 6
    assert seq.duration == pytest.approx(10.0)


def test_sequence_duration_rejects_bad_input():
    inst = line_instance()
    with pytest.raises(ValueError):
        sequence_duration(inst, [])
    with pytest.raises(ValueError):
        sequence_duration(inst, [1, 1])
    with pytest.raises(ValueError):
        sequence_duration(inst, [99])


def test_extend_and_reverse_keep_duration_consistent():
    inst = line_instance(xs=(1.0, 3.0, 6.0), service=1.0)
    seq = make_sequence(inst, [1, 2])
    ext = extend_sequence(inst, seq, 3)
    assert ext.nodes == (1, 2, 3)
    assert ext.duration == pytest.approx(sequence_duration(inst, [1, 2, 3]))
    rev = reversed_sequence(ext)
    assert rev.nodes == (3, 2, 1)
    assert rev.duration == pytest.approx(ext.duration)
    assert rev.class_key == ext.class_key


def test_trip_duration_adds_depot_legs():
    inst = line_instance(xs=(2.0, 5.0), service=1.0)
    seq = make_sequence(inst, [1, 2])
    # legs 2 and 5, inner 3, service 2
    assert trip_duration(inst, seq, 0) == pytest.approx(12.0)
    with pytest.raises(ValueError):
        trip_duration(inst, seq, 42)


def test_compatibility_depends_on_budget_and_territory():
    inst = two_depot_instance(budgets=(12.0, 50.0))
    near = make_sequence(inst, [2])  # close to depot 0
    far = make_sequence(inst, [6])   # close to depot 1
    assert is_compatible(inst, near, 0)
    assert not is_compatible(inst, far, 0)  # round trip exceeds 12
    assert compatible_vehicles(inst, near) == [0, 1]
    fenced = inst.with_territory({t.id: 1 for t in inst.targets})
    assert compatible_vehicles(fenced, make_sequence(fenced, [2])) == [1]
    assert is_feasible(fenced, make_sequence(fenced, [2]))


def test_dominance_verdicts():
    inst = line_instance(xs=(1.0, 2.0, 3.0), service=1.0)
    a = make_sequence(inst, [1, 2, 3])
    rev = make_sequence(inst, [3, 2, 1])
    detour = make_sequence(inst, [2, 1, 3])  # extremes {2, 3}
    assert dominates(a, rev) is Dominance.EQUAL
    assert dominates(rev, a) is Dominance.EQUAL
    b = make_sequence(inst, [1, 3, 2])  # extremes {1, 2}, a has {1, 3}
    assert dominates(a, b) is Dominance.NONE
    assert dominates(a, make_sequence(inst, [1, 2])) is Dominance.NONE
    assert detour.class_key != a.class_key


def test_strict_dominance_within_one_class():
    # On a line, visiting interior targets out of order keeps the node set
    # and the extreme pair but lengthens the walk, which is exactly the
    # strictly dominated case.
    inst = line_instance(xs=(1.0, 2.0, 3.0, 4.0))
    shorter = make_sequence(inst, [1, 2, 3, 4])  # travel 3
    longer = make_sequence(inst, [1, 3, 2, 4])   # travel 5
    assert shorter.class_key == longer.class_key
    assert longer.duration > shorter.duration
    assert dominates(shorter, longer) is Dominance.STRICT
    assert dominates(longer, shorter) is Dominance.NONE


def test_dominates_requires_same_class():
    inst = line_instance(xs=(1.0, 2.0, 3.0, 4.0))
    a = make_sequence(inst, [1, 2, 3])
    b = make_sequence(inst, [1, 2, 4])
    assert dominates(a, b) is Dominance.NONE


def test_pool_class_index_and_removal():
    inst = line_instance(xs=(1.0, 2.0, 3.0))
    pool = SequencePool(inst)
    sid = pool.add(make_sequence(inst, [1, 2]))
    assert pool.class_sids(make_sequence(inst, [2, 1]).class_key) == [sid]
    assert pool.covering_of(1) == [sid]
    pool.remove(sid)
    assert pool.covering_of(1) == []
    assert sorted(pool.uncovered_targets()) == [1, 2, 3]


def test_pool_rejects_sequences_nobody_can_fly():
    inst = line_instance(xs=(1.0, 30.0), budget=20.0)
    pool = SequencePool(inst)
    with pytest.raises(ValueError):
        pool.add(make_sequence(inst, [2]))


def test_pool_dump_lines_format():
    inst = line_instance(xs=(1.0, 2.0))
    pool = SequencePool(inst)
    sid = pool.add(make_sequence(inst, [1, 2]))
    line = pool.dump_lines()[0]
    nodes = " ".join(str(i) for i in (1, 2))
    dur = sequence_duration(inst, [1, 2])
    assert line == f"{sid}; {nodes}; {dur:.9f}; 0"


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("kind", ["metric", "wide", "matrix"])
def test_enumeration_matches_permutation_oracle(seed, kind):
    if kind == "metric":
        inst = random_instance(seed, n=5)
    elif kind == "wide":
        inst = random_instance(seed, n=5, budgets=(60.0, 60.0))
    else:
        inst = matrix_instance()
    expected = oracle_feasible_classes(inst)
    pool = enumerate_all_feasible(inst)
    got = {pool.get(sid).class_key: pool.get(sid).duration for sid in pool}
    assert set(got) == set(expected)
    for key, dur in expected.items():
        assert got[key] == pytest.approx(dur, abs=1e-9)


def test_enumeration_cap_raises_or_truncates():
    inst = random_instance(0, n=6, budgets=(60.0, 60.0))
    full = enumerate_all_feasible(inst)
    assert len(full) > 10
    with pytest.raises(PoolCapExceeded):
        enumerate_all_feasible(inst, cap=10)
    part = enumerate_all_feasible(inst, cap=10, partial_ok=True)
    assert not part.complete
    assert len(part) <= 10


@pytest.mark.parametrize("seed", range(10))
def test_heuristic_pool_with_full_width_equals_enumeration(seed):
    inst = random_instance(seed, n=5)
    n = len(inst.targets)
    pool, stats = generate_heuristic_pool(inst, nc=max(1, n - 1), kmax=10**9)
    full = enumerate_all_feasible(inst)
    got = {pool.get(s).class_key: pool.get(s).duration for s in pool}
    want = {full.get(s).class_key: full.get(s).duration for s in full}
    assert set(got) == set(want)
    for key, dur in want.items():
        assert got[key] == pytest.approx(dur, abs=1e-9)
    assert not stats.cap_hit
    assert stats.max_evictions_per_child <= 1


@pytest.mark.parametrize("seed", range(6))
def test_pool_generation_never_stores_dominated_pairs(seed):
    inst = random_instance(seed, n=6)
    pool, _ = generate_heuristic_pool(inst, nc=3, kmax=200_000)
    seqs = [pool.get(sid) for sid in pool]
    by_class = {}
    for seq in seqs:
        by_class.setdefault(seq.class_key, []).append(seq)
    for members in by_class.values():
        assert len(members) == 1
    for a, b in itertools.combinations(seqs, 2):
        assert dominates(a, b) is not Dominance.STRICT
        assert dominates(b, a) is not Dominance.STRICT


def test_heuristic_pool_cap_counts_insertions():
    inst = random_instance(1, n=8, budgets=(60.0, 60.0))
    unbounded, _ = generate_heuristic_pool(inst, nc=7, kmax=10**9)
    assert len(unbounded) > 12
    pool, stats = generate_heuristic_pool(inst, nc=7, kmax=12)
    assert stats.cap_hit
    assert stats.insertions == 12
    assert len(pool) <= 12
    assert not pool.uncovered_targets()  # singletons seed first
    with pytest.raises(ValueError):
        generate_heuristic_pool(inst, nc=0)
    with pytest.raises(ValueError):
        generate_heuristic_pool(inst, nc=3, kmax=len(inst.targets) - 1)


def test_heuristic_pool_respects_territory():
    inst = two_depot_instance(budgets=(50.0, 50.0))
    fenced = inst.with_territory(
        {t.id: (0 if t.x < 5.0 else 1) for t in inst.targets}
    )
    pool, _ = generate_heuristic_pool(fenced, nc=4, kmax=10**6)
    for sid in pool:
        seq = pool.get(sid)
        homes = {fenced.territory[i] for i in seq.nodes}
        assert len(homes) == 1  # never mixes quadrants
        vids = set(pool.compatible[sid])
        allowed = {v.id for v in fenced.vehicles if v.home_depot in homes}
        assert vids <= allowed


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000),
       n=st.integers(min_value=2, max_value=6))
def test_reversal_is_always_an_equal_class_member(seed, n):
    inst = random_instance(seed % 50, n=n)
    ids = sorted(t.id for t in inst.targets)
    if len(ids) < 2:
        return
    seq = make_sequence(inst, ids)
    rev = reversed_sequence(seq)
    assert seq.class_key == rev.class_key
    assert dominates(seq, rev) is Dominance.EQUAL
    assert dominates(rev, seq) is Dominance.EQUAL


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=500))
def test_trip_always_at_least_sequence_duration(seed):
    inst = random_instance(seed % 20, n=5)
    pool = enumerate_all_feasible(inst)
    for sid in pool:
        seq = pool.get(sid)
        for vid in pool.compatible[sid]:
            v = inst.vehicle_by_id[vid]
            t = trip_duration(inst, seq, vid)
            assert t >= seq.duration - 1e-12
            assert t <= v.budget + 1e-9
