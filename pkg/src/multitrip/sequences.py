"""Sequences, trips, domination, and the two sequence-pool builders.

A sequence is an ordered, duplicate-free run of targets flown between two
depot visits.  Its duration counts inter-target travel plus every service
time; the depot legs are added per vehicle when forming a trip.  Two
sequences over the same node set with the same unordered extreme pair are
interchangeable in any solution except for their duration, which yields the
domination relation used to keep pools small.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Optional

from .instance import EPS, Instance

ClassKey = tuple[frozenset[int], frozenset[int]]


@dataclass(frozen=True)
class TargetSequence:
    """Ordered targets with cached duration d_k."""

    nodes: tuple[int, ...]
    duration: float

    @property
    def first(self) -> int:
        return self.nodes[0]

    @property
    def last(self) -> int:
        return self.nodes[-1]

    @cached_property
    def class_key(self) -> ClassKey:
        """Domination class: (unordered node set, unordered extreme pair)."""
        return frozenset(self.nodes), frozenset((self.nodes[0], self.nodes[-1]))

    def __len__(self) -> int:
        return len(self.nodes)


class Dominance(Enum):
    STRICT = "STRICT"
    EQUAL = "EQUAL"
    NONE = "NONE"


def sequence_duration(instance: Instance, nodes: Iterable[int]) -> float:
    """d_k: inter-target travel plus all service times, in minutes."""
    nodes = list(nodes)
    if not nodes:
        raise ValueError("sequence must contain at least one target")
    if len(set(nodes)) != len(nodes):
        raise ValueError(f"sequence has repeated targets: {nodes}")
    total = 0.0
    for i in nodes:
        t = instance.target_by_id.get(i)
        if t is None:
            raise ValueError(f"unknown target id {i}")
        total += t.service_time
    for a, b in zip(nodes, nodes[1:]):
        total += instance.travel_time(a, b)
    return total


def make_sequence(instance: Instance, nodes: Iterable[int]) -> TargetSequence:
    nodes = tuple(nodes)
    return TargetSequence(nodes, sequence_duration(instance, nodes))


def extend_sequence(instance: Instance, seq: TargetSequence, target_id: int) -> TargetSequence:
    """Append one target; O(1) duration update."""
    extra = instance.travel_time(seq.last, target_id)
    extra += instance.target_by_id[target_id].service_time
    return TargetSequence(seq.nodes + (target_id,), seq.duration + extra)


def reversed_sequence(seq: TargetSequence) -> TargetSequence:
    """Same duration under symmetric travel times."""
    return TargetSequence(seq.nodes[::-1], seq.duration)


def trip_duration(instance: Instance, seq: TargetSequence, vehicle_id: int) -> float:
    """t_ku: sequence duration plus the two depot legs of vehicle u."""
    v = instance.vehicle_by_id.get(vehicle_id)
    if v is None:
        raise ValueError(f"unknown vehicle id {vehicle_id}")
    return (
        seq.duration
        + instance.travel_time(v.home_depot, seq.first)
        + instance.travel_time(seq.last, v.home_depot)
    )


def _depot_allowed(instance: Instance, seq: TargetSequence, depot: int) -> bool:
    if instance.territory is None:
        return True
    for i in seq.nodes:
        dep = instance.territory.get(i)
        if dep is not None and dep != depot:
            return False
    return True


def is_compatible(instance: Instance, seq: TargetSequence, vehicle_id: int) -> bool:
    """Whole-trip battery check, plus any territory restriction on the nodes."""
    v = instance.vehicle_by_id[vehicle_id]
    if not _depot_allowed(instance, seq, v.home_depot):
        return False
    return trip_duration(instance, seq, vehicle_id) <= v.budget + EPS


def compatible_vehicles(instance: Instance, seq: TargetSequence) -> list[int]:
    # Vehicles sharing (depot, budget) are equivalent here, so test one
    # representative per class.
    out: list[int] = []
    tt = instance.travel_time
    for dep, budget, vids in instance.vehicle_classes:
        if seq.duration + tt(dep, seq.first) + tt(seq.last, dep) > budget + EPS:
            continue
        if not _depot_allowed(instance, seq, dep):
            continue
        out.extend(vids)
    out.sort()
    return out


def is_feasible(instance: Instance, seq: TargetSequence) -> bool:
    tt = instance.travel_time
    for dep, budget, _ in instance.vehicle_classes:
        if seq.duration + tt(dep, seq.first) + tt(seq.last, dep) <= budget + EPS:
            if _depot_allowed(instance, seq, dep):
                return True
    return False


def dominates(a: TargetSequence, b: TargetSequence) -> Dominance:
    """Does `a` dominate `b`?  Only same-class sequences are comparable."""
    if a.class_key != b.class_key:
        return Dominance.NONE
    if a.duration < b.duration - EPS:
        return Dominance.STRICT
    if b.duration < a.duration - EPS:
        return Dominance.NONE
    return Dominance.EQUAL


class PoolCapExceeded(RuntimeError):
    """Full enumeration outgrew its cap; the instance needs the matheuristic."""


class PoolBuildTimeout(RuntimeError):
    """Pool construction hit its deadline before completing."""


class SequencePool:
    """Indexed store of feasible sequences with covering and compatibility maps.

    Sequence ids are assigned in insertion order and never reused, so
    iteration order is reproducible.  The class index may hold several
    equal-duration sequences of one class (typically a run and its
    reversal); it never holds a strictly dominated pair.  ``complete`` is
    False when a builder stopped early (cap or deadline).
    """

    def __init__(self, instance: Instance) -> None:
        self.instance = instance
        self.sequences: dict[int, TargetSequence] = {}
        self.covering: dict[int, dict[int, None]] = {t.id: {} for t in instance.targets}
        self.compatible: dict[int, tuple[int, ...]] = {}
        self._by_class: dict[ClassKey, list[int]] = {}
        self._next_id = 0
        self.complete = True

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self) -> Iterator[int]:
        return iter(self.sequences)

    def get(self, sid: int) -> TargetSequence:
        return self.sequences[sid]

    def add(self, seq: TargetSequence, vehicles: Optional[list[int]] = None) -> int:
        if vehicles is None:
            vehicles = compatible_vehicles(self.instance, seq)
        if not vehicles:
            raise ValueError("refusing to store a sequence with no compatible vehicle")
        sid = self._next_id
        self._next_id += 1
        self.sequences[sid] = seq
        self.compatible[sid] = tuple(vehicles)
        for i in seq.nodes:
            self.covering[i][sid] = None
        self._by_class.setdefault(seq.class_key, []).append(sid)
        return sid

    def remove(self, sid: int) -> None:
        seq = self.sequences.pop(sid)
        del self.compatible[sid]
        for i in seq.nodes:
            del self.covering[i][sid]
        ids = self._by_class[seq.class_key]
        ids.remove(sid)
        if not ids:
            del self._by_class[seq.class_key]

    def covering_of(self, target_id: int) -> list[int]:
        return list(self.covering[target_id])

    def class_sids(self, key: ClassKey) -> list[int]:
        return list(self._by_class.get(key, ()))

    def best_of_class(self, key: ClassKey) -> Optional[int]:
        """Lowest-duration sequence of the class; incumbent wins ties."""
        ids = self._by_class.get(key)
        if not ids:
            return None
        best = ids[0]
        for sid in ids[1:]:
            if self.sequences[sid].duration < self.sequences[best].duration - EPS:
                best = sid
        return best

    def class_keys(self) -> set[ClassKey]:
        return set(self._by_class)

    def uncovered_targets(self) -> list[int]:
        return [i for i, ids in self.covering.items() if not ids]

    def dump_lines(self) -> list[str]:
        """One line per sequence: "id; node list; d_k; compatible vehicle ids"."""
        out = []
        for sid, seq in self.sequences.items():
            nodes = " ".join(str(i) for i in seq.nodes)
            vids = " ".join(str(v) for v in self.compatible[sid])
            out.append(f"{sid}; {nodes}; {seq.duration:.9f}; {vids}")
        return out


def _max_budget(instance: Instance) -> float:
    return max(v.budget for v in instance.vehicles)


def enumerate_all_feasible(
    instance: Instance,
    cap: Optional[int] = None,
    deadline: Optional[float] = None,
    partial_ok: bool = False,
) -> SequencePool:
    """Every feasible sequence class, one minimum-duration representative each.

    Classes are enumerated by dynamic programming over (node set, extreme
    pair) states, extending a stored ordering at either end; this finds the
    true class minimum without walking all orderings.  On metric instances a
    state with no compatible vehicle is pruned because appending a target
    can only lengthen every trip; otherwise only the d_k <= max budget bound
    prunes, and infeasible intermediate states are kept for extension but
    not emitted.

    ``cap`` bounds the number of stored states; exceeding it raises
    PoolCapExceeded (or, with partial_ok, returns what was built with
    ``complete = False``).  ``deadline`` (time.monotonic value) behaves the
    same way with PoolBuildTimeout.
    """
    pool = SequencePool(instance)
    ids = instance.targets_sorted
    n = len(ids)
    if n == 0:
        return pool
    metric = instance.is_metric

    # Dense per-bit working data: target-target travel, service times, and one
    # (budget slack, allowed mask) row per vehicle class.
    tt = instance.travel_time
    tmat = [[tt(a, b) for b in ids] for a in ids]
    svc = [instance.target_by_id[i].service_time for i in ids]
    bmax = _max_budget(instance)
    classes = []
    for dep, budget, _ in instance.vehicle_classes:
        legs = [tt(dep, i) for i in ids]
        allowed = 0
        for b, i in enumerate(ids):
            home = instance.allowed_depot(i)
            if home is None or home == dep:
                allowed |= 1 << b
        classes.append((budget, legs, allowed))

    def feasible_state(mask: int, e1: int, e2: int, dur: float) -> bool:
        for budget, legs, allowed in classes:
            if mask & ~allowed:
                continue
            if dur + legs[e1] + legs[e2] <= budget + EPS:
                return True
        return False

    # One state per (node set, extreme pair); value keeps the cheapest known
    # ordering.  Extending a stored ordering from either end reaches every
    # class at its true minimum duration.
    bit = instance.target_bit
    wave: dict[tuple[int, int], tuple[float, tuple[int, ...]]] = {}
    total = 0

    def flush(states) -> None:
        for (mask, _), (dur, nodes) in states.items():
            if metric or feasible_state(
                mask, instance.target_bit[nodes[0]], instance.target_bit[nodes[-1]], dur
            ):
                pool.add(TargetSequence(nodes, dur))

    def stop_early(exc: Exception, pending) -> SequencePool:
        if not partial_ok:
            raise exc
        flush(pending)
        pool.complete = False
        return pool

    for b, i in enumerate(ids):
        dur = svc[b]
        if dur > bmax + EPS:
            continue
        if metric and not feasible_state(1 << b, b, b, dur):
            continue
        if cap is not None and total >= cap:
            return stop_early(PoolCapExceeded(f"sequence classes exceed cap {cap}"), wave)
        wave[(1 << b, b * n + b)] = (dur, (i,))
        total += 1

    while wave:
        flush(wave)
        nxt: dict[tuple[int, int], tuple[float, tuple[int, ...]]] = {}
        for (mask, _), (dur, nodes) in wave.items():
            if deadline is not None and time.monotonic() > deadline:
                return stop_early(PoolBuildTimeout("enumeration deadline reached"), nxt)
            head, tail0 = bit[nodes[0]], bit[nodes[-1]]
            ends = ((head, tail0, nodes),)
            if head != tail0:
                ends += ((tail0, head, nodes[::-1]),)
            for far, tail, ordered in ends:
                row = tmat[tail]
                for j in range(n):
                    jb = 1 << j
                    if mask & jb:
                        continue
                    ndur = dur + row[j] + svc[j]
                    if ndur > bmax + EPS:
                        continue
                    nmask = mask | jb
                    if metric and not feasible_state(nmask, far, j, ndur):
                        continue
                    lo, hi = (far, j) if far < j else (j, far)
                    key = (nmask, lo * n + hi)
                    cur = nxt.get(key)
                    if cur is None:
                        if cap is not None and total >= cap:
                            return stop_early(
                                PoolCapExceeded(f"sequence classes exceed cap {cap}"), nxt
                            )
                        nxt[key] = (ndur, ordered + (ids[j],))
                        total += 1
                    elif ndur < cur[0] - EPS:
                        nxt[key] = (ndur, ordered + (ids[j],))
        wave = nxt
    return pool


@dataclass
class PoolGenerationStats:
    """Counters from one generate_heuristic_pool run."""

    insertions: int = 0
    children_generated: int = 0
    dropped_budget: int = 0
    dropped_incompatible: int = 0
    dropped_dominated: int = 0
    ties_expanded: int = 0
    evictions: int = 0
    max_evictions_per_child: int = 0
    cap_hit: bool = False


def _neighbor_ranking(instance: Instance) -> dict[int, list[int]]:
    """For each target, the other targets sorted by travel time then id."""
    ids = sorted(instance.target_by_id)
    return {
        i: sorted((j for j in ids if j != i), key=lambda j: (instance.travel_time(i, j), j))
        for i in ids
    }


def generate_heuristic_pool(
    instance: Instance, nc: int = 3, kmax: int = 200_000
) -> tuple[SequencePool, PoolGenerationStats]:
    """Bounded breadth-first pool expansion.

    Seeds every feasible singleton into the pool and a FIFO queue, then
    repeatedly pops a sequence and appends each of the ``nc`` nearest
    not-yet-visited targets to its last node.  A child is dropped when its
    duration exceeds the largest budget or when no vehicle can fly it.
    Domination then decides storage only: a child whose class already holds
    a strictly shorter sequence is not stored, a child strictly shorter
    than the stored one evicts it, and an exact tie keeps the incumbent.

    Losing the storage decision does not remove a child from expansion.
    A dominated or tied child often runs the shared node set in the other
    direction, and only expanding it reaches the classes that hang off its
    own last node.  Expanding every such child verbatim would enumerate
    every ordering, so the queue admits one sequence per (node set, end
    pair, last node) state: the shortest known.  Any sequence losing that
    race produces children pointwise longer than the winner's, so skipping
    it never changes which duration a class ends up storing.  Evicted
    sequences already in the queue still get expanded; eviction only
    removes them from the pool.

    Generation stops once ``kmax`` insertions into the pool (seeds
    included, queue-only expansions excluded) have happened or the queue
    drains.
    """
    n = len(instance.targets)
    if nc < 1:
        raise ValueError("nc must be >= 1")
    if kmax < n:
        raise ValueError(f"kmax must cover the {n} singleton seeds")

    pool = SequencePool(instance)
    stats = PoolGenerationStats()
    bmax = _max_budget(instance)
    neighbors = _neighbor_ranking(instance)
    queue: deque[TargetSequence] = deque()
    frontier: dict[tuple[ClassKey, int], float] = {}

    def enqueue(seq: TargetSequence) -> bool:
        state = (seq.class_key, seq.last)
        best = frontier.get(state)
        if best is not None and seq.duration >= best - EPS:
            return False
        frontier[state] = seq.duration
        queue.append(seq)
        return True

    def insert(seq: TargetSequence, vehicles: list[int]) -> None:
        pool.add(seq, vehicles)
        enqueue(seq)
        stats.insertions += 1
        if stats.insertions >= kmax:
            stats.cap_hit = True

    for t in sorted(instance.target_by_id):
        if stats.cap_hit:
            break
        s = make_sequence(instance, (t,))
        vehicles = compatible_vehicles(instance, s)
        if vehicles:
            insert(s, vehicles)

    while queue and not stats.cap_hit:
        seq = queue.popleft()
        if seq.duration > frontier[(seq.class_key, seq.last)] + EPS:
            continue
        members = set(seq.nodes)
        emitted = 0
        for j in neighbors[seq.last]:
            if emitted >= nc:
                break
            if j in members:
                continue
            emitted += 1
            stats.children_generated += 1
            child = extend_sequence(instance, seq, j)
            if child.duration > bmax + EPS:
                stats.dropped_budget += 1
                continue
            vehicles = compatible_vehicles(instance, child)
            if not vehicles:
                stats.dropped_incompatible += 1
                continue
            rivals = pool.class_sids(child.class_key)
            assert len(rivals) <= 1, "pool holds one sequence per class"
            if rivals:
                verdict = dominates(child, pool.get(rivals[0]))
                if verdict is Dominance.NONE:
                    stats.dropped_dominated += 1
                    enqueue(child)
                    continue
                if verdict is Dominance.EQUAL:
                    if enqueue(child):
                        stats.ties_expanded += 1
                    continue
                pool.remove(rivals[0])
                stats.evictions += 1
                stats.max_evictions_per_child = max(stats.max_evictions_per_child, 1)
            insert(child, vehicles)
            if stats.cap_hit:
                break
    return pool, stats
