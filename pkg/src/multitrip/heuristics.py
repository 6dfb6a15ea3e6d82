"""Constructive heuristics and the pool-based matheuristic.

Three solvers share the SolveOutcome interface of the exact module:

* solve_matheuristic builds a bounded sequence pool and lets the exact
  branch-and-bound pick the best plan available inside it, warm started
  with the greedy solution.
* solve_h_tsp partitions the unserved targets with a spanning tree rooted
  at the vehicles and turns each vehicle's subtree into one budget-feasible
  trip per round.
* solve_h_greedy grows one cycle per vehicle, always letting the vehicle
  with the smallest accumulated load act next.

The constructive heuristics carry no optimality certificate, so their
outcomes report FEASIBLE_TIME_LIMIT with a trivial lower bound of zero.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

from .exact import Objective, Solution, SolveOutcome, SolveStatus, solve_exact
from .instance import EPS, Instance, Vehicle, _vehicle_allowed, singleton_trip_time
from .sequences import (
    PoolGenerationStats,
    SequencePool,
    extend_sequence,
    generate_heuristic_pool,
    make_sequence,
    trip_duration,
)


@dataclass(frozen=True)
class MatheuristicParams:
    """Knobs of the pool-based solver.

    ``nc`` caps how many nearest neighbours each queued sequence is extended
    with, ``kmax`` caps the number of pool insertions, and ``time_limit``
    (seconds) covers the whole pipeline: pool construction plus the exact
    solve over the pool.
    """

    nc: int = 3
    kmax: int = 200_000
    time_limit: Optional[float] = None

    def __post_init__(self) -> None:
        if self.nc < 1:
            raise ValueError("nc must be at least 1")
        if self.kmax < 1:
            raise ValueError("kmax must be at least 1")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


def matheuristic_pipeline(
    instance: Instance,
    params: Optional[MatheuristicParams] = None,
    objective: Objective = Objective.COMPLETION_TIME,
) -> tuple[SolveOutcome, SequencePool, PoolGenerationStats]:
    """Run the full pipeline and expose the pool next to the outcome.

    The benchmark harness records pool size and cap hits per run, so the
    pipeline returns them; ``solve_matheuristic`` is the plain facade.
    """
    if params is None:
        params = MatheuristicParams()
    t0 = time.perf_counter()
    pool, stats = generate_heuristic_pool(instance, nc=params.nc, kmax=params.kmax)
    missing = pool.uncovered_targets()
    assert not missing, f"pool misses targets {sorted(missing)}; preprocess the instance first"

    warm = solve_h_greedy(instance).solution
    remaining = None
    if params.time_limit is not None:
        remaining = max(0.0, params.time_limit - (time.perf_counter() - t0))
    outcome = solve_exact(
        pool, instance, objective, time_limit=remaining, warm_start=warm
    )
    outcome.wall_time = time.perf_counter() - t0
    return outcome, pool, stats


def solve_matheuristic(
    instance: Instance,
    params: Optional[MatheuristicParams] = None,
    objective: Objective = Objective.COMPLETION_TIME,
) -> SolveOutcome:
    """Pool construction followed by the exact solve over that pool.

    The objective value is an upper bound on the true optimum because the
    pool holds a subset of all feasible sequences; with ``nc >= n - 1`` and
    unbounded ``kmax`` the pool is complete and the result is the optimum.
    """
    outcome, _, _ = matheuristic_pipeline(instance, params, objective)
    return outcome


def _finish(instance: Instance, assignments: list[tuple], t0: float) -> SolveOutcome:
    loads = {v.id: 0.0 for v in instance.vehicles}
    for seq, vid in assignments:
        loads[vid] += trip_duration(instance, seq, vid)
    tau = max(loads.values(), default=0.0)
    solution = Solution(assignments, loads, tau, tau)
    return SolveOutcome(
        SolveStatus.FEASIBLE_TIME_LIMIT, solution, 0.0, 0, time.perf_counter() - t0
    )


def _can_serve_alone(instance: Instance, target_id: int, vehicle: Vehicle) -> bool:
    if not _vehicle_allowed(instance, target_id, vehicle):
        return False
    return singleton_trip_time(instance, target_id, vehicle) <= vehicle.budget + EPS


# ---------------------------------------------------------------------------
# Spanning-tree heuristic


def _prim_forest(
    instance: Instance, vehicles: list[Vehicle], unserved: list[int]
) -> dict[int, list[int]]:
    """Partition ``unserved`` among the vehicles via one spanning tree.

    A dummy root connects to every vehicle with weight zero, vehicles reach
    targets from their home depot, and targets connect by travel time, so
    Prim grows each vehicle's subtree out of proximity.  Returns, per
    vehicle id, the subtree targets in depth-first preorder visiting the
    nearest child first.
    """
    m, q = len(vehicles), len(unserved)
    size = 1 + m + q

    def weight(i: int, j: int) -> float:
        if i > j:
            i, j = j, i
        if i == 0:
            return 0.0 if j <= m else math.inf
        if j <= m:  # both vehicles
            return math.inf
        b = unserved[j - 1 - m]
        a = vehicles[i - 1].home_depot if i <= m else unserved[i - 1 - m]
        return instance.travel_time(a, b)

    in_tree = [False] * size
    key = [math.inf] * size
    parent = [-1] * size
    key[0] = 0.0
    for _ in range(size):
        u = min((i for i in range(size) if not in_tree[i]), key=lambda i: (key[i], i))
        in_tree[u] = True
        for j in range(size):
            if not in_tree[j]:
                w = weight(u, j)
                if w < key[j]:
                    key[j] = w
                    parent[j] = u

    children: list[list[int]] = [[] for _ in range(size)]
    for j in range(1, size):
        children[parent[j]].append(j)
    for lst in children:
        lst.sort(key=lambda j: (key[j], j))

    order: dict[int, list[int]] = {v.id: [] for v in vehicles}
    for vi, v in enumerate(vehicles, start=1):
        stack = list(reversed(children[vi]))
        while stack:
            node = stack.pop()
            order[v.id].append(unserved[node - 1 - m])
            stack.extend(reversed(children[node]))
    return order


def solve_h_tsp(instance: Instance) -> SolveOutcome:
    """Tree-partition heuristic: one trip per vehicle per round.

    Every round rebuilds the spanning forest over the still-unserved
    targets, shortcuts each vehicle's subtree into a tour by preorder, and
    truncates that tour to the longest budget-feasible prefix.  Targets the
    vehicle cannot fit as the opening stop are skipped for later rounds; a
    round that serves nothing falls back to one singleton trip so progress
    is guaranteed.
    """
    t0 = time.perf_counter()
    vehicles = sorted(instance.vehicles, key=lambda v: v.id)
    loads = {v.id: 0.0 for v in vehicles}
    unserved = list(instance.targets_sorted)
    assignments: list[tuple] = []

    while unserved:
        served_this_round = 0
        order = _prim_forest(instance, vehicles, unserved)
        for v in vehicles:
            seq = None
            for tid in order[v.id]:
                if _vehicle_allowed(instance, tid, v):
                    candidate = (
                        make_sequence(instance, [tid])
                        if seq is None
                        else extend_sequence(instance, seq, tid)
                    )
                    if trip_duration(instance, candidate, v.id) <= v.budget + EPS:
                        seq = candidate
                        continue
                if seq is not None:
                    break  # trip is full; the rest waits for the next round
            if seq is not None:
                assignments.append((seq, v.id))
                loads[v.id] += trip_duration(instance, seq, v.id)
                for tid in seq.nodes:
                    unserved.remove(tid)
                served_this_round += len(seq)

        if served_this_round == 0 and unserved:
            tid = unserved[0]
            options = [v for v in vehicles if _can_serve_alone(instance, tid, v)]
            assert options, "preprocessing keeps only targets someone can reach"
            v = min(
                options,
                key=lambda v: (loads[v.id] + singleton_trip_time(instance, tid, v), v.id),
            )
            seq = make_sequence(instance, [tid])
            assignments.append((seq, v.id))
            loads[v.id] += trip_duration(instance, seq, v.id)
            unserved.remove(tid)
            served_this_round = 1
        assert served_this_round >= 1, "every round must serve at least one target"

    return _finish(instance, assignments, t0)


# ---------------------------------------------------------------------------
# Least-loaded greedy


def solve_h_greedy(instance: Instance) -> SolveOutcome:
    """Grow one cycle per vehicle, least-loaded vehicle acting next.

    The acting vehicle extends its open cycle with the nearest unserved
    target that still allows the full cycle, return leg included, within
    its budget.  When nothing fits the cycle closes into a trip; a vehicle
    whose empty cycle cannot take any remaining target retires.  A
    vehicle's load counts its closed trips plus the elapsed time of the
    open cycle, so the acting order mirrors the progression of real time.
    """
    t0 = time.perf_counter()
    unserved = list(instance.targets_sorted)
    assignments: list[tuple] = []
    loads = {v.id: 0.0 for v in instance.vehicles}
    cycle: dict[int, list[int]] = {v.id: [] for v in instance.vehicles}
    elapsed = {v.id: 0.0 for v in instance.vehicles}
    active = sorted(loads)

    def close(vid: int) -> None:
        seq = make_sequence(instance, cycle[vid])
        assignments.append((seq, vid))
        loads[vid] += trip_duration(instance, seq, vid)
        cycle[vid] = []
        elapsed[vid] = 0.0

    while unserved and active:
        vid = min(active, key=lambda u: (loads[u] + elapsed[u], u))
        v = instance.vehicle_by_id[vid]
        pos = cycle[vid][-1] if cycle[vid] else v.home_depot
        best = None
        for tid in unserved:
            if not _vehicle_allowed(instance, tid, v):
                continue
            leg = instance.travel_time(pos, tid)
            total = (
                elapsed[vid]
                + leg
                + instance.target_by_id[tid].service_time
                + instance.travel_time(tid, v.home_depot)
            )
            if total <= v.budget + EPS and (best is None or (leg, tid) < best[:2]):
                best = (leg, tid)
        if best is not None:
            leg, tid = best
            cycle[vid].append(tid)
            elapsed[vid] += leg + instance.target_by_id[tid].service_time
            unserved.remove(tid)
        elif cycle[vid]:
            close(vid)
        else:
            active.remove(vid)

    for vid in sorted(cycle):
        if cycle[vid]:
            close(vid)
    assert not unserved, "preprocessing keeps only targets someone can reach"
    return _finish(instance, assignments, t0)
