"""Exact optimization over a sequence pool.

Selects a subset of pool sequences that partitions the targets and assigns
each selected sequence to a compatible vehicle, minimizing either the fleet
completion time (makespan over vehicle loads) or the total travel distance.
The search is a depth-first branch-and-bound over (sequence, vehicle)
commitments with admissible lower bounds, dominance memoization on covered
target sets, and symmetry reduction across identical vehicles.  With no time
limit the result is provably optimal for the given pool.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from .instance import EPS, Instance
from .sequences import (
    SequencePool,
    TargetSequence,
    compatible_vehicles,
    make_sequence,
    trip_duration,
)

# Prune margin: a subtree is cut when its bound is within this of the
# incumbent, so the reported optimum can exceed the true one by at most 1e-9.
_CUT = 1e-9


class Objective(Enum):
    COMPLETION_TIME = "ct"
    TOTAL_TRAVEL_DISTANCE = "td"


class SolveStatus(Enum):
    OPTIMAL = "OPTIMAL"
    FEASIBLE_TIME_LIMIT = "FEASIBLE_TIME_LIMIT"
    INFEASIBLE = "INFEASIBLE"
    POOL_INSUFFICIENT = "POOL_INSUFFICIENT"


@dataclass
class Solution:
    """A full covering plan: every target in exactly one assigned trip."""

    assignments: list[tuple[TargetSequence, int]]
    loads: dict[int, float]
    tau: float
    objective_value: float

    @property
    def trips(self) -> int:
        return len(self.assignments)


@dataclass
class SolveOutcome:
    status: SolveStatus
    solution: Optional[Solution]
    best_lower_bound: float
    nodes_explored: int
    wall_time: float

    @property
    def objective_value(self) -> Optional[float]:
        return None if self.solution is None else self.solution.objective_value


def total_travel_distance(solution: Solution, instance: Instance) -> float:
    """Pure travel time over all trips, service excluded, recomputed per leg."""
    total = 0.0
    for seq, vid in solution.assignments:
        v = instance.vehicle_by_id[vid]
        nodes = seq.nodes
        total += instance.travel_time(v.home_depot, nodes[0])
        for a, b in zip(nodes, nodes[1:]):
            total += instance.travel_time(a, b)
        total += instance.travel_time(nodes[-1], v.home_depot)
    return total


def solution_to_dict(instance: Instance, solution: Solution) -> dict:
    trips = []
    for seq, vid in solution.assignments:
        trips.append(
            {
                "vehicle": vid,
                "sequence": list(seq.nodes),
                "duration_min": trip_duration(instance, seq, vid),
            }
        )
    trips.sort(key=lambda t: (t["vehicle"], t["sequence"]))
    return {"tau_min": solution.tau, "trips": trips}


def solution_from_dict(instance: Instance, data: Mapping) -> Solution:
    """Rebuild a solution as declared; validation happens separately."""
    try:
        assignments = []
        loads: dict[int, float] = {v.id: 0.0 for v in instance.vehicles}
        for trip in data["trips"]:
            seq = make_sequence(instance, trip["sequence"])
            vid = int(trip["vehicle"])
            assignments.append((seq, vid))
            loads[vid] = loads.get(vid, 0.0) + float(trip["duration_min"])
        tau = float(data["tau_min"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed solution document: {exc}") from None
    return Solution(assignments, loads, tau, tau)


def _rebuild_solution(
    instance: Instance, assignments: list[tuple[TargetSequence, int]], objective: Objective
) -> Solution:
    loads = {v.id: 0.0 for v in instance.vehicles}
    for seq, vid in assignments:
        loads[vid] += trip_duration(instance, seq, vid)
    tau = max(loads.values(), default=0.0)
    sol = Solution(list(assignments), loads, tau, tau)
    if objective is Objective.TOTAL_TRAVEL_DISTANCE:
        sol.objective_value = total_travel_distance(sol, instance)
    return sol


class _PoolIndex:
    """Dense arrays over a pool for the search loops."""

    def __init__(self, pool: SequencePool, instance: Instance, objective: Objective):
        self.instance = instance
        self.pool = pool
        bit = instance.target_bit
        tids = instance.targets_sorted
        self.n = len(tids)
        self.full_mask = (1 << self.n) - 1

        vids = sorted(instance.vehicle_by_id)
        self.vids = vids
        uidx = {vid: i for i, vid in enumerate(vids)}
        self.nu = len(vids)
        class_of = [0] * self.nu
        self.class_groups: list[list[int]] = []
        for ci, (_, _, members) in enumerate(instance.vehicle_classes):
            group = []
            for vid in members:
                class_of[uidx[vid]] = ci
                group.append(uidx[vid])
            self.class_groups.append(sorted(group))
        self.class_of = class_of

        svc = {t.id: t.service_time for t in instance.targets}
        self.sids = list(pool.sequences)
        pos_of = {sid: p for p, sid in enumerate(self.sids)}
        m = len(self.sids)
        self.mask = [0] * m
        self.trips: list[tuple[tuple[int, float], ...]] = [()] * m
        self.best_travel = [math.inf] * m
        self.best_travel_u = [0] * m
        self.svc_sum = [0.0] * m
        mu = [math.inf] * self.n

        tt = instance.travel_time
        depot_of = {vid: instance.vehicle_by_id[vid].home_depot for vid in vids}
        for sid in self.sids:
            p = pos_of[sid]
            seq = pool.sequences[sid]
            msk = 0
            ssum = 0.0
            for i in seq.nodes:
                msk |= 1 << bit[i]
                ssum += svc[i]
            self.mask[p] = msk
            self.svc_sum[p] = ssum
            base_travel = seq.duration - ssum
            pairs = []
            bt, btu = math.inf, 0
            for vid in pool.compatible[sid]:
                dep = depot_of[vid]
                legs = tt(dep, seq.first) + tt(seq.last, dep)
                pairs.append((uidx[vid], seq.duration + legs))
                trav = base_travel + legs
                if trav < bt - EPS:
                    bt, btu = trav, uidx[vid]
            pairs.sort(key=lambda q: (q[1], q[0]))
            self.trips[p] = tuple(pairs)
            self.best_travel[p] = bt
            self.best_travel_u[p] = btu
            share = bt / len(seq.nodes)
            for i in seq.nodes:
                b = bit[i]
                if share < mu[b]:
                    mu[b] = share
        self.mu = mu

        # Per-sequence tail mass for the averaged load bound: service plus the
        # cheapest travel share of every node, both of which any completion
        # must still pay.
        self.mass = [0.0] * m
        self.mu_mass = [0.0] * m
        for p, sid in enumerate(self.sids):
            seq = pool.sequences[sid]
            tot = musum = 0.0
            for i in seq.nodes:
                b = bit[i]
                tot += svc[i] + mu[b]
                musum += mu[b]
            self.mass[p] = tot
            self.mu_mass[p] = musum

        # Covering lists as dense positions, sorted cheapest-option-first.
        if objective is Objective.COMPLETION_TIME:
            key = lambda p: (self.trips[p][0][1] if self.trips[p] else math.inf, p)
        else:
            key = lambda p: (self.best_travel[p], p)
        self.cover: list[list[int]] = [[] for _ in range(self.n)]
        for i in tids:
            b = bit[i]
            self.cover[b] = sorted((pos_of[s] for s in pool.covering[i]), key=key)
        self.branch_order = sorted(range(self.n), key=lambda b: (len(self.cover[b]), b))

        # Admissible per-(target, vehicle) floor on the duration of any trip
        # that serves the target: the singleton trip on metric instances,
        # otherwise the cheapest covering trip actually in the pool.
        self.tail = [[math.inf] * self.nu for _ in range(self.n)]
        if instance.is_metric:
            for b, i in enumerate(tids):
                dep_req = instance.allowed_depot(i)
                for vid in vids:
                    dep = depot_of[vid]
                    if dep_req is not None and dep_req != dep:
                        continue
                    self.tail[b][uidx[vid]] = 2.0 * tt(dep, i) + svc[i]
        else:
            for p, sid in enumerate(self.sids):
                seq = pool.sequences[sid]
                for u, t in self.trips[p]:
                    for i in seq.nodes:
                        b = bit[i]
                        if t < self.tail[b][u]:
                            self.tail[b][u] = t


def _empty_solution(instance: Instance) -> Solution:
    return Solution([], {v.id: 0.0 for v in instance.vehicles}, 0.0, 0.0)


def solve_exact(
    pool: SequencePool,
    instance: Instance,
    objective: Objective = Objective.COMPLETION_TIME,
    time_limit: Optional[float] = None,
    warm_start: Optional[Solution] = None,
) -> SolveOutcome:
    """Branch-and-bound over the pool; optimal when it runs to completion.

    ``warm_start`` seeds the incumbent with an externally built solution
    (whose trips need not come from the pool); the search then proves either
    that nothing in the pool beats it or finds something better.  With a
    time limit the incumbent and the weakest still-open node bound are
    returned; the bound is valid for the search space pool-plus-warm-start.
    """
    t0 = time.perf_counter()
    uncovered = pool.uncovered_targets()
    if uncovered:
        return SolveOutcome(
            SolveStatus.POOL_INSUFFICIENT, None, 0.0, 0, time.perf_counter() - t0
        )
    if not instance.targets:
        return SolveOutcome(
            SolveStatus.OPTIMAL, _empty_solution(instance), 0.0, 1, time.perf_counter() - t0
        )

    idx = _PoolIndex(pool, instance, objective)
    deadline = None if time_limit is None else t0 + time_limit

    if objective is Objective.COMPLETION_TIME:
        result = _search_ct(idx, deadline, warm_start)
    else:
        result = _search_td(idx, deadline, warm_start)
    best_obj, best_sel, used_warm, lower, nodes, completed = result

    wall = time.perf_counter() - t0
    if best_obj is None:
        if completed:
            return SolveOutcome(SolveStatus.INFEASIBLE, None, math.inf, nodes, wall)
        return SolveOutcome(SolveStatus.FEASIBLE_TIME_LIMIT, None, lower, nodes, wall)

    if used_warm:
        solution = _rebuild_solution(instance, warm_start.assignments, objective)
    else:
        assignments = [(pool.sequences[idx.sids[p]], idx.vids[u]) for p, u in best_sel]
        assignments.sort(key=lambda a: (a[1], a[0].nodes))
        solution = _rebuild_solution(instance, assignments, objective)

    if completed:
        return SolveOutcome(
            SolveStatus.OPTIMAL, solution, solution.objective_value, nodes, wall
        )
    return SolveOutcome(
        SolveStatus.FEASIBLE_TIME_LIMIT,
        solution,
        min(lower, solution.objective_value),
        nodes,
        wall,
    )


def _search_ct(idx: _PoolIndex, deadline, warm_start):
    instance = idx.instance
    n, nu = idx.n, idx.nu
    full = idx.full_mask
    cover, mask, trips, mass = idx.cover, idx.mask, idx.trips, idx.mass
    tail, class_of, branch_order = idx.tail, idx.class_of, idx.branch_order
    class_groups = idx.class_groups

    loads = [0.0] * nu
    chosen: list[tuple[int, int]] = []

    ub = math.inf
    best_sel: Optional[list[tuple[int, int]]] = None
    best_key: Optional[tuple] = None
    used_warm = False
    if warm_start is not None:
        wloads = {v.id: 0.0 for v in instance.vehicles}
        for seq, vid in warm_start.assignments:
            wloads[vid] += trip_duration(instance, seq, vid)
        ub = max(wloads.values(), default=0.0)
        used_warm = True

    total_mass = sum(
        idx.instance.target_by_id[i].service_time + idx.mu[b]
        for b, i in enumerate(idx.instance.targets_sorted)
    )
    nodes_explored = 0
    timed_out = False
    open_min = math.inf

    def rec(covered: int, sum_loads: float, unc_mass: float) -> None:
        nonlocal nodes_explored, ub, best_sel, best_key, used_warm, timed_out, open_min
        nodes_explored += 1
        if timed_out:
            return
        if deadline is not None and nodes_explored & 255 == 0:
            if time.perf_counter() > deadline:
                timed_out = True
                return

        if covered == full:
            obj = max(loads)
            key = tuple(sorted(p for p, _ in chosen))
            if obj < ub - _CUT or (
                obj <= ub + _CUT and (best_key is None or key < best_key)
            ):
                ub = min(ub, obj)
                best_sel = list(chosen)
                best_key = key
                used_warm = False
            return

        for b in branch_order:
            if not covered >> b & 1:
                target = b
                break

        maxload = max(loads)
        trow = tail[target]
        t3 = min(loads[u] + trow[u] for u in range(nu))
        bound = maxload
        avg = (sum_loads + unc_mass) / nu
        if avg > bound:
            bound = avg
        if t3 > bound:
            bound = t3
        if bound >= ub - _CUT:
            return

        canon = tuple(
            x for grp in class_groups for x in sorted(loads[u] for u in grp)
        )
        bucket = memo.get(covered)
        if bucket is None:
            memo[covered] = [canon]
        else:
            for old in bucket:
                if all(o <= c + _CUT for o, c in zip(old, canon)):
                    return
            bucket[:] = [o for o in bucket if not all(c <= x for c, x in zip(canon, o))]
            bucket.append(canon)

        my_bound = bound
        for p in cover[target]:
            m = mask[p]
            if m & covered:
                continue
            pm = mass[p]
            options = sorted(trips[p], key=lambda q: (loads[q[0]] + q[1], q[0]))
            seen: set[tuple[int, float]] = set()
            for u, t in options:
                prev = loads[u]
                state = (class_of[u], prev)
                if state in seen:
                    continue
                seen.add(state)
                if prev + t >= ub - _CUT:
                    continue
                loads[u] = prev + t
                chosen.append((p, u))
                rec(covered | m, sum_loads + t, unc_mass - pm)
                chosen.pop()
                loads[u] = prev
                if timed_out:
                    open_min = min(open_min, my_bound)
                    return

    memo: dict[int, list[tuple]] = {}
    first = branch_order[0]
    root_bound = max(total_mass / nu, min(tail[first][u] for u in range(nu)))
    rec(0, 0.0, total_mass)
    completed = not timed_out
    if open_min == math.inf and timed_out:
        open_min = root_bound
    if best_sel is None and not used_warm:
        return None, None, False, open_min, nodes_explored, completed
    return ub, best_sel, used_warm, min(open_min, ub), nodes_explored, completed


def _search_td(idx: _PoolIndex, deadline, warm_start):
    instance = idx.instance
    full = idx.full_mask
    cover, mask = idx.cover, idx.mask
    best_travel, best_u = idx.best_travel, idx.best_travel_u
    mu_mass, branch_order = idx.mu_mass, idx.branch_order

    chosen: list[tuple[int, int]] = []
    ub = math.inf
    best_sel: Optional[list[tuple[int, int]]] = None
    best_key: Optional[tuple] = None
    used_warm = False
    if warm_start is not None:
        ub = total_travel_distance(warm_start, instance)
        used_warm = True

    total_mu = sum(m for m in idx.mu)
    nodes_explored = 0
    timed_out = False
    open_min = math.inf
    memo: dict[int, float] = {}

    def rec(covered: int, trav: float, unc_mu: float) -> None:
        nonlocal nodes_explored, ub, best_sel, best_key, used_warm, timed_out, open_min
        nodes_explored += 1
        if timed_out:
            return
        if deadline is not None and nodes_explored & 255 == 0:
            if time.perf_counter() > deadline:
                timed_out = True
                return

        if covered == full:
            key = tuple(sorted(p for p, _ in chosen))
            if trav < ub - _CUT or (
                trav <= ub + _CUT and (best_key is None or key < best_key)
            ):
                ub = min(ub, trav)
                best_sel = list(chosen)
                best_key = key
                used_warm = False
            return

        bound = trav + unc_mu
        if bound >= ub - _CUT:
            return
        old = memo.get(covered)
        if old is not None and old <= trav + _CUT:
            return
        memo[covered] = trav

        for b in branch_order:
            if not covered >> b & 1:
                target = b
                break

        for p in cover[target]:
            m = mask[p]
            if m & covered:
                continue
            nt = trav + best_travel[p]
            if nt + unc_mu - mu_mass[p] >= ub - _CUT:
                continue
            chosen.append((p, best_u[p]))
            rec(covered | m, nt, unc_mu - mu_mass[p])
            chosen.pop()
            if timed_out:
                open_min = min(open_min, bound)
                return

    rec(0, 0.0, total_mu)
    completed = not timed_out
    if open_min == math.inf and timed_out:
        open_min = total_mu
    if best_sel is None and not used_warm:
        return None, None, False, open_min, nodes_explored, completed
    return ub, best_sel, used_warm, min(open_min, ub), nodes_explored, completed


def assign_min_makespan(
    selected: list[TargetSequence], instance: Instance
) -> tuple[list[int], float]:
    """Optimal makespan assignment of fixed sequences to compatible vehicles.

    Unrelated-machines scheduling with eligibility, solved by a small
    branch-and-bound in longest-trip-first order with symmetry skipping over
    identical vehicles.  Returns vehicle ids aligned with ``selected`` and
    the optimal max load.
    """
    vids = sorted(instance.vehicle_by_id)
    uidx = {vid: i for i, vid in enumerate(vids)}
    nu = len(vids)
    class_of = [0] * nu
    for ci, (_, _, members) in enumerate(instance.vehicle_classes):
        for vid in members:
            class_of[uidx[vid]] = ci

    m = len(selected)
    if m == 0:
        return [], 0.0
    options: list[list[tuple[int, float]]] = []
    min_t = []
    for seq in selected:
        compat = compatible_vehicles(instance, seq)
        if not compat:
            raise ValueError(f"sequence {seq.nodes} is compatible with no vehicle")
        opts = sorted(
            ((uidx[v], trip_duration(instance, seq, v)) for v in compat),
            key=lambda q: (q[1], q[0]),
        )
        options.append(opts)
        min_t.append(opts[0][1])

    order = sorted(range(m), key=lambda i: (-min_t[i], i))
    rem_min = [0.0] * (m + 1)
    for r in range(m - 1, -1, -1):
        rem_min[r] = rem_min[r + 1] + min_t[order[r]]

    loads = [0.0] * nu
    assign = [0] * m
    best = [math.inf, None]

    # Greedy warm start: least-loaded compatible vehicle per sequence.
    for i in order:
        u = min(options[i], key=lambda q: (loads[q[0]] + q[1], q[0]))
        assign[i] = u[0]
        loads[u[0]] += u[1]
    best[0] = max(loads)
    best[1] = list(assign)
    loads = [0.0] * nu

    def rec(r: int, sum_loads: float) -> None:
        if r == m:
            val = max(loads)
            if val < best[0] - EPS:
                best[0] = val
                best[1] = list(assign)
            return
        bound = max(max(loads), (sum_loads + rem_min[r]) / nu)
        if bound >= best[0] - EPS:
            return
        i = order[r]
        seen: set[tuple[int, float]] = set()
        for u, t in sorted(options[i], key=lambda q: (loads[q[0]] + q[1], q[0])):
            state = (class_of[u], loads[u])
            if state in seen:
                continue
            seen.add(state)
            if loads[u] + t >= best[0] - EPS:
                continue
            loads[u] += t
            assign[i] = u
            rec(r + 1, sum_loads + t)
            loads[u] -= t

    rec(0, 0.0)
    return [vids[u] for u in best[1]], best[0]
