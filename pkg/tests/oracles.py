"""Brute-force reference implementations used only by the tests.

Everything here recomputes answers from primitive instance data (travel
times, service times, budgets, territory) by plain enumeration, sharing no
search logic with the library.  Sizes are expected to stay tiny.
"""

import itertools
import math

TOL = 1e-9


def _allowed(instance, vehicle, subset):
    if instance.territory is None:
        return True
    return all(instance.territory[i] == vehicle.home_depot for i in subset)


def best_trip_travel(instance):
    """For every nonempty target subset: per vehicle, the cheapest trip travel.

    Travel only (no service); visits every ordering of the subset, so the
    value is exact by construction.  Vehicles barred by territory get inf.
    """
    ids = sorted(t.id for t in instance.targets)
    tt = instance.travel_time
    table = {}
    for r in range(1, len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            best = {v.id: math.inf for v in instance.vehicles}
            for perm in itertools.permutations(combo):
                inner = sum(tt(a, b) for a, b in zip(perm, perm[1:]))
                for v in instance.vehicles:
                    if not _allowed(instance, v, combo):
                        continue
                    trav = inner + tt(v.home_depot, perm[0]) + tt(perm[-1], v.home_depot)
                    if trav < best[v.id]:
                        best[v.id] = trav
            table[frozenset(combo)] = best
    return table


def _blocks_containing_lowest(remaining):
    low = min(remaining)
    rest = sorted(remaining - {low})
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            yield frozenset((low,) + extra)


def oracle_min_completion_time(instance):
    """Exhaustive optimum of the makespan objective.

    Enumerates every partition of the targets into trips (blocks pinned by
    their lowest element) jointly with every vehicle choice per trip,
    pruning only on the running maximum load, which can never decrease.
    """
    ids = frozenset(t.id for t in instance.targets)
    if not ids:
        return 0.0
    travel = best_trip_travel(instance)
    svc = {t.id: t.service_time for t in instance.targets}
    vehicles = list(instance.vehicles)
    loads = {v.id: 0.0 for v in vehicles}
    best = math.inf

    def rec(remaining):
        nonlocal best
        cur = max(loads.values())
        if cur >= best - 1e-12:
            return
        if not remaining:
            best = cur
            return
        for block in _blocks_containing_lowest(remaining):
            service = sum(svc[i] for i in block)
            for v in vehicles:
                trip = travel[block][v.id] + service
                if trip <= v.budget + TOL:
                    prev = loads[v.id]
                    loads[v.id] = prev + trip
                    rec(remaining - block)
                    loads[v.id] = prev

    rec(ids)
    return best


def oracle_min_total_travel(instance):
    """Exhaustive optimum of the total-travel objective.

    Trips do not interact through this objective, so each block takes its
    cheapest feasible vehicle; the partition choice is memoized on the
    remaining target set.
    """
    ids = frozenset(t.id for t in instance.targets)
    if not ids:
        return 0.0
    travel = best_trip_travel(instance)
    svc = {t.id: t.service_time for t in instance.targets}
    vehicles = list(instance.vehicles)
    memo = {}

    def block_cost(block):
        service = sum(svc[i] for i in block)
        best = math.inf
        for v in vehicles:
            trav = travel[block][v.id]
            if trav + service <= v.budget + TOL and trav < best:
                best = trav
        return best

    def rec(remaining):
        if not remaining:
            return 0.0
        if remaining in memo:
            return memo[remaining]
        best = math.inf
        for block in _blocks_containing_lowest(remaining):
            cost = block_cost(block)
            if cost == math.inf:
                continue
            total = cost + rec(remaining - block)
            if total < best:
                best = total
        memo[remaining] = best
        return best

    return rec(ids)


def oracle_min_makespan_assignment(instance, sequences):
    """Best max-load over every assignment of given sequences to vehicles."""
    tt = instance.travel_time
    options = []
    for seq in sequences:
        feas = []
        for v in instance.vehicles:
            if not _allowed(instance, v, seq.nodes):
                continue
            trip = (
                seq.duration
                + tt(v.home_depot, seq.nodes[0])
                + tt(seq.nodes[-1], v.home_depot)
            )
            if trip <= v.budget + TOL:
                feas.append((v.id, trip))
        if not feas:
            return math.inf
        options.append(feas)

    best = math.inf
    loads = {v.id: 0.0 for v in instance.vehicles}

    def rec(i):
        nonlocal best
        if max(loads.values()) >= best - 1e-12:
            return
        if i == len(options):
            best = max(loads.values())
            return
        for vid, trip in options[i]:
            prev = loads[vid]
            loads[vid] = prev + trip
            rec(i + 1)
            loads[vid] = prev

    rec(0)
    return best


def oracle_feasible_classes(instance):
    """(node set, extreme pair) -> min duration, for classes someone can fly.

    Recomputes durations by summing travel and service over every
    permutation of every subset, then keeps a class when its minimum
    representative fits inside at least one vehicle's budget (respecting
    territory).
    """
    ids = sorted(t.id for t in instance.targets)
    tt = instance.travel_time
    svc = {t.id: t.service_time for t in instance.targets}
    best = {}
    for r in range(1, len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            service = sum(svc[i] for i in combo)
            for perm in itertools.permutations(combo):
                dur = service + sum(tt(a, b) for a, b in zip(perm, perm[1:]))
                key = (frozenset(combo), frozenset((perm[0], perm[-1])))
                if key not in best or dur < best[key][0]:
                    best[key] = (dur, perm)

    out = {}
    for (nodes, extremes), (dur, perm) in best.items():
        for v in instance.vehicles:
            if not _allowed(instance, v, nodes):
                continue
            legs = tt(v.home_depot, perm[0]) + tt(perm[-1], v.home_depot)
            if dur + legs <= v.budget + TOL:
                out[(nodes, extremes)] = dur
                break
    return out
