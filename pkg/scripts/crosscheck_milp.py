#!/usr/bin/env python3
"""Cross-check the branch-and-bound against an independent MILP solve.

Builds the same set-partitioning model the solver optimizes (pick trips
so that every target is covered exactly once, with tau bounding every
vehicle load) and hands it to HiGHS through scipy. The model is solved
over the fully enumerated pool and over the bounded nearest-neighbor
pool, and both objective values are compared to the package solver's.
Trip durations are recomputed from raw coordinates, so no arithmetic is
shared with the code under test.

Requires scipy, which is not a package dependency.

Example:
    python scripts/crosscheck_milp.py --n 20 --seeds 20 --nc 6
"""

import argparse
import math
import sys
import warnings

import numpy as np

try:
    import scipy.sparse as sp
    from scipy.optimize import Bounds, LinearConstraint, milp
except ImportError:
    print("this script needs scipy: pip install scipy", file=sys.stderr)
    raise SystemExit(2)

from multitrip import (
    GeneratorParams,
    Objective,
    enumerate_all_feasible,
    generate_heuristic_pool,
    generate_random_instance,
    solve_exact,
    solve_h_greedy,
)


def raw_trip_duration(instance, nodes, vid):
    """Depot leg out, inter-target legs, services, depot leg back."""
    vehicle = instance.vehicles[vid]
    depot = next(d for d in instance.depots if d.id == vehicle.home_depot)
    pts = {t.id: (t.x, t.y) for t in instance.targets}
    svc = {t.id: t.service_time for t in instance.targets}

    def leg(a, b):
        return math.hypot(a[0] - b[0], a[1] - b[1]) / instance.speed

    total = leg((depot.x, depot.y), pts[nodes[0]])
    for a, b in zip(nodes, nodes[1:]):
        total += leg(pts[a], pts[b])
    total += leg(pts[nodes[-1]], (depot.x, depot.y))
    return total + sum(svc[i] for i in nodes)


def milp_makespan(instance, pool):
    """Minimum makespan over the pool by set partitioning, via HiGHS."""
    cols = []
    durs = []
    for sid in sorted(pool.sequences):
        seq = pool.get(sid)
        for vid in pool.compatible[sid]:
            cols.append(sid)
            durs.append(raw_trip_duration(instance, seq.nodes, vid))
    tids = sorted(t.id for t in instance.targets)
    row_of = {t: r for r, t in enumerate(tids)}
    nveh = len(instance.vehicles)
    nvar = len(cols) + 1

    rows, col_ix, vals = [], [], []
    j = 0
    for sid in sorted(pool.sequences):
        seq = pool.get(sid)
        for vid in pool.compatible[sid]:
            for node in seq.nodes:
                rows.append(row_of[node])
                col_ix.append(j)
                vals.append(1.0)
            rows.append(len(tids) + vid)
            col_ix.append(j)
            vals.append(durs[j])
            j += 1
    for vid in range(nveh):
        rows.append(len(tids) + vid)
        col_ix.append(nvar - 1)
        vals.append(-1.0)
    matrix = sp.coo_matrix((vals, (rows, col_ix)), shape=(len(tids) + nveh, nvar))

    lower = np.array([1.0] * len(tids) + [-np.inf] * nveh)
    upper = np.array([1.0] * len(tids) + [0.0] * nveh)
    cost = np.zeros(nvar)
    cost[-1] = 1.0
    integrality = np.ones(nvar)
    integrality[-1] = 0
    with warnings.catch_warnings():
        # scipy forwards the feasibility tolerance to HiGHS verbatim but
        # flags it as unrecognized; the default 1e-6 would blur the check.
        warnings.simplefilter("ignore", RuntimeWarning)
        result = milp(
            cost,
            constraints=LinearConstraint(matrix, lower, upper),
            integrality=integrality,
            bounds=Bounds(np.zeros(nvar), np.array([1.0] * len(cols) + [np.inf])),
            options={"mip_rel_gap": 0.0, "mip_feasibility_tolerance": 1e-9},
        )
    if not result.success:
        raise RuntimeError(f"MILP did not solve: {result.message}")
    return result.fun


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=20, help="targets per instance")
    parser.add_argument("--seeds", type=int, default=20, help="seeds 1..N")
    parser.add_argument("--nc", type=int, default=6, help="children per expansion")
    parser.add_argument("--kmax", type=int, default=10**9, help="pool insertion cap")
    parser.add_argument("--time-limit", type=float, default=300.0,
                        help="per-solve limit in seconds")
    args = parser.parse_args()

    worst = 0.0
    gaps = []
    for seed in range(1, args.seeds + 1):
        instance = generate_random_instance(GeneratorParams(n=args.n), seed)
        warm = solve_h_greedy(instance).solution
        full = enumerate_all_feasible(instance)
        exact = solve_exact(full, instance, objective=Objective.COMPLETION_TIME,
                            time_limit=args.time_limit, warm_start=warm)
        if exact.status.value != "OPTIMAL":
            raise RuntimeError(f"seed {seed}: exact solve did not close")
        bounded, _ = generate_heuristic_pool(instance, nc=args.nc, kmax=args.kmax)
        restricted = solve_exact(bounded, instance,
                                 objective=Objective.COMPLETION_TIME,
                                 time_limit=args.time_limit, warm_start=warm)
        if restricted.status.value != "OPTIMAL":
            raise RuntimeError(f"seed {seed}: restricted solve did not close")

        ref_full = milp_makespan(instance, full)
        ref_bounded = milp_makespan(instance, bounded)
        dev = max(abs(ref_full - exact.objective_value),
                  abs(ref_bounded - restricted.objective_value))
        worst = max(worst, dev)
        gap = 100.0 * (restricted.objective_value - exact.objective_value) \
            / exact.objective_value
        gaps.append(gap)
        print(f"seed {seed:3d}: exact {exact.objective_value:9.3f}  "
              f"milp {ref_full:9.3f}  nc{args.nc} {restricted.objective_value:9.3f}  "
              f"milp {ref_bounded:9.3f}  dev {dev:.2e}  gap {gap:6.3f}%")

    print(f"\n{args.seeds} seeds: worst solver-vs-MILP deviation {worst:.2e}, "
          f"mean gap {sum(gaps) / len(gaps):.3f}%, max gap {max(gaps):.3f}%")
    return 0 if worst <= 1e-6 else 1


if __name__ == "__main__":
    sys.exit(main())
