#!/usr/bin/env python3
"""Quantify the cost of fencing each vehicle into its own quadrant.

Generates symmetric four-depot instances, solves each to optimality twice
(once free, once with every target bound to its nearest depot), and prints
the per-seed makespan degradation.

Example:
    python scripts/territory_experiment.py --n 16 --seeds 10
"""

import argparse
import statistics
import sys

from multitrip import (
    GeneratorParams,
    apply_territory_partition,
    enumerate_all_feasible,
    gap_percent,
    generate_random_instance,
    preprocess_unreachable,
    solve_exact,
    solve_h_greedy,
)


def solve_to_optimum(instance, time_limit):
    warm = solve_h_greedy(instance).solution
    out = solve_exact(enumerate_all_feasible(instance), instance,
                      time_limit=time_limit, warm_start=warm)
    if out.status.value != "OPTIMAL":
        raise RuntimeError(f"solve did not close within {time_limit}s")
    return out.solution.objective_value


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=16, help="targets per instance")
    parser.add_argument("--seeds", type=int, default=10, help="number of seeds")
    parser.add_argument("--budget", type=float, default=40.0)
    parser.add_argument("--side", type=float, default=15.0)
    parser.add_argument("--time-limit", type=float, default=300.0)
    args = parser.parse_args()

    params = GeneratorParams(
        n=args.n, side=args.side, depot_corners=(0, 1, 2, 3),
        fleet_sizes=(1, 1, 1, 1), budgets=(args.budget,) * 4,
    )
    print(f"{'seed':>6} {'free':>10} {'fenced':>10} {'degradation':>12}")
    degradations = []
    for seed in range(1, args.seeds + 1):
        inst, _ = preprocess_unreachable(generate_random_instance(params, seed))
        free = solve_to_optimum(inst, args.time_limit)
        fenced = solve_to_optimum(apply_territory_partition(inst), args.time_limit)
        deg = gap_percent(fenced, free)
        degradations.append(deg)
        print(f"{seed:>6} {free:>10.2f} {fenced:>10.2f} {deg:>11.1f}%")
    print(f"\nmean degradation over {args.seeds} seeds: "
          f"{statistics.mean(degradations):.1f}%")
    return 0


if __name__ == "__main__":
    sys.exit(main())
