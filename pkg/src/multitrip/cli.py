"""Command-line entry point.

Subcommands: gen (random instance), solve (one solver on one instance),
bench (experiment grid to CSV), render (solution plot), validate (check a
solution file).  Exit codes: 0 success, 1 solver or validation failure,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Optional

from .bench import ExperimentConfig, preset_configs, run_experiment
from .exact import (
    Objective,
    SolveStatus,
    solution_from_dict,
    solution_to_dict,
    solve_exact,
)
from .heuristics import (
    MatheuristicParams,
    solve_h_greedy,
    solve_h_tsp,
    solve_matheuristic,
)
from .instance import (
    GeneratorParams,
    Instance,
    generate_random_instance,
    preprocess_unreachable,
    validate_solution,
)
from .render import render_solution
from .sequences import enumerate_all_feasible, make_sequence


class _UsageError(Exception):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise _UsageError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise _UsageError(f"expected comma-separated integers, got {text!r}")


def _cmd_gen(args: argparse.Namespace) -> int:
    budgets = _floats(args.budgets)
    fleets = _ints(args.fleets) if args.fleets else (1,) * args.depots
    service = _floats(args.service)
    if len(service) != 2:
        raise _UsageError("--service takes exactly two numbers: lo,hi")
    try:
        params = GeneratorParams(
            n=args.n,
            depot_corners=tuple(range(args.depots)),
            fleet_sizes=fleets,
            budgets=budgets,
            service_lo=service[0],
            service_hi=service[1],
            speed=args.speed,
        )
    except ValueError as exc:
        raise _UsageError(str(exc))
    instance = generate_random_instance(params, args.seed)
    instance.save(args.out)
    print(f"wrote {args.out}: {args.n} targets, {args.depots} depots, seed {args.seed}")
    return 0


def _load_instance(path: str) -> Instance:
    if not os.path.exists(path):
        raise _UsageError(f"instance file not found: {path}")
    try:
        return Instance.load(path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise _UsageError(f"bad instance file {path}: {exc}")


def _cmd_solve(args: argparse.Namespace) -> int:
    instance = _load_instance(args.input)
    objective = Objective(args.objective)
    instance, removed = preprocess_unreachable(instance)
    if removed:
        print(f"warning: dropped unreachable targets {removed}", file=sys.stderr)

    if args.solver == "exact":
        t0 = time.perf_counter()
        deadline = None if args.time_limit is None else time.monotonic() + args.time_limit
        pool = enumerate_all_feasible(instance, deadline=deadline, partial_ok=True)
        if not pool.complete:
            for tid in sorted(pool.uncovered_targets()):
                pool.add(make_sequence(instance, [tid]))
        warm = solve_h_greedy(instance).solution if instance.targets else None
        remaining = None
        if args.time_limit is not None:
            remaining = max(0.0, args.time_limit - (time.perf_counter() - t0))
        outcome = solve_exact(
            pool, instance, objective, time_limit=remaining, warm_start=warm
        )
        if not pool.complete and outcome.status is SolveStatus.OPTIMAL:
            # Optimal only for the truncated pool, so no certificate overall.
            outcome.status = SolveStatus.FEASIBLE_TIME_LIMIT
        outcome.wall_time = time.perf_counter() - t0
    elif args.solver == "math":
        params = MatheuristicParams(args.nc, args.kmax, args.time_limit)
        outcome = solve_matheuristic(instance, params, objective)
    elif args.solver == "tsp":
        outcome = solve_h_tsp(instance)
    else:
        outcome = solve_h_greedy(instance)

    if outcome.solution is None:
        print(f"{outcome.status.value} - - {outcome.wall_time:.3f}")
        return 1

    payload = {
        "status": outcome.status.value,
        "objective": outcome.solution.objective_value,
        "best_lower_bound": outcome.best_lower_bound,
        "nodes_explored": outcome.nodes_explored,
        "wall_time_s": outcome.wall_time,
        "solution": solution_to_dict(instance, outcome.solution),
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    print(
        f"{outcome.status.value} {outcome.solution.objective_value:.6f}"
        f" {outcome.solution.trips} {outcome.wall_time:.3f}"
    )
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    presets = preset_configs()
    if args.config in presets:
        config = presets[args.config]
    elif os.path.exists(args.config):
        try:
            with open(args.config) as fh:
                config = ExperimentConfig.from_dict(json.load(fh))
        except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise _UsageError(f"bad config file {args.config}: {exc}")
    else:
        raise _UsageError(
            f"config {args.config!r} is neither a preset ({', '.join(sorted(presets))})"
            " nor a file"
        )
    if args.workers is not None:
        config = ExperimentConfig.from_dict({**config.to_dict(), "workers": args.workers})
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, f"{config.name}.csv")
    rows = run_experiment(config, csv_path=csv_path)
    ok = sum(1 for r in rows if not r.status.startswith("error") and r.status != "invalid")
    print(f"wrote {csv_path}: {len(rows)} rows, {ok} clean")
    return 0 if ok == len(rows) else 1


def _cmd_render(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    try:
        with open(args.solution) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _UsageError(f"bad solution file {args.solution}: {exc}")
    solution = solution_from_dict(instance, data.get("solution", data))
    render_solution(instance, solution, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    try:
        with open(args.solution) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _UsageError(f"bad solution file {args.solution}: {exc}")
    solution = solution_from_dict(instance, data.get("solution", data))
    report = validate_solution(instance, solution)
    if report.feasible:
        print("feasible")
        return 0
    for kind, detail in report.violations:
        print(f"{kind}: {detail}")
    return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multitrip",
        description="Multi-depot multi-trip routing: generate, solve, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random instance")
    gen.add_argument("--n", type=int, required=True, help="number of targets")
    gen.add_argument("--depots", type=int, default=2, help="number of corner depots")
    gen.add_argument("--fleets", help="vehicles per depot, comma-separated")
    gen.add_argument("--budgets", default="30,50", help="budget per depot, comma-separated")
    gen.add_argument("--service", default="5,8", help="service-time interval lo,hi")
    gen.add_argument("--speed", type=float, default=1.0, help="vehicle speed in km/min")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default="instance.json")

    solve = sub.add_parser("solve", help="solve one instance")
    solve.add_argument("--input", required=True, help="instance JSON file")
    solve.add_argument("--solver", choices=("exact", "math", "tsp", "greedy"),
                       default="math")
    solve.add_argument("--objective", choices=("ct", "td"), default="ct")
    solve.add_argument("--nc", type=int, default=3)
    solve.add_argument("--kmax", type=int, default=200_000)
    solve.add_argument("--time-limit", type=float, default=None)
    solve.add_argument("--out", default=None, help="write outcome JSON here")

    bench = sub.add_parser("bench", help="run an experiment grid")
    bench.add_argument("--config", required=True,
                       help="preset name or config JSON path")
    bench.add_argument("--out-dir", default="bench_out")
    bench.add_argument("--workers", type=int, default=None)

    render = sub.add_parser("render", help="draw a solution as SVG")
    render.add_argument("--instance", required=True)
    render.add_argument("--solution", required=True, help="outcome or solution JSON")
    render.add_argument("--out", default="routes.svg")

    val = sub.add_parser("validate", help="check a solution file")
    val.add_argument("--instance", required=True)
    val.add_argument("--solution", required=True)
    return parser


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "render": _cmd_render,
    "validate": _cmd_validate,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; keep its code.
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - contract: solver failures exit 1
        print(f"failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
