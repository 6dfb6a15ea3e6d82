"""Experiment harness: seeded instance batteries, solver sweeps, CSV output.

A config names a grid of (n, seed) cells and a list of solver specs; every
cell generates one instance, preprocesses it once, runs each solver on it,
and emits one row per solver with independently recomputed metrics.  Rows
never carry solver-reported numbers: completion time and travel are summed
leg by leg from the instance.  The CSV is rewritten sorted at the end so
reruns of the same config produce identical bytes (timing excluded).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass
from typing import Optional

from .exact import Objective, Solution, SolveOutcome, solve_exact, total_travel_distance
from .heuristics import (
    MatheuristicParams,
    matheuristic_pipeline,
    solve_h_greedy,
    solve_h_tsp,
)
from .instance import (
    GeneratorParams,
    Instance,
    generate_random_instance,
    preprocess_unreachable,
    validate_solution,
)
from .sequences import enumerate_all_feasible

CSV_HEADER = "seed,n,config,solver,nc,objective,ct_min,td_min,trips,pool_size,cap_hit,status,wall_s"

SOLVER_KINDS = ("exact", "matheuristic", "h_tsp", "h_greedy")


@dataclass(frozen=True)
class SolverSpec:
    """One column of an experiment: a solver with its parameters."""

    label: str
    kind: str
    objective: Objective = Objective.COMPLETION_TIME
    nc: Optional[int] = None
    kmax: Optional[int] = None
    time_limit: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in SOLVER_KINDS:
            raise ValueError(f"unknown solver kind {self.kind!r}")
        if self.kind == "matheuristic":
            if self.nc is None:
                object.__setattr__(self, "nc", 3)
            if self.kmax is None:
                object.__setattr__(self, "kmax", 200_000)

    def to_dict(self) -> dict:
        out = {"label": self.label, "kind": self.kind, "objective": self.objective.value}
        for key in ("nc", "kmax", "time_limit"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out

    @staticmethod
    def from_dict(data: dict) -> "SolverSpec":
        return SolverSpec(
            label=data["label"],
            kind=data["kind"],
            objective=Objective(data.get("objective", "ct")),
            nc=data.get("nc"),
            kmax=data.get("kmax"),
            time_limit=data.get("time_limit"),
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one experiment grid."""

    name: str
    ns: tuple[int, ...]
    seeds: tuple[int, ...]
    solvers: tuple[SolverSpec, ...]
    side: float = 15.0
    depot_corners: tuple[int, ...] = (0, 1)
    fleet_sizes: tuple[int, ...] = (1, 1)
    budgets: tuple[float, ...] = (30.0, 50.0)
    service_lo: float = 5.0
    service_hi: float = 8.0
    speed: float = 1.0
    territory: bool = False
    workers: int = 1
    record_timing: bool = True

    def __post_init__(self) -> None:
        if not self.ns or not self.seeds or not self.solvers:
            raise ValueError("ns, seeds, and solvers must all be nonempty")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        labels = [s.label for s in self.solvers]
        if len(set(labels)) != len(labels):
            raise ValueError("solver labels must be unique")

    def generator_params(self, n: int) -> GeneratorParams:
        return GeneratorParams(
            n=n,
            side=self.side,
            depot_corners=self.depot_corners,
            fleet_sizes=self.fleet_sizes,
            budgets=self.budgets,
            service_lo=self.service_lo,
            service_hi=self.service_hi,
            speed=self.speed,
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ns": list(self.ns),
            "seeds": list(self.seeds),
            "solvers": [s.to_dict() for s in self.solvers],
            "side": self.side,
            "depot_corners": list(self.depot_corners),
            "fleet_sizes": list(self.fleet_sizes),
            "budgets": list(self.budgets),
            "service_lo": self.service_lo,
            "service_hi": self.service_hi,
            "speed": self.speed,
            "territory": self.territory,
            "workers": self.workers,
            "record_timing": self.record_timing,
        }

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        kwargs = dict(data)
        kwargs["ns"] = tuple(kwargs["ns"])
        kwargs["seeds"] = tuple(kwargs["seeds"])
        kwargs["solvers"] = tuple(SolverSpec.from_dict(s) for s in kwargs["solvers"])
        for key in ("depot_corners", "fleet_sizes", "budgets"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return ExperimentConfig(**kwargs)


@dataclass
class ResultRow:
    seed: int
    n: int
    config: str
    solver: str
    nc: Optional[int]
    objective: str
    ct_min: Optional[float]
    td_min: Optional[float]
    trips: Optional[int]
    pool_size: Optional[int]
    cap_hit: Optional[bool]
    status: str
    wall_s: Optional[float]

    def to_csv_line(self) -> str:
        def num(x, fmt):
            return "" if x is None else fmt % x

        cap = "" if self.cap_hit is None else ("true" if self.cap_hit else "false")
        return ",".join(
            [
                str(self.seed),
                str(self.n),
                self.config,
                self.solver,
                "" if self.nc is None else str(self.nc),
                self.objective,
                num(self.ct_min, "%.6f"),
                num(self.td_min, "%.6f"),
                "" if self.trips is None else str(self.trips),
                "" if self.pool_size is None else str(self.pool_size),
                cap,
                self.status,
                num(self.wall_s, "%.3f"),
            ]
        )


def gap_percent(value: float, reference: float) -> float:
    """Percentage excess of ``value`` over a positive ``reference``."""
    if reference <= 0:
        raise ValueError("reference must be positive")
    return 100.0 * (value - reference) / reference


def apply_territory_partition(instance: Instance) -> Instance:
    """Restrict every target to the depot of its sub-square.

    Requires the symmetric layout: four depots on the four corners of the
    area and the same number of vehicles at each.  Each target is assigned
    to its closest depot, ties to the lower depot id, and the returned
    instance forbids any other depot's vehicles from visiting it.
    """
    depots = sorted(instance.depots, key=lambda d: d.id)
    if len(depots) != 4:
        raise ValueError("territory partition needs exactly 4 depots")
    hi = max(max(d.x for d in depots), max(d.y for d in depots))
    corners = {(0.0, 0.0), (hi, 0.0), (hi, hi), (0.0, hi)}
    if hi <= 0 or {(d.x, d.y) for d in depots} != corners:
        raise ValueError("depots must sit on the four corners of the area")
    fleet_per_depot = {d.id: 0 for d in depots}
    for v in instance.vehicles:
        fleet_per_depot[v.home_depot] += 1
    if len(set(fleet_per_depot.values())) != 1:
        raise ValueError("every depot must base the same number of vehicles")

    mapping = {}
    for t in instance.targets:
        best = min(depots, key=lambda d: (math.hypot(t.x - d.x, t.y - d.y), d.id))
        mapping[t.id] = best.id
    return instance.with_territory(mapping)


def _recompute_ct(instance: Instance, solution: Solution) -> float:
    """Leg-by-leg completion time, trusting only the node ids."""
    loads = {v.id: 0.0 for v in instance.vehicles}
    for seq, vid in solution.assignments:
        v = instance.vehicle_by_id[vid]
        dur = instance.travel_time(v.home_depot, seq.nodes[0])
        for a, b in zip(seq.nodes, seq.nodes[1:]):
            dur += instance.travel_time(a, b)
        dur += instance.travel_time(seq.nodes[-1], v.home_depot)
        dur += sum(instance.target_by_id[i].service_time for i in seq.nodes)
        loads[vid] += dur
    return max(loads.values(), default=0.0)


def _run_solver(
    spec: SolverSpec, instance: Instance
) -> tuple[SolveOutcome, Optional[int], Optional[bool]]:
    if spec.kind == "exact":
        pool = enumerate_all_feasible(instance)
        warm = solve_h_greedy(instance).solution if instance.targets else None
        outcome = solve_exact(
            pool, instance, spec.objective, time_limit=spec.time_limit, warm_start=warm
        )
        return outcome, len(pool), False
    if spec.kind == "matheuristic":
        params = MatheuristicParams(spec.nc, spec.kmax, spec.time_limit)
        outcome, pool, stats = matheuristic_pipeline(instance, params, spec.objective)
        return outcome, len(pool), stats.cap_hit
    if spec.kind == "h_tsp":
        return solve_h_tsp(instance), None, None
    return solve_h_greedy(instance), None, None


def run_cell(config: ExperimentConfig, n: int, seed: int) -> list[ResultRow]:
    """Generate one instance and run every solver of the config on it."""
    instance, _ = preprocess_unreachable(
        generate_random_instance(config.generator_params(n), seed)
    )
    if config.territory:
        instance = apply_territory_partition(instance)

    rows = []
    for spec in config.solvers:
        nc = spec.nc if spec.kind == "matheuristic" else None
        row = ResultRow(
            seed=seed, n=n, config=config.name, solver=spec.label, nc=nc,
            objective=spec.objective.value if spec.kind in ("exact", "matheuristic") else "ct",
            ct_min=None, td_min=None, trips=None, pool_size=None, cap_hit=None,
            status="error", wall_s=None,
        )
        try:
            t0 = time.perf_counter()
            outcome, pool_size, cap_hit = _run_solver(spec, instance)
            wall = time.perf_counter() - t0
            row.pool_size = pool_size
            row.cap_hit = cap_hit
            if config.record_timing:
                row.wall_s = wall
            if outcome.solution is None:
                row.status = outcome.status.value
            else:
                report = validate_solution(instance, outcome.solution)
                row.status = outcome.status.value if report.feasible else "invalid"
                row.ct_min = _recompute_ct(instance, outcome.solution)
                row.td_min = total_travel_distance(outcome.solution, instance)
                row.trips = outcome.solution.trips
        except Exception as exc:  # noqa: BLE001 - a bad cell must not kill the batch
            row.status = f"error: {type(exc).__name__}"
        rows.append(row)
    return rows


def _sorted_rows(rows: list[ResultRow]) -> list[ResultRow]:
    return sorted(rows, key=lambda r: (r.n, r.seed, r.solver))


def write_csv(rows: list[ResultRow], path: str) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.to_csv_line() + "\n")


def run_experiment(
    config: ExperimentConfig, csv_path: Optional[str] = None
) -> list[ResultRow]:
    """Run the whole grid; flush rows as they arrive, then rewrite sorted.

    With ``workers > 1`` cells run in separate processes; the flush order
    then follows completion, but the final file is always sorted by
    (n, seed, solver), so the content is reproducible.
    """
    cells = [(n, seed) for n in config.ns for seed in config.seeds]
    rows: list[ResultRow] = []
    sink = open(csv_path, "w") if csv_path else None
    if sink:
        sink.write(CSV_HEADER + "\n")

    def take(batch: list[ResultRow]) -> None:
        rows.extend(batch)
        if sink:
            for row in batch:
                sink.write(row.to_csv_line() + "\n")
            sink.flush()

    try:
        if config.workers == 1:
            for n, seed in cells:
                take(run_cell(config, n, seed))
        else:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                pending = {pool.submit(run_cell, config, n, seed) for n, seed in cells}
                while pending:
                    done, pending = wait(pending, return_when=FIRST_COMPLETED)
                    for fut in done:
                        take(fut.result())
    finally:
        if sink:
            sink.close()

    rows = _sorted_rows(rows)
    if csv_path:
        write_csv(rows, csv_path)
    return rows


def _math(label: str, nc: int, time_limit: Optional[float] = None, **kw) -> SolverSpec:
    return SolverSpec(label, "matheuristic", nc=nc, time_limit=time_limit, **kw)


def preset_configs() -> dict[str, ExperimentConfig]:
    """Named experiment grids mirroring the study designs."""
    twenty = tuple(range(1, 21))
    sweep = (10, 20, 50, 100, 200)
    fig5 = dict(
        ns=sweep,
        seeds=twenty,
        solvers=(
            _math("math-nc3", 3, time_limit=30.0),
            SolverSpec("h-tsp", "h_tsp"),
            SolverSpec("h-greedy", "h_greedy"),
        ),
    )
    configs = [
        # Small deterministic grid: no time limits, timing off, so two runs
        # emit identical bytes.
        ExperimentConfig(
            name="default",
            ns=(10, 14),
            seeds=(1, 2, 3),
            solvers=(
                SolverSpec("exact-ct", "exact"),
                SolverSpec("exact-td", "exact", objective=Objective.TOTAL_TRAVEL_DISTANCE),
                _math("math-nc3", 3),
                SolverSpec("h-tsp", "h_tsp"),
                SolverSpec("h-greedy", "h_greedy"),
            ),
            record_timing=False,
        ),
        # Two-objective comparison on twenty 20-target instances.
        ExperimentConfig(
            name="table1",
            ns=(20,),
            seeds=twenty,
            solvers=(
                SolverSpec("exact-ct", "exact", time_limit=600.0),
                SolverSpec("exact-td", "exact", objective=Objective.TOTAL_TRAVEL_DISTANCE,
                           time_limit=600.0),
            ),
        ),
        # Pool-width sweep against the benchmark heuristics, two depots with
        # one vehicle each.
        ExperimentConfig(
            name="fig4",
            ns=sweep,
            seeds=twenty,
            solvers=(
                _math("math-nc3", 3, time_limit=30.0),
                _math("math-nc4", 4, time_limit=30.0),
                _math("math-nc5", 5, time_limit=30.0),
                _math("math-nc6", 6, time_limit=30.0),
                SolverSpec("h-tsp", "h_tsp"),
                SolverSpec("h-greedy", "h_greedy"),
            ),
        ),
        # Fleet-shape sweeps; budgets 50/30/40/20 by depot order.
        ExperimentConfig(name="fig5a", depot_corners=(0, 1), fleet_sizes=(6, 3),
                         budgets=(50.0, 30.0), **fig5),
        ExperimentConfig(name="fig5b", depot_corners=(0, 2), fleet_sizes=(10, 10),
                         budgets=(50.0, 30.0), **fig5),
        ExperimentConfig(name="fig5c", depot_corners=(0, 1, 2), fleet_sizes=(3, 3, 3),
                         budgets=(50.0, 30.0, 40.0), **fig5),
        ExperimentConfig(name="fig5d", depot_corners=(0, 1, 2), fleet_sizes=(6, 4, 2),
                         budgets=(50.0, 30.0, 40.0), **fig5),
        ExperimentConfig(name="fig5e", depot_corners=(0, 1, 2, 3), fleet_sizes=(8, 4, 2, 1),
                         budgets=(50.0, 30.0, 40.0, 20.0), **fig5),
        ExperimentConfig(name="fig5f", depot_corners=(0, 1, 2, 3), fleet_sizes=(3, 3, 3, 3),
                         budgets=(50.0, 30.0, 40.0, 20.0), **fig5),
    ]
    # The sub-square restriction experiment runs the same symmetric layout
    # twice: once free, once with each target fenced into its quadrant.
    for name, territory in (("quadrant-free", False), ("quadrant-split", True)):
        configs.append(
            ExperimentConfig(
                name=name,
                ns=(16,),
                seeds=twenty,
                depot_corners=(0, 1, 2, 3),
                fleet_sizes=(1, 1, 1, 1),
                budgets=(40.0, 40.0, 40.0, 40.0),
                territory=territory,
                solvers=(
                    SolverSpec("exact-ct", "exact", time_limit=300.0),
                ),
            )
        )
    return {c.name: c for c in configs}
