"""Multi-depot multi-trip routing with a completion-time objective.

Targets spread over an area must each be serviced exactly once by a fleet of
budget-limited vehicles that return to their home depot after every trip.
The package provides the instance model, feasible-sequence pools, an exact
branch-and-bound over a pool, a pool-based matheuristic, two constructive
benchmark heuristics, and an experiment harness.
"""

from .exact import (
    Objective,
    Solution,
    SolveOutcome,
    SolveStatus,
    assign_min_makespan,
    solution_from_dict,
    solution_to_dict,
    solve_exact,
    total_travel_distance,
)
from .bench import (
    CSV_HEADER,
    ExperimentConfig,
    ResultRow,
    SolverSpec,
    apply_territory_partition,
    gap_percent,
    preset_configs,
    run_experiment,
)
from .heuristics import (
    MatheuristicParams,
    solve_h_greedy,
    solve_h_tsp,
    solve_matheuristic,
)
from .instance import (
    Depot,
    GeneratorParams,
    Instance,
    TargetNode,
    ValidationReport,
    Vehicle,
    generate_random_instance,
    preprocess_unreachable,
    validate_solution,
)
from .render import render_solution
from .sequences import (
    Dominance,
    PoolCapExceeded,
    PoolBuildTimeout,
    PoolGenerationStats,
    SequencePool,
    TargetSequence,
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

__all__ = [
    "CSV_HEADER",
    "Depot",
    "Dominance",
    "ExperimentConfig",
    "GeneratorParams",
    "Instance",
    "MatheuristicParams",
    "Objective",
    "PoolBuildTimeout",
    "PoolCapExceeded",
    "PoolGenerationStats",
    "ResultRow",
    "SequencePool",
    "Solution",
    "SolveOutcome",
    "SolveStatus",
    "SolverSpec",
    "TargetNode",
    "TargetSequence",
    "ValidationReport",
    "Vehicle",
    "apply_territory_partition",
    "assign_min_makespan",
    "compatible_vehicles",
    "dominates",
    "enumerate_all_feasible",
    "gap_percent",
    "generate_heuristic_pool",
    "generate_random_instance",
    "is_compatible",
    "is_feasible",
    "make_sequence",
    "preprocess_unreachable",
    "preset_configs",
    "render_solution",
    "run_experiment",
    "sequence_duration",
    "solution_from_dict",
    "solution_to_dict",
    "solve_exact",
    "solve_h_greedy",
    "solve_h_tsp",
    "solve_matheuristic",
    "total_travel_distance",
    "trip_duration",
    "validate_solution",
]
