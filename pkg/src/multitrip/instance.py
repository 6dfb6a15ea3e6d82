"""Problem instances: node geometry, travel times, random generation,
preprocessing, and independent solution validation.

Coordinates are kilometers, all times are minutes.  Travel time between two
nodes is Euclidean distance divided by the fleet speed unless an explicit
travel-time matrix is supplied at construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Optional, Sequence as Seq

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .exact import Solution

# Absolute tolerance for all duration comparisons (minutes).
EPS = 1e-9

# Corner indices of the square area: lower-left, lower-right, upper-right,
# upper-left.  Corner pairs (0,1) are adjacent, (0,2) opposite.
CORNERS = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))

# Violation kinds reported by validate_solution.
UNCOVERED_TARGET = "UNCOVERED_TARGET"
MULTIPLY_COVERED_TARGET = "MULTIPLY_COVERED_TARGET"
BUDGET_EXCEEDED = "BUDGET_EXCEEDED"
INCOMPATIBLE_ASSIGNMENT = "INCOMPATIBLE_ASSIGNMENT"
LOAD_MISMATCH = "LOAD_MISMATCH"
TAU_MISMATCH = "TAU_MISMATCH"


@dataclass(frozen=True)
class TargetNode:
    """A location that must be serviced exactly once."""

    id: int
    x: float
    y: float
    service_time: float  # minutes spent on site

    def __post_init__(self) -> None:
        if self.service_time <= 0:
            raise ValueError(f"target {self.id}: service_time must be > 0")


@dataclass(frozen=True)
class Depot:
    """A base where vehicles start, return, and swap batteries."""

    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Vehicle:
    """A vehicle bound to one home depot with a flat per-trip time budget."""

    id: int
    home_depot: int
    budget: float  # minutes per battery charge

    def __post_init__(self) -> None:
        if self.budget <= 0:
            raise ValueError(f"vehicle {self.id}: budget must be > 0")


class Instance:
    """Immutable problem instance.

    Node ids of targets and depots share one id space and must be globally
    unique.  The travel-time matrix is built once at construction and the
    object is safe to share across concurrent solver runs.

    ``travel_minutes`` optionally overrides the Euclidean metric with an
    explicit symmetric matrix, keyed by node-id pairs.  ``territory``
    optionally restricts each target to vehicles of one depot (used by the
    quadrant-partition experiment).
    """

    def __init__(
        self,
        targets: Seq[TargetNode],
        depots: Seq[Depot],
        vehicles: Seq[Vehicle],
        speed: float = 1.0,
        travel_minutes: Optional[Mapping[tuple[int, int], float]] = None,
        territory: Optional[Mapping[int, int]] = None,
    ) -> None:
        if speed <= 0:
            raise ValueError("speed must be > 0")
        if not depots:
            raise ValueError("at least one depot is required")
        if not vehicles:
            raise ValueError("at least one vehicle is required")

        self.targets = tuple(targets)
        self.depots = tuple(depots)
        self.vehicles = tuple(vehicles)
        self.speed = float(speed)

        ids = [d.id for d in self.depots] + [t.id for t in self.targets]
        if len(set(ids)) != len(ids):
            raise ValueError("target and depot ids must be globally unique")
        self._index = {nid: row for row, nid in enumerate(ids)}

        self.depot_by_id = {d.id: d for d in self.depots}
        self.target_by_id = {t.id: t for t in self.targets}
        self.vehicle_by_id = {v.id: v for v in self.vehicles}
        if len(self.vehicle_by_id) != len(self.vehicles):
            raise ValueError("vehicle ids must be unique")
        for v in self.vehicles:
            if v.home_depot not in self.depot_by_id:
                raise ValueError(f"vehicle {v.id}: unknown home depot {v.home_depot}")

        if territory is not None:
            territory = dict(territory)
            for tid, did in territory.items():
                if tid not in self.target_by_id or did not in self.depot_by_id:
                    raise ValueError("territory must map target ids to depot ids")
        self.territory = territory

        self._explicit_matrix = travel_minutes is not None
        self._dist = self._build_matrix(travel_minutes)
        self._metric = self._check_metric() if travel_minutes is not None else True

        # Targets get stable bit positions (ascending id) so pool builders and
        # solvers can work on integer masks.  Vehicles sharing (depot, budget)
        # are interchangeable; group them once for compatibility checks and
        # solver symmetry reduction.
        self.targets_sorted = sorted(t.id for t in self.targets)
        self.target_bit = {tid: i for i, tid in enumerate(self.targets_sorted)}
        groups: dict[tuple[int, float], list[int]] = {}
        for v in self.vehicles:
            groups.setdefault((v.home_depot, v.budget), []).append(v.id)
        self.vehicle_classes = [
            (dep, budget, tuple(sorted(vids)))
            for (dep, budget), vids in sorted(groups.items())
        ]

    def _build_matrix(self, travel_minutes) -> list[list[float]]:
        nodes = list(self.depots) + list(self.targets)
        if travel_minutes is None:
            xy = np.array([(nd.x, nd.y) for nd in nodes], dtype=float)
            diff = xy[:, None, :] - xy[None, :, :]
            return (np.sqrt((diff**2).sum(axis=2)) / self.speed).tolist()
        m = len(nodes)
        mat = [[0.0] * m for _ in range(m)]
        for i, a in enumerate(nodes):
            for j, b in enumerate(nodes):
                if i == j:
                    continue
                try:
                    t = travel_minutes[(a.id, b.id)]
                except KeyError:
                    t = travel_minutes.get((b.id, a.id))
                    if t is None:
                        raise ValueError(f"travel_minutes missing pair ({a.id},{b.id})")
                if t < 0:
                    raise ValueError("travel times must be non-negative")
                mat[i][j] = float(t)
        for i in range(m):
            for j in range(i + 1, m):
                if abs(mat[i][j] - mat[j][i]) > EPS:
                    raise ValueError("travel_minutes must be symmetric")
        return mat

    def _check_metric(self) -> bool:
        # Solver bounds that rely on the triangle inequality are only enabled
        # when it verifiably holds.
        d = self._dist
        m = len(d)
        for k in range(m):
            dk = d[k]
            for i in range(m):
                dik = d[i][k]
                row = d[i]
                for j in range(m):
                    if row[j] > dik + dk[j] + EPS:
                        return False
        return True

    @property
    def is_metric(self) -> bool:
        return self._metric

    @property
    def node_ids(self) -> list[int]:
        return list(self._index)

    def travel_time(self, a: int, b: int) -> float:
        """Minutes to fly between nodes ``a`` and ``b`` (targets or depots)."""
        try:
            return self._dist[self._index[a]][self._index[b]]
        except KeyError as exc:
            raise KeyError(f"unknown node id {exc.args[0]}") from None

    def allowed_depot(self, target_id: int) -> Optional[int]:
        """Depot whose vehicles may serve the target, or None if unrestricted."""
        if self.territory is None:
            return None
        return self.territory.get(target_id)

    def with_territory(self, territory: Mapping[int, int]) -> "Instance":
        return self._rebuild(self.targets, territory)

    def without_targets(self, remove: Iterable[int]) -> "Instance":
        gone = set(remove)
        kept = [t for t in self.targets if t.id not in gone]
        terr = None
        if self.territory is not None:
            terr = {t: d for t, d in self.territory.items() if t not in gone}
        return self._rebuild(kept, terr)

    def _rebuild(self, targets, territory) -> "Instance":
        pairs = self._as_pair_map(targets) if self._explicit_matrix else None
        return Instance(
            targets, self.depots, self.vehicles, self.speed,
            travel_minutes=pairs, territory=territory,
        )

    def _as_pair_map(self, targets) -> dict[tuple[int, int], float]:
        ids = [d.id for d in self.depots] + [t.id for t in targets]
        return {
            (a, b): self._dist[self._index[a]][self._index[b]]
            for a in ids
            for b in ids
            if a != b
        }

    # ------------------------------------------------------------------
    # JSON interface
    # ------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "speed_km_per_min": self.speed,
            "depots": [{"id": d.id, "x": d.x, "y": d.y} for d in self.depots],
            "targets": [
                {"id": t.id, "x": t.x, "y": t.y, "service_min": t.service_time}
                for t in self.targets
            ],
            "vehicles": [
                {"id": v.id, "depot": v.home_depot, "budget_min": v.budget}
                for v in self.vehicles
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Instance":
        try:
            depots = [Depot(int(d["id"]), float(d["x"]), float(d["y"])) for d in data["depots"]]
            targets = [
                TargetNode(int(t["id"]), float(t["x"]), float(t["y"]), float(t["service_min"]))
                for t in data["targets"]
            ]
            vehicles = [
                Vehicle(int(v["id"]), int(v["depot"]), float(v["budget_min"]))
                for v in data["vehicles"]
            ]
            speed = float(data["speed_km_per_min"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed instance document: {exc}") from None
        return cls(targets, depots, vehicles, speed)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Instance":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class GeneratorParams:
    """Parameters for random instance generation.

    Targets are placed uniformly inside a ``side`` x ``side`` square whose
    corners host the depots; ``depot_corners`` indexes into (lower-left,
    lower-right, upper-right, upper-left).  Per depot, ``fleet_sizes[d]``
    vehicles are created, all with budget ``budgets[d]``.  Service times are
    uniform on the half-open interval (service_lo, service_hi].
    """

    n: int
    side: float = 15.0
    depot_corners: tuple[int, ...] = (0, 1)
    fleet_sizes: tuple[int, ...] = (1, 1)
    budgets: tuple[float, ...] = (30.0, 50.0)
    service_lo: float = 5.0
    service_hi: float = 8.0
    speed: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.side <= 0:
            raise ValueError("side must be > 0")
        if not self.depot_corners:
            raise ValueError("at least one depot corner is required")
        if len(set(self.depot_corners)) != len(self.depot_corners):
            raise ValueError("depot corners must be distinct")
        if any(c not in (0, 1, 2, 3) for c in self.depot_corners):
            raise ValueError("depot corners must be in 0..3")
        if len(self.fleet_sizes) != len(self.depot_corners):
            raise ValueError("one fleet size per depot required")
        if len(self.budgets) != len(self.depot_corners):
            raise ValueError("one budget per depot required")
        if any(f < 1 for f in self.fleet_sizes):
            raise ValueError("fleet sizes must be >= 1")
        if any(b <= 0 for b in self.budgets):
            raise ValueError("budgets must be > 0")
        if not self.service_lo < self.service_hi:
            raise ValueError("service interval (lo, hi] requires lo < hi")
        if self.service_lo < 0:
            raise ValueError("service_lo must be >= 0")
        if self.speed <= 0:
            raise ValueError("speed must be > 0")


def generate_random_instance(params: GeneratorParams, seed: int) -> Instance:
    """Generate a deterministic random instance for (params, seed).

    Depots take ids 0..D-1, targets D..D+n-1, vehicles 0..U-1 grouped by
    depot.  Two calls with identical arguments produce identical instances.
    """
    rng = np.random.default_rng(seed)
    ndep = len(params.depot_corners)

    depots = [
        Depot(i, CORNERS[c][0] * params.side, CORNERS[c][1] * params.side)
        for i, c in enumerate(params.depot_corners)
    ]

    xy = rng.uniform(0.0, params.side, size=(params.n, 2))
    span = params.service_hi - params.service_lo
    # hi - U[0, hi-lo) lands in (lo, hi].
    service = params.service_hi - rng.uniform(0.0, span, size=params.n)
    targets = [
        TargetNode(ndep + i, float(xy[i, 0]), float(xy[i, 1]), float(service[i]))
        for i in range(params.n)
    ]

    vehicles = []
    vid = 0
    for d in range(ndep):
        for _ in range(params.fleet_sizes[d]):
            vehicles.append(Vehicle(vid, d, params.budgets[d]))
            vid += 1

    return Instance(targets, depots, vehicles, params.speed)


def singleton_trip_time(instance: Instance, target_id: int, vehicle: Vehicle) -> float:
    """Round trip depot -> target -> depot plus the service time."""
    leg = instance.travel_time(vehicle.home_depot, target_id)
    return 2.0 * leg + instance.target_by_id[target_id].service_time


def _vehicle_allowed(instance: Instance, target_id: int, vehicle: Vehicle) -> bool:
    dep = instance.allowed_depot(target_id)
    return dep is None or dep == vehicle.home_depot


def preprocess_unreachable(instance: Instance) -> tuple[Instance, list[int]]:
    """Drop targets no vehicle can serve even as a one-stop trip.

    After this pass every remaining target has at least one feasible covering
    sequence (its own singleton), which the solvers rely on.
    """
    removed = []
    for t in instance.targets:
        ok = any(
            _vehicle_allowed(instance, t.id, v)
            and singleton_trip_time(instance, t.id, v) <= v.budget + EPS
            for v in instance.vehicles
        )
        if not ok:
            removed.append(t.id)
    if not removed:
        return instance, []
    return instance.without_targets(removed), removed


@dataclass
class ValidationReport:
    """Outcome of validate_solution: feasible iff violations is empty."""

    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {kind for kind, _ in self.violations}

    def add(self, kind: str, detail: str) -> None:
        self.violations.append((kind, detail))


def validate_solution(instance: Instance, solution: "Solution") -> ValidationReport:
    """Independently check a solution against every model constraint.

    Trip durations and loads are recomputed leg by leg from the instance;
    nothing the solver reported is trusted.  Violations are data, not errors.
    """
    report = ValidationReport()
    seen: dict[int, int] = {}
    loads_rec: dict[int, float] = {v.id: 0.0 for v in instance.vehicles}

    for seq, vid in solution.assignments:
        nodes = list(seq.nodes)
        if not nodes:
            report.add(INCOMPATIBLE_ASSIGNMENT, "empty sequence in solution")
            continue
        if vid not in instance.vehicle_by_id:
            report.add(INCOMPATIBLE_ASSIGNMENT, f"unknown vehicle {vid}")
            continue
        bad = [i for i in nodes if i not in instance.target_by_id]
        if bad:
            report.add(INCOMPATIBLE_ASSIGNMENT, f"unknown targets {bad} in sequence")
            continue
        if len(set(nodes)) != len(nodes):
            report.add(INCOMPATIBLE_ASSIGNMENT, f"repeated targets in sequence {nodes}")
            continue

        vehicle = instance.vehicle_by_id[vid]
        for i in nodes:
            seen[i] = seen.get(i, 0) + 1
            if not _vehicle_allowed(instance, i, vehicle):
                report.add(
                    INCOMPATIBLE_ASSIGNMENT,
                    f"target {i} is restricted away from vehicle {vid}",
                )

        dur = instance.travel_time(vehicle.home_depot, nodes[0])
        for a, b in zip(nodes, nodes[1:]):
            dur += instance.travel_time(a, b)
        dur += instance.travel_time(nodes[-1], vehicle.home_depot)
        dur += sum(instance.target_by_id[i].service_time for i in nodes)

        if dur > vehicle.budget + EPS:
            report.add(
                BUDGET_EXCEEDED,
                f"trip {nodes} on vehicle {vid} lasts {dur:.6f} > budget {vehicle.budget}",
            )
        loads_rec[vid] += dur

    for t in instance.targets:
        count = seen.get(t.id, 0)
        if count == 0:
            report.add(UNCOVERED_TARGET, f"target {t.id} is not covered")
        elif count > 1:
            report.add(MULTIPLY_COVERED_TARGET, f"target {t.id} covered {count} times")

    declared = dict(solution.loads)
    for vid, load in loads_rec.items():
        if abs(declared.get(vid, 0.0) - load) > 1e-6:
            report.add(
                LOAD_MISMATCH,
                f"vehicle {vid}: declared load {declared.get(vid, 0.0):.6f}"
                f" != recomputed {load:.6f}",
            )
    tau_rec = max(loads_rec.values(), default=0.0)
    if abs(solution.tau - tau_rec) > 1e-6:
        report.add(
            TAU_MISMATCH,
            f"declared tau {solution.tau:.6f} != recomputed {tau_rec:.6f}",
        )
    return report
