"""Hand-built instances shared by the test modules."""

from multitrip import (
    Depot,
    GeneratorParams,
    Instance,
    TargetNode,
    Vehicle,
    generate_random_instance,
    preprocess_unreachable,
)


def line_instance(xs=(1.0, 2.0, 3.0, 4.0), service=1.0, budget=30.0, n_vehicles=1):
    """One depot at the origin, targets strung along the x axis."""
    targets = [TargetNode(1 + i, float(x), 0.0, service) for i, x in enumerate(xs)]
    depots = [Depot(0, 0.0, 0.0)]
    vehicles = [Vehicle(i, 0, budget) for i in range(n_vehicles)]
    return Instance(targets, depots, vehicles)


def two_depot_instance(budgets=(30.0, 50.0)):
    """Two depots 10 km apart with five targets scattered between them."""
    depots = [Depot(0, 0.0, 0.0), Depot(1, 10.0, 0.0)]
    coords = [(2.0, 1.0), (4.0, 3.0), (5.0, 0.5), (7.0, 2.0), (9.0, 1.5)]
    targets = [TargetNode(2 + i, x, y, 1.0 + 0.5 * i) for i, (x, y) in enumerate(coords)]
    vehicles = [Vehicle(0, 0, budgets[0]), Vehicle(1, 1, budgets[1])]
    return Instance(targets, depots, vehicles)


def matrix_instance():
    """Three targets with an explicit, deliberately non-Euclidean matrix."""
    depots = [Depot(0, 0.0, 0.0)]
    targets = [
        TargetNode(1, 1.0, 0.0, 2.0),
        TargetNode(2, 2.0, 0.0, 2.0),
        TargetNode(3, 3.0, 0.0, 2.0),
    ]
    vehicles = [Vehicle(0, 0, 40.0)]
    travel = {
        (0, 1): 4.0, (0, 2): 5.0, (0, 3): 7.0,
        (1, 2): 2.0, (1, 3): 10.0, (2, 3): 3.0,
    }
    return Instance(targets, depots, vehicles, travel_minutes=travel)


def random_instance(seed, n=6, depots=2, vehicles_per_depot=1, budgets=None,
                    side=15.0):
    """Seeded generator instance, preprocessed, for oracle comparisons."""
    if budgets is None:
        budgets = (30.0, 50.0, 40.0, 20.0)[:depots]
    params = GeneratorParams(
        n=n,
        side=side,
        depot_corners=tuple(range(depots)),
        fleet_sizes=(vehicles_per_depot,) * depots,
        budgets=budgets,
    )
    inst, _ = preprocess_unreachable(generate_random_instance(params, seed))
    return inst
