"""
Instance builders shared by the yardloc tests.
"""

import math

import numpy as np

from modules.instance_model import (
    CARS_PER_TRACK,
    Demand,
    EconomicParams,
    Edge,
    Instance,
    InvestmentPlan,
    Itinerary,
    Node,
    TrackFunction,
    YardAttributes,
)


def yard(node_id, c=10.0, capacity=500.0, tracks=4, tau=2.0, potential=False, plans=()):
    """An original yard with no local reservations."""
    attrs = YardAttributes(accumulation_param=c, capacity_total=capacity, tracks_total=tracks, reclass_cost=tau)
    return Node(node_id, True, potential, attrs, tuple(plans))


def plan(plan_id, cost, lifetime=20, tau_after=2.0, cap_gain=0.0, tracks_gain=0):
    return InvestmentPlan(plan_id, cost, lifetime, tau_after, cap_gain, tracks_gain)


def line_instance(capacity_b=500.0, tau_b=2.0, plans_b=(), budget=0.0, car_hour_value=1.0,
                  track_fn=None) -> Instance:
    """A-B-C line: demands A->C 100, A->B 50, B->C 70; A->C passes B."""
    nodes = (
        yard("A"),
        yard("B", capacity=capacity_b, tau=tau_b, potential=bool(plans_b), plans=plans_b),
        yard("C"),
    )
    return Instance(
        nodes=nodes,
        demands=(Demand("A", "C", 100.0), Demand("A", "B", 50.0), Demand("B", "C", 70.0)),
        itineraries={
            ("A", "C"): Itinerary("A", "C", ("B",)),
            ("A", "B"): Itinerary("A", "B", ()),
            ("B", "C"): Itinerary("B", "C", ()),
        },
        economics=EconomicParams(
            budget=budget,
            discount_rate=0.1,
            car_hour_value=car_hour_value,
            track_fn=track_fn or TrackFunction.step(),
        ),
        edges=(Edge("A", "B", 1.0), Edge("B", "C", 1.0)),
    )


def random_small_instance(seed: int, max_yards: int = 4, max_demands: int = 6) -> Instance:
    """
    Seeded path network with up to max_yards yards and max_demands demands.

    Each yard has the tracks its own direct services need plus up to two
    spares, so the all-Direct assignment is always feasible.
    """
    rng = np.random.default_rng(seed)
    count = int(rng.integers(2, max_yards + 1))
    ids = [chr(ord("A") + i) for i in range(count)]
    pairs = [(o, d) for o in ids for d in ids if o != d]
    size = min(len(pairs), int(rng.integers(1, max_demands + 1)))
    picked = sorted(int(i) for i in rng.choice(len(pairs), size=size, replace=False))
    demands = tuple(Demand(*pairs[i], float(rng.integers(10, 300))) for i in picked)

    nodes = []
    for node_id in ids:
        own = sum(math.ceil(d.volume / CARS_PER_TRACK) for d in demands if d.origin == node_id)
        nodes.append(yard(
            node_id,
            c=float(rng.integers(5, 15)),
            capacity=float(rng.integers(0, 400)),
            tracks=own + int(rng.integers(0, 3)),
            tau=float(rng.integers(1, 5)),
        ))
    edges = tuple(Edge(ids[i], ids[i + 1], 1.0) for i in range(count - 1))
    return Instance(
        nodes=tuple(nodes),
        demands=demands,
        itineraries={},
        economics=EconomicParams(budget=0.0, discount_rate=0.1, car_hour_value=1.0),
        edges=edges,
    )


def random_investment_instance(seed: int) -> Instance:
    """A random small instance whose yards all carry one or two investment plans."""
    rng = np.random.default_rng(seed + 1000)
    base = random_small_instance(seed, max_yards=3, max_demands=4)
    nodes = []
    for node in base.nodes:
        plans = tuple(
            plan(index, float(rng.integers(1, 20)) * 10000, int(rng.integers(5, 30)),
                 float(rng.integers(0, 3)), float(rng.integers(0, 300)), int(rng.integers(0, 3)))
            for index in range(1, int(rng.integers(1, 3)) + 1)
        )
        nodes.append(Node(node.id, True, True, node.attrs, plans))
    return Instance(
        nodes=tuple(nodes),
        demands=base.demands,
        itineraries={},
        economics=EconomicParams(budget=0.0, discount_rate=0.1, car_hour_value=float(rng.integers(1, 50))),
        edges=base.edges,
    )
