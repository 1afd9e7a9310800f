"""
Instance Generator
Seeded synthetic instances: a random tree rail network, demands between
original yards, and investment plans on the potential nodes.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from modules.exceptions import GeneratorSpecError
from modules.instance_model import (
    CARS_PER_TRACK,
    Demand,
    EconomicParams,
    Edge,
    Instance,
    InvestmentPlan,
    Node,
    TrackFunction,
    YardAttributes,
    derive_itineraries,
)

logger = logging.getLogger(__name__)

# Share of potential nodes drawn as new (greenfield) sites
NEW_SITE_SHARE = 0.3


@dataclass(frozen=True)
class GeneratorSpec:
    node_count: int = 6
    potential_fraction: float = 0.5
    plans_per_node: int = 2
    demand_density: float = 0.3
    capacity_slack: float = 1.5
    rng_seed: int = 0

    def check(self):
        """Raise GeneratorSpecError on contradictory or out-of-range settings."""
        if self.node_count < 2:
            raise GeneratorSpecError(f"node_count must be at least 2, got {self.node_count}")
        if not 0 <= self.potential_fraction <= 1:
            raise GeneratorSpecError(f"potential_fraction must lie in [0, 1], got {self.potential_fraction}")
        if self.plans_per_node < 1:
            raise GeneratorSpecError(f"plans_per_node must be positive, got {self.plans_per_node}")
        if not 0 < self.demand_density <= 1:
            raise GeneratorSpecError(f"demand_density must lie in (0, 1], got {self.demand_density}")
        if not self.capacity_slack > 0:
            raise GeneratorSpecError(f"capacity_slack must be positive, got {self.capacity_slack}")
        if self.rng_seed < 0:
            raise GeneratorSpecError(f"rng_seed must be non-negative, got {self.rng_seed}")


class InstanceGenerator:
    def __init__(self, spec: GeneratorSpec):
        """Initialize the generator; GeneratorSpec.check() runs first."""
        spec.check()
        self.spec = spec
        self.rng = np.random.default_rng(spec.rng_seed)
        width = len(str(spec.node_count))
        self.node_ids = [f"Y{index:0{width}d}" for index in range(1, spec.node_count + 1)]

    def generate(self) -> Instance:
        """
        Build an instance that validates and whose all-Direct assignment is feasible.

        Every original yard carries the tracks its own direct services need
        plus at least one spare; capacities are capacity_slack times the
        largest single demand that can be reclassified there.
        """
        spec = self.spec
        edges = self._tree_edges()
        potential = self._pick_potential()
        new_sites = self._pick_new_sites(potential)
        originals = [node_id for node_id in self.node_ids if node_id not in new_sites]

        demands = self._demands(originals)
        skeleton = Instance(
            nodes=tuple(Node(node_id, node_id not in new_sites, node_id in potential, YardAttributes())
                        for node_id in self.node_ids),
            demands=tuple(demands),
            itineraries={},
            economics=EconomicParams(budget=0.0, discount_rate=0.1, car_hour_value=1.0),
            edges=tuple(edges),
        )
        routed = derive_itineraries(skeleton)
        largest = self._largest_relay(routed, demands)

        nodes = []
        for node_id in self.node_ids:
            attrs = self._attributes(node_id, node_id in new_sites, demands, largest)
            plans = self._plans(attrs, node_id in new_sites) if node_id in potential else ()
            nodes.append(Node(node_id, node_id not in new_sites, node_id in potential, attrs, plans))

        first_plan_costs = sum(node.plans[0].cost for node in nodes if node.plans)
        economics = EconomicParams(
            budget=float(round(0.5 * first_plan_costs)),
            discount_rate=0.1,
            car_hour_value=float(self.rng.integers(20, 61)),
            train_size_default=50.0,
            track_fn=TrackFunction.step(),
        )
        instance = Instance(
            nodes=tuple(nodes),
            demands=tuple(demands),
            itineraries=routed.itineraries,
            economics=economics,
            edges=tuple(edges),
        )
        logger.info("generated %d nodes (%d potential, %d new sites), %d demands, seed %d",
                    len(nodes), len(potential), len(new_sites), len(demands), spec.rng_seed)
        return instance

    def _tree_edges(self) -> List[Edge]:
        edges = []
        for index in range(1, len(self.node_ids)):
            parent = int(self.rng.integers(index))
            length = float(self.rng.integers(10, 101)) / 10
            edges.append(Edge(self.node_ids[parent], self.node_ids[index], length))
        return edges

    def _pick_potential(self) -> set:
        count = round(self.spec.potential_fraction * len(self.node_ids))
        chosen = self.rng.choice(len(self.node_ids), size=count, replace=False)
        return {self.node_ids[int(index)] for index in chosen}

    def _pick_new_sites(self, potential: set) -> set:
        # At least two original yards must remain to carry demand
        room = len(self.node_ids) - 2
        new_sites = set()
        for node_id in sorted(potential):
            if len(new_sites) < room and self.rng.random() < NEW_SITE_SHARE:
                new_sites.add(node_id)
        return new_sites

    def _demands(self, originals: List[str]) -> List[Demand]:
        demands = []
        for origin in originals:
            for destination in originals:
                if origin != destination and self.rng.random() < self.spec.demand_density:
                    volume = float(self.rng.integers(20, int(CARS_PER_TRACK) + 1))
                    demands.append(Demand(origin, destination, volume))
        if not demands:
            demands.append(Demand(originals[0], originals[1], float(self.rng.integers(20, 201))))
        return demands

    @staticmethod
    def _largest_relay(routed: Instance, demands: List[Demand]) -> Dict[str, float]:
        """Largest single demand volume whose itinerary passes each node."""
        largest: Dict[str, float] = {}
        for demand in demands:
            for k in routed.via(demand.origin, demand.destination):
                largest[k] = max(largest.get(k, 0.0), demand.volume)
        return largest

    def _attributes(self, node_id: str, new_site: bool, demands: List[Demand],
                    largest: Dict[str, float]) -> YardAttributes:
        accumulation = float(self.rng.integers(6, 16))
        tau = float(self.rng.integers(15, 41)) / 10
        if new_site:
            return YardAttributes(accumulation_param=accumulation, reclass_cost=tau)

        own_tracks = sum(math.ceil(d.volume / CARS_PER_TRACK) for d in demands if d.origin == node_id)
        tracks_local = int(self.rng.integers(0, 3))
        spare = 1 + int(self.rng.integers(0, 2))
        capacity_local = float(self.rng.integers(0, 51))
        reference = largest.get(node_id, 100.0)
        capacity = float(math.ceil(self.spec.capacity_slack * reference))
        return YardAttributes(
            accumulation_param=accumulation,
            capacity_total=capacity + capacity_local,
            capacity_local=capacity_local,
            tracks_total=own_tracks + tracks_local + spare,
            tracks_local=tracks_local,
            reclass_cost=tau,
        )

    def _plans(self, attrs: YardAttributes, new_site: bool) -> tuple:
        plans = []
        base_gain = max(attrs.available_capacity, 100.0)
        for plan_id in range(1, self.spec.plans_per_node + 1):
            cost = float(self.rng.integers(5, 51)) * 10000 * plan_id
            lifetime = int(self.rng.integers(10, 41))
            if new_site:
                tau_after = float(self.rng.integers(10, 31)) / 10
                tracks_gain = 2 + plan_id
            else:
                tau_after = max(0.1, round(attrs.reclass_cost * (1 - 0.15 * plan_id), 2))
                tracks_gain = plan_id
            plans.append(InvestmentPlan(
                plan_id=plan_id,
                cost=cost,
                lifetime_years=lifetime,
                reclass_cost_after=tau_after,
                capacity_gain=float(math.ceil(base_gain * 0.5 * plan_id)),
                tracks_gain=tracks_gain,
            ))
        return tuple(plans)


def generate_instance(spec: GeneratorSpec) -> Instance:
    """
    Build one random instance.

    Args:
        spec: Generator parameters, including the RNG seed

    Returns:
        Instance with derived itineraries; equal specs give equal instances
    """
    return InstanceGenerator(spec).generate()
