"""
Flow Engine
Evaluates a train connecting service (TCS) assignment under an investment
decision: car flows, yard workloads, service flows, track demand,
feasibility and the daily operating cost in car-hours.
"""

import bisect
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

import networkx as nx

from modules.exceptions import (
    InvalidRouteError,
    RoutingCycleError,
    TrackOverflowError,
    UnassignedPairError,
)
from modules.instance_model import CARS_PER_TRACK, Instance, Pair, TrackFunction, derive_itineraries

logger = logging.getLogger(__name__)

# Slack for comparing accumulated float flows against capacities
TOLERANCE = 1e-9


@dataclass(frozen=True)
class InvestmentDecision:
    """One plan index per potential node; 0 is the implicit no-investment plan."""
    choice: Mapping[str, int] = field(default_factory=dict)

    @classmethod
    def baseline(cls, instance: Instance) -> "InvestmentDecision":
        return cls({node_id: 0 for node_id in instance.potential_ids})

    @classmethod
    def from_vector(cls, instance: Instance, vector) -> "InvestmentDecision":
        """
        Decision from a plan-index vector.

        Args:
            instance: Instance whose potential_ids fix the vector order
            vector: Plan indices, one per potential node in ID order

        Returns:
            InvestmentDecision keyed by node ID
        """
        return cls(dict(zip(instance.potential_ids, vector)))

    def vector(self, instance: Instance) -> Tuple[int, ...]:
        """Plan indices in potential_ids order; the inverse of from_vector."""
        return tuple(self.choice[node_id] for node_id in instance.potential_ids)

    def plan_index(self, node_id: str) -> int:
        """Chosen plan of a node; nodes not listed take plan 0."""
        return self.choice.get(node_id, 0)

    def check(self, instance: Instance):
        """Raise ValueError unless exactly one valid plan index is set per potential node."""
        if set(self.choice) != set(instance.potential_ids):
            raise ValueError("decision must name every potential node exactly once")
        for node_id, index in self.choice.items():
            if not 0 <= index <= len(instance.node(node_id).plans):
                raise ValueError(f"node {node_id} has no plan {index}")


@dataclass(frozen=True, order=True)
class Route:
    """Route of one (origin, destination) pair: Direct, or Via(k) to reclassify at k."""
    rank: int = 0
    via: str = ""

    @classmethod
    def direct(cls) -> "Route":
        return cls(0, "")

    @classmethod
    def through(cls, yard: str) -> "Route":
        return cls(1, yard)

    @property
    def is_direct(self) -> bool:
        return self.rank == 0

    def __str__(self) -> str:
        return "direct" if self.is_direct else f"via:{self.via}"


DIRECT = Route.direct()


@dataclass(frozen=True)
class TcsAssignment:
    routes: Mapping[Pair, Route] = field(default_factory=dict)

    def route(self, pair: Pair) -> Optional[Route]:
        return self.routes.get(pair)

    def restricted_to(self, pairs) -> "TcsAssignment":
        return TcsAssignment({pair: self.routes[pair] for pair in sorted(pairs) if pair in self.routes})

    def key(self) -> Tuple:
        return tuple(sorted(self.routes.items()))


@dataclass(frozen=True)
class EffectiveYard:
    capacity: float
    tracks: float
    tau: float


class Scenario:
    """An instance seen under one investment decision."""

    def __init__(self, instance: Instance, decision: InvestmentDecision):
        if not instance.itineraries_complete:
            instance = derive_itineraries(instance)
        decision.check(instance)
        self.instance = instance
        self.decision = decision
        self.effective: Dict[str, EffectiveYard] = {}
        for node in instance.nodes:
            attrs = node.attrs
            capacity = attrs.available_capacity
            tracks = attrs.available_tracks
            tau = attrs.reclass_cost
            plan = node.plan(decision.plan_index(node.id)) if node.is_potential else None
            if plan is not None:
                capacity += plan.capacity_gain
                tracks += plan.tracks_gain
                tau = plan.reclass_cost_after
            self.effective[node.id] = EffectiveYard(capacity, tracks, tau)

    @classmethod
    def baseline(cls, instance: Instance) -> "Scenario":
        return cls(instance, InvestmentDecision.baseline(instance))

    def via(self, pair: Pair) -> Tuple[str, ...]:
        return self.instance.via(*pair)

    def choices(self, pair: Pair) -> List[Route]:
        """Route choices of a pair in tie-break order: Direct, then Via(k) by node ID."""
        return [DIRECT] + [Route.through(k) for k in sorted(self.via(pair))]

    def train_size(self, pair: Pair) -> float:
        """Cars per train on the pair's service."""
        return self.instance.economics.train_size(*pair)

    @property
    def track_fn(self) -> TrackFunction:
        return self.instance.economics.track_fn


@dataclass(frozen=True)
class FlowState:
    f: Dict[Pair, float]
    F: Dict[str, float]
    D: Dict[Pair, float]
    provided_services: FrozenSet[Pair]

    def workload(self, node_id: str) -> float:
        return self.F.get(node_id, 0.0)


@dataclass(frozen=True)
class CostBreakdown:
    accumulation: float
    reclassification: float
    z_total: float
    reclassification_original: float = 0.0
    reclassification_potential: float = 0.0


@dataclass(frozen=True)
class FeasibilityViolation:
    kind: str
    location: str
    lhs: float
    rhs: float

    CAPACITY = "CapacityExceeded"
    TRACKS = "TracksExceeded"
    CYCLE = "RoutingCycle"
    ROUTE = "InvalidRoute"

    @property
    def excess(self) -> float:
        return self.lhs - self.rhs

    def __str__(self) -> str:
        return f"{self.kind}({self.location}, {self.lhs:g}, {self.rhs:g})"


@dataclass(frozen=True)
class FeasibilityReport:
    violations: Tuple[FeasibilityViolation, ...] = ()

    @property
    def feasible(self) -> bool:
        return not self.violations

    def total_excess(self) -> float:
        return sum(v.excess for v in self.violations)

    def worst(self) -> Optional[FeasibilityViolation]:
        if not self.violations:
            return None
        return max(self.violations, key=lambda v: (v.excess, v.kind, v.location))


def compute_flows(scenario: Scenario, assignment: TcsAssignment) -> FlowState:
    """
    Propagate demand through the assignment, one destination at a time.

    Cars at node i bound for j ride service i->j when the route is Direct, or
    service i->k and join k's flow toward j when the route is Via(k).

    Raises:
        UnassignedPairError: flow reaches a pair without a route entry
        InvalidRouteError: Via(k) with k outside the pair's itinerary
        RoutingCycleError: the Via graph of some destination has a cycle
    """
    origins_by_destination: Dict[str, Dict[str, float]] = {}
    for (origin, destination), volume in scenario.instance.demand_volume.items():
        origins_by_destination.setdefault(destination, {})[origin] = volume

    f: Dict[Pair, float] = {}
    F: Dict[str, float] = {}
    D: Dict[Pair, float] = {}

    for destination in sorted(origins_by_destination):
        demand = origins_by_destination[destination]
        graph = nx.DiGraph()
        pending = sorted(demand)
        graph.add_nodes_from(pending)
        visited = set(pending)
        while pending:
            node = pending.pop()
            pair = (node, destination)
            route = assignment.route(pair)
            if route is None:
                raise UnassignedPairError(pair)
            if route.is_direct:
                continue
            if route.via not in scenario.via(pair):
                raise InvalidRouteError(f"{pair[0]}->{pair[1]} routed via {route.via}, not on its itinerary")
            graph.add_edge(node, route.via)
            if route.via not in visited:
                visited.add(route.via)
                pending.append(route.via)

        try:
            order = list(nx.lexicographical_topological_sort(graph))
        except nx.NetworkXUnfeasible:
            cycle = tuple(u for u, _ in nx.find_cycle(graph))
            raise RoutingCycleError(destination, cycle)

        inflow = {node: demand.get(node, 0.0) for node in order}
        for node in order:
            flow = inflow[node]
            if flow <= 0:
                continue
            pair = (node, destination)
            f[pair] = flow
            route = assignment.routes[pair]
            if route.is_direct:
                D[pair] = D.get(pair, 0.0) + flow
            else:
                inflow[route.via] += flow
                F[route.via] = F.get(route.via, 0.0) + flow
                service = (node, route.via)
                D[service] = D.get(service, 0.0) + flow

    provided = frozenset(pair for pair, flow in D.items() if flow > 0)
    return FlowState(
        f=dict(sorted(f.items())),
        F=dict(sorted(F.items())),
        D=dict(sorted(D.items())),
        provided_services=provided,
    )


def track_demand(service_flow: float, fn: TrackFunction) -> float:
    """
    Tracks needed by a service carrying service_flow railcars per day.

    Linear gives D / 200 (fractional); step gives the smallest n with D <= a_n.

    Raises:
        TrackOverflowError: D above the largest configured step threshold
    """
    if service_flow < 0:
        raise ValueError(f"service flow must be non-negative, got {service_flow}")
    if fn.kind == TrackFunction.LINEAR:
        return service_flow / CARS_PER_TRACK
    if service_flow == 0:
        return 0
    if fn.thresholds is None:
        return math.ceil(service_flow / CARS_PER_TRACK)
    index = bisect.bisect_left(fn.thresholds, service_flow)
    if index == len(fn.thresholds):
        raise TrackOverflowError(service_flow, fn.thresholds[-1])
    return index + 1


def tracks_by_origin(scenario: Scenario, flows: FlowState) -> Dict[str, float]:
    """Sum of track demand over each origin's services; math.inf on threshold overflow."""
    used: Dict[str, float] = {}
    for (origin, _), service_flow in flows.D.items():
        try:
            tracks = track_demand(service_flow, scenario.track_fn)
        except TrackOverflowError:
            tracks = math.inf
        used[origin] = used.get(origin, 0) + tracks
    return used


def check_feasibility(scenario: Scenario, assignment: TcsAssignment, flows: FlowState) -> FeasibilityReport:
    """Capacity and track constraints, plus a re-check that every route is on its itinerary."""
    violations = []
    for pair, route in sorted(assignment.routes.items()):
        if not route.is_direct and route.via not in scenario.via(pair):
            violations.append(FeasibilityViolation(
                FeasibilityViolation.ROUTE, f"{pair[0]}->{pair[1]}", 1, 0))

    for node_id, workload in flows.F.items():
        capacity = scenario.effective[node_id].capacity
        if workload > capacity + TOLERANCE:
            violations.append(FeasibilityViolation(FeasibilityViolation.CAPACITY, node_id, workload, capacity))

    for node_id, tracks in sorted(tracks_by_origin(scenario, flows).items()):
        available = scenario.effective[node_id].tracks
        if tracks > available + TOLERANCE:
            violations.append(FeasibilityViolation(FeasibilityViolation.TRACKS, node_id, tracks, available))

    return FeasibilityReport(tuple(violations))


def operating_cost(scenario: Scenario, assignment: TcsAssignment, flows: FlowState) -> CostBreakdown:
    """Daily car-hours: accumulation per provided service plus reclassification per car."""
    instance = scenario.instance
    accumulation = 0.0
    for origin, destination in sorted(flows.provided_services):
        accumulation += (instance.node(origin).attrs.accumulation_param
                         * scenario.train_size((origin, destination)))

    on_original = 0.0
    on_potential = 0.0
    for node_id, workload in flows.F.items():
        cost = workload * scenario.effective[node_id].tau
        if instance.node(node_id).is_potential:
            on_potential += cost
        else:
            on_original += cost
    reclassification = on_original + on_potential
    return CostBreakdown(
        accumulation=accumulation,
        reclassification=reclassification,
        z_total=accumulation + reclassification,
        reclassification_original=on_original,
        reclassification_potential=on_potential,
    )


@dataclass(frozen=True)
class Evaluation:
    assignment: TcsAssignment
    flows: FlowState
    feasibility: FeasibilityReport
    cost: CostBreakdown


def evaluate_assignment(scenario: Scenario, assignment: TcsAssignment) -> Evaluation:
    """compute_flows, check_feasibility and operating_cost in one call; routes with no flow are dropped."""
    flows = compute_flows(scenario, assignment)
    active = assignment.restricted_to(flows.f)
    return Evaluation(
        assignment=active,
        flows=flows,
        feasibility=check_feasibility(scenario, active, flows),
        cost=operating_cost(scenario, active, flows),
    )
