"""
Instance Model
Domain types for the multi-yard location-allocation problem, the instance
file codec, structural validation and itinerary derivation.
"""

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Tuple

import networkx as nx

from modules.exceptions import InstanceFormatError, InstanceValidationError, ItineraryError

logger = logging.getLogger(__name__)

INSTANCE_FORMAT = "yardloc-instance-v1"

# Railcars per classification track (linear track demand, default step width)
CARS_PER_TRACK = 200.0

Pair = Tuple[str, str]


@dataclass(frozen=True)
class YardAttributes:
    accumulation_param: float = 0.0
    capacity_total: float = 0.0
    capacity_local: float = 0.0
    tracks_total: int = 0
    tracks_local: int = 0
    reclass_cost: float = 0.0

    @property
    def available_capacity(self) -> float:
        """Capacity left for relayed cars once local traffic is served."""
        return self.capacity_total - self.capacity_local

    @property
    def available_tracks(self) -> int:
        """Classification tracks not held by local traffic."""
        return self.tracks_total - self.tracks_local

    def is_bare_site(self) -> bool:
        """A greenfield node with no capacity or tracks yet."""
        return (self.capacity_total == 0 and self.capacity_local == 0
                and self.tracks_total == 0 and self.tracks_local == 0)


@dataclass(frozen=True)
class InvestmentPlan:
    plan_id: int
    cost: float
    lifetime_years: int
    reclass_cost_after: float
    capacity_gain: float = 0.0
    tracks_gain: int = 0


@dataclass(frozen=True)
class Node:
    id: str
    is_original_yard: bool
    is_potential: bool
    attrs: YardAttributes
    plans: Tuple[InvestmentPlan, ...] = ()

    @property
    def is_new_site(self) -> bool:
        return self.is_potential and not self.is_original_yard

    def plan(self, index: int) -> Optional[InvestmentPlan]:
        """Plan by 1-based index; index 0 is the implicit no-investment plan."""
        if index == 0:
            return None
        if index < 0 or index > len(self.plans):
            raise IndexError(f"node {self.id} has no plan {index}")
        return self.plans[index - 1]


@dataclass(frozen=True)
class Demand:
    origin: str
    destination: str
    volume: float

    @property
    def pair(self) -> Pair:
        return (self.origin, self.destination)


@dataclass(frozen=True)
class Itinerary:
    origin: str
    destination: str
    via: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    length: float


@dataclass(frozen=True)
class TrackFunction:
    """Track demand function: linear (D / 200) or step with thresholds a_1 < ... < a_n.

    A step function with thresholds=None uses a_n = 200 n without an upper end.
    """
    kind: str = "step"
    thresholds: Optional[Tuple[float, ...]] = None

    LINEAR = "linear"
    STEP = "step"

    @classmethod
    def linear(cls) -> "TrackFunction":
        return cls(kind=cls.LINEAR)

    @classmethod
    def step(cls, thresholds=None) -> "TrackFunction":
        """
        Step track demand.

        Args:
            thresholds: Increasing flow bounds a_1 < ... < a_n, or None for a_n = 200 n

        Returns:
            TrackFunction of kind step
        """
        return cls(kind=cls.STEP, thresholds=tuple(thresholds) if thresholds is not None else None)


@dataclass(frozen=True)
class EconomicParams:
    budget: float
    discount_rate: float
    car_hour_value: float
    train_size_default: float = 50.0
    train_size_overrides: Mapping[Pair, float] = field(default_factory=dict)
    track_fn: TrackFunction = field(default_factory=TrackFunction)
    days_per_year: int = 365

    def train_size(self, origin: str, destination: str) -> float:
        """Pair override if one is set, otherwise the default train size."""
        return self.train_size_overrides.get((origin, destination), self.train_size_default)


@dataclass(frozen=True)
class Instance:
    nodes: Tuple[Node, ...]
    demands: Tuple[Demand, ...]
    itineraries: Mapping[Pair, Itinerary]
    economics: EconomicParams
    edges: Tuple[Edge, ...] = ()

    @cached_property
    def node_map(self) -> Dict[str, Node]:
        return {node.id: node for node in self.nodes}

    def node(self, node_id: str) -> Node:
        """Node by ID; raises KeyError for an unknown ID."""
        return self.node_map[node_id]

    @cached_property
    def potential_ids(self) -> Tuple[str, ...]:
        """Potential nodes sorted by ID; the order of every decision vector."""
        return tuple(sorted(node.id for node in self.nodes if node.is_potential))

    @cached_property
    def demand_volume(self) -> Dict[Pair, float]:
        """Total volume per (origin, destination); repeated demands are summed."""
        volumes: Dict[Pair, float] = {}
        for demand in self.demands:
            volumes[demand.pair] = volumes.get(demand.pair, 0.0) + demand.volume
        return volumes

    def via(self, origin: str, destination: str) -> Tuple[str, ...]:
        """
        Intermediate nodes passed by the pair's itinerary, in travel order.

        Args:
            origin: Origin node ID
            destination: Destination node ID

        Returns:
            Tuple of node IDs strictly between origin and destination

        Raises:
            ItineraryError: the pair has no itinerary
        """
        itinerary = self.itineraries.get((origin, destination))
        if itinerary is None:
            raise ItineraryError(f"no itinerary for {origin}->{destination}; run derive_itineraries first")
        return itinerary.via

    @cached_property
    def pair_closure(self) -> Tuple[Pair, ...]:
        """Demand pairs plus every (k, j) reachable by relaying flow at k on an itinerary."""
        seen = set(self.demand_volume)
        queue = deque(sorted(seen))
        while queue:
            origin, destination = queue.popleft()
            for k in self.via(origin, destination):
                induced = (k, destination)
                if induced not in seen:
                    seen.add(induced)
                    queue.append(induced)
        return tuple(sorted(seen))

    @cached_property
    def itineraries_complete(self) -> bool:
        try:
            self.pair_closure
        except ItineraryError:
            return False
        return True

    def with_economics(self, **changes) -> "Instance":
        """
        Copy of the instance with some economic parameters replaced.

        Args:
            **changes: EconomicParams fields to override, e.g. budget or track_fn

        Returns:
            New Instance; nodes, demands and itineraries are shared
        """
        return replace(self, economics=replace(self.economics, **changes))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    rule_id: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule_id}\t{self.location}\t{self.message}"


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)
    warnings: List[Violation] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def add(self, rule_id: str, location: str, message: str):
        self.violations.append(Violation(rule_id, location, message))

    def warn(self, rule_id: str, location: str, message: str):
        self.warnings.append(Violation(rule_id, location, message))

    def rule_ids(self) -> List[str]:
        return sorted({v.rule_id for v in self.violations})


def validate_instance(instance: Instance) -> ValidationReport:
    """
    Check every structural invariant of an instance.

    Returns:
        ValidationReport; empty violations iff the instance is usable by the solvers
    """
    report = ValidationReport()
    known = set()

    for node in instance.nodes:
        where = f"node {node.id!r}"
        if not node.id:
            report.add("NODE-ID-EMPTY", where, "node id is empty")
        if node.id in known:
            report.add("NODE-ID-DUPLICATE", where, "node id declared twice")
        known.add(node.id)
        if not (node.is_original_yard or node.is_potential):
            report.add("NODE-NO-ROLE", where, "node is neither an original yard nor a potential node")
        if node.plans and not node.is_potential:
            report.add("NODE-PLANS-NOT-POTENTIAL", where, "plans declared on a non-potential node")
        _check_attributes(report, where, node)
        for index, plan in enumerate(node.plans, start=1):
            _check_plan(report, f"{where} plan {index}", plan, index)

    for index, demand in enumerate(instance.demands):
        where = f"demand {index} {demand.origin}->{demand.destination}"
        for endpoint in (demand.origin, demand.destination):
            if endpoint not in known:
                report.add("UNKNOWN-NODE", where, f"unknown node {endpoint!r}")
        if demand.origin == demand.destination:
            report.add("DEMAND-SELF-LOOP", where, "origin equals destination")
        if not demand.volume > 0:
            report.add("DEMAND-VOLUME", where, f"volume must be positive, got {demand.volume}")
        origin = instance.node_map.get(demand.origin)
        destination = instance.node_map.get(demand.destination)
        for endpoint in (origin, destination):
            if endpoint is not None and endpoint.is_new_site:
                report.warn("DEMAND-AT-UNBUILT-SITE", where,
                            f"{endpoint.id} is a new site; its traffic needs tracks that only an investment provides")

    for (origin, destination), itinerary in sorted(instance.itineraries.items()):
        where = f"itinerary {origin}->{destination}"
        if (itinerary.origin, itinerary.destination) != (origin, destination):
            report.add("ITINERARY-KEY", where, "itinerary endpoints do not match its key")
        for member in (origin, destination) + tuple(itinerary.via):
            if member not in known:
                report.add("UNKNOWN-NODE", where, f"unknown node {member!r}")
        if origin in itinerary.via or destination in itinerary.via:
            report.add("ITINERARY-VIA-ENDPOINT", where, "via contains endpoint")
        if len(set(itinerary.via)) != len(itinerary.via):
            report.add("ITINERARY-VIA-REPEAT", where, "via repeats a node")

    for edge in instance.edges:
        where = f"edge {edge.u}-{edge.v}"
        for member in (edge.u, edge.v):
            if member not in known:
                report.add("UNKNOWN-NODE", where, f"unknown node {member!r}")
        if edge.length < 0:
            report.add("EDGE-NEGATIVE-LENGTH", where, f"negative length {edge.length}")

    _check_routability(report, instance, known)
    _check_economics(report, instance.economics, known)
    return report


def _check_attributes(report: ValidationReport, where: str, node: Node):
    attrs = node.attrs
    for name in ("accumulation_param", "capacity_total", "capacity_local",
                 "tracks_total", "tracks_local", "reclass_cost"):
        if getattr(attrs, name) < 0:
            report.add("ATTR-NEGATIVE", where, f"{name} is negative")
    if attrs.capacity_local > attrs.capacity_total:
        report.add("CAPACITY-LOCAL-EXCEEDS-TOTAL", where, "capacity_local exceeds capacity_total")
    if attrs.tracks_local > attrs.tracks_total:
        report.add("TRACKS-LOCAL-EXCEEDS-TOTAL", where, "tracks_local exceeds tracks_total")
    if node.is_new_site and not attrs.is_bare_site():
        report.add("NEW-SITE-NOT-BARE", where, "a new site must have zero capacity and zero tracks")


def _check_plan(report: ValidationReport, where: str, plan: InvestmentPlan, index: int):
    if plan.plan_id != index:
        report.add("PLAN-ID", where, f"plan_id {plan.plan_id} does not match position {index}")
    if plan.cost < 0:
        report.add("PLAN-COST", where, "cost is negative")
    if plan.lifetime_years < 1:
        report.add("PLAN-LIFETIME", where, "lifetime must be at least one year")
    if plan.reclass_cost_after < 0 or plan.capacity_gain < 0 or plan.tracks_gain < 0:
        report.add("PLAN-NEGATIVE", where, "tau_after, capacity_gain and tracks_gain must be non-negative")


def _check_routability(report: ValidationReport, instance: Instance, known: set):
    # negative edges are reported on their own; route over the rest
    usable = [edge for edge in instance.edges if edge.length >= 0]
    graph = _physical_graph(usable) if usable else None
    for origin, destination in sorted(instance.demand_volume):
        if (origin, destination) in instance.itineraries:
            continue
        routable = (graph is not None and origin in graph and destination in graph
                    and nx.has_path(graph, origin, destination))
        if not routable:
            report.add("UNROUTABLE-DEMAND", f"demand {origin}->{destination}",
                       "unroutable demand: no itinerary and no physical path")


def _check_economics(report: ValidationReport, economics: EconomicParams, known: set):
    where = "economics"
    if economics.budget < 0:
        report.add("ECON-BUDGET", where, "budget is negative")
    if not 0 < economics.discount_rate < 1:
        report.add("ECON-DISCOUNT-RATE", where, "discount_rate must lie in (0, 1)")
    if not economics.car_hour_value > 0:
        report.add("ECON-CAR-HOUR-VALUE", where, "car_hour_value must be positive")
    if economics.days_per_year < 1:
        report.add("ECON-DAYS", where, "days_per_year must be positive")
    if not economics.train_size_default > 0:
        report.add("ECON-TRAIN-SIZE", where, "default train size must be positive")
    for (origin, destination), size in sorted(economics.train_size_overrides.items()):
        if not size > 0:
            report.add("ECON-TRAIN-SIZE", f"{where} {origin}->{destination}", "train size must be positive")
        for member in (origin, destination):
            if member not in known:
                report.add("UNKNOWN-NODE", f"{where} {origin}->{destination}", f"unknown node {member!r}")
    track_fn = economics.track_fn
    if track_fn.kind not in (TrackFunction.LINEAR, TrackFunction.STEP):
        report.add("TRACK-FN-KIND", where, f"unknown track function {track_fn.kind!r}")
    if track_fn.thresholds is not None:
        thresholds = track_fn.thresholds
        if not thresholds or thresholds[0] <= 0 or any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            report.add("TRACK-THRESHOLDS", where, "step thresholds must be positive and strictly increasing")


# ---------------------------------------------------------------------------
# Itineraries
# ---------------------------------------------------------------------------

def _physical_graph(edges) -> nx.Graph:
    graph = nx.Graph()
    for edge in edges:
        if edge.length < 0:
            raise ItineraryError(f"edge {edge.u}-{edge.v} has negative length {edge.length}")
        if graph.has_edge(edge.u, edge.v) and graph[edge.u][edge.v]["length"] <= edge.length:
            continue
        graph.add_edge(edge.u, edge.v, length=float(edge.length))
    return graph


class ShortestPathRouter:
    """Shortest physical paths, ties broken by the lexicographically smallest node sequence."""

    def __init__(self, edges):
        self.graph = _physical_graph(edges)
        self._distances: Dict[str, Dict[str, float]] = {}

    def _distance_to(self, destination: str) -> Dict[str, float]:
        if destination not in self._distances:
            self._distances[destination] = nx.single_source_dijkstra_path_length(
                self.graph, destination, weight="length")
        return self._distances[destination]

    def _next_hops(self, node: str, distance: Dict[str, float]) -> List[str]:
        """Neighbors that keep the walk on a shortest path, in node-ID order."""
        hops = []
        for neighbor in sorted(self.graph.neighbors(node)):
            if neighbor not in distance:
                continue
            through = self.graph[node][neighbor]["length"] + distance[neighbor]
            if math.isclose(distance[node], through, rel_tol=1e-12, abs_tol=1e-9):
                hops.append(neighbor)
        return hops

    def route(self, origin: str, destination: str) -> Tuple[str, ...]:
        """
        Intermediate nodes of the lexicographically smallest simple shortest path.

        Depth-first over the shortest-path subgraph in node-ID order, backing
        out of dead ends such as zero-length spurs.

        Raises:
            ItineraryError: the pair is disconnected
        """
        if origin not in self.graph or destination not in self.graph:
            raise ItineraryError(f"disconnected demand pair {origin}->{destination}")
        distance = self._distance_to(destination)
        if origin not in distance:
            raise ItineraryError(f"disconnected demand pair {origin}->{destination}")

        path = [origin]
        on_path = {origin}
        stack = [iter(self._next_hops(origin, distance))]
        while stack:
            if path[-1] == destination:
                return tuple(path[1:-1])
            step = next((hop for hop in stack[-1] if hop not in on_path), None)
            if step is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            path.append(step)
            on_path.add(step)
            stack.append(iter(self._next_hops(step, distance)))
        raise ItineraryError(f"no simple shortest path {origin}->{destination}")


def derive_itineraries(instance: Instance) -> Instance:
    """
    Fill an itinerary for every demand pair and every relay-induced pair.

    Demand pairs without an explicit itinerary take the shortest physical path.
    Induced pairs (k, j) take the remainder of the inducing itinerary after k.
    Explicit itineraries are never overwritten.
    """
    itineraries = dict(instance.itineraries)
    missing = sorted(pair for pair in instance.demand_volume if pair not in itineraries)
    if missing:
        if not instance.edges:
            origin, destination = missing[0]
            raise ItineraryError(f"demand {origin}->{destination} has no itinerary and no physical edges")
        router = ShortestPathRouter(instance.edges)
        for origin, destination in missing:
            itineraries[(origin, destination)] = Itinerary(origin, destination, router.route(origin, destination))
            logger.debug("derived itinerary %s->%s via %s", origin, destination,
                         itineraries[(origin, destination)].via)

    seen = set(instance.demand_volume)
    queue = deque(sorted(seen))
    while queue:
        origin, destination = queue.popleft()
        via = itineraries[(origin, destination)].via
        for position, k in enumerate(via):
            induced = (k, destination)
            if induced not in itineraries:
                itineraries[induced] = Itinerary(k, destination, tuple(via[position + 1:]))
            if induced not in seen:
                seen.add(induced)
                queue.append(induced)

    if itineraries == dict(instance.itineraries):
        return instance
    return replace(instance, itineraries=itineraries)


def count_investment_combinations(instance: Instance, include_no_invest: bool) -> int:
    """Number of investment decisions: product over potential nodes of their plan counts."""
    extra = 1 if include_no_invest else 0
    return math.prod(len(instance.node(node_id).plans) + extra for node_id in instance.potential_ids)


# ---------------------------------------------------------------------------
# Instance file codec
# ---------------------------------------------------------------------------

def _number(mapping: dict, key: str, where: str, integer: bool = False, default=None):
    if key not in mapping:
        if default is not None:
            return default
        raise InstanceFormatError(f"{where}: missing field '{key}'")
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InstanceFormatError(f"{where}: field '{key}' is not a finite number: {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise InstanceFormatError(f"{where}: field '{key}' must be an integer: {value!r}")
        return int(value)
    return float(value)


def _flag(mapping: dict, key: str, where: str) -> bool:
    value = mapping.get(key, False)
    if not isinstance(value, bool):
        raise InstanceFormatError(f"{where}: field '{key}' must be true or false")
    return value


def _text(mapping: dict, key: str, where: str) -> str:
    value = mapping.get(key)
    if not isinstance(value, str):
        raise InstanceFormatError(f"{where}: field '{key}' must be a string")
    return value


def _section(document: dict, key: str, required: bool = True):
    if key not in document:
        if required:
            raise InstanceFormatError(f"missing section '{key}'")
        return []
    return document[key]


def _list(value, where: str) -> list:
    if not isinstance(value, list):
        raise InstanceFormatError(f"{where} must be a list")
    return value


def _object(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise InstanceFormatError(f"{where} must be an object")
    return value


def parse_instance(text: str, validate: bool = False) -> Instance:
    """
    Parse instance file content.

    Args:
        text: UTF-8 decoded file content
        validate: raise InstanceValidationError when validate_instance reports violations

    Returns:
        Instance with all cross-references resolved; plan 0 stays implicit
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(e.msg, e.lineno, e.colno) from e
    document = _object(document, "instance document")
    declared = document.get("format", INSTANCE_FORMAT)
    if declared != INSTANCE_FORMAT:
        raise InstanceFormatError(f"unsupported format {declared!r}")

    nodes = []
    known = set()
    for index, raw in enumerate(_list(_section(document, "nodes"), "nodes")):
        where = f"nodes[{index}]"
        raw = _object(raw, where)
        node_id = _text(raw, "id", where)
        if node_id in known:
            raise InstanceFormatError(f"{where}: duplicate node id {node_id!r}")
        known.add(node_id)
        raw_attrs = _object(raw.get("attrs", {}), f"{where}.attrs")
        attrs = YardAttributes(
            accumulation_param=_number(raw_attrs, "c", where, default=0.0),
            capacity_total=_number(raw_attrs, "cap_total", where, default=0.0),
            capacity_local=_number(raw_attrs, "cap_local", where, default=0.0),
            tracks_total=_number(raw_attrs, "tracks_total", where, integer=True, default=0),
            tracks_local=_number(raw_attrs, "tracks_local", where, integer=True, default=0),
            reclass_cost=_number(raw_attrs, "tau", where, default=0.0),
        )
        plans = []
        for plan_index, raw_plan in enumerate(_list(raw.get("plans", []), f"{where}.plans"), start=1):
            plan_where = f"{where}.plans[{plan_index - 1}]"
            raw_plan = _object(raw_plan, plan_where)
            plans.append(InvestmentPlan(
                plan_id=plan_index,
                cost=_number(raw_plan, "cost", plan_where),
                lifetime_years=_number(raw_plan, "lifetime", plan_where, integer=True),
                reclass_cost_after=_number(raw_plan, "tau_after", plan_where),
                capacity_gain=_number(raw_plan, "cap_gain", plan_where, default=0.0),
                tracks_gain=_number(raw_plan, "tracks_gain", plan_where, integer=True, default=0),
            ))
        nodes.append(Node(
            id=node_id,
            is_original_yard=_flag(raw, "original", where),
            is_potential=_flag(raw, "potential", where),
            attrs=attrs,
            plans=tuple(plans),
        ))

    def resolve(node_id, where):
        if node_id not in known:
            raise InstanceFormatError(f"{where}: unknown node {node_id!r}")
        return node_id

    edges = []
    for index, raw in enumerate(_list(_section(document, "edges", required=False), "edges")):
        where = f"edges[{index}]"
        raw = _object(raw, where)
        edges.append(Edge(
            u=resolve(_text(raw, "from", where), where),
            v=resolve(_text(raw, "to", where), where),
            length=_number(raw, "length", where),
        ))

    itineraries: Dict[Pair, Itinerary] = {}
    for index, raw in enumerate(_list(_section(document, "itineraries", required=False), "itineraries")):
        where = f"itineraries[{index}]"
        raw = _object(raw, where)
        origin = resolve(_text(raw, "origin", where), where)
        destination = resolve(_text(raw, "destination", where), where)
        via = tuple(resolve(member, where) for member in _list(raw.get("via", []), f"{where}.via"))
        if (origin, destination) in itineraries:
            raise InstanceFormatError(f"{where}: duplicate itinerary {origin}->{destination}")
        itineraries[(origin, destination)] = Itinerary(origin, destination, via)

    demands = []
    for index, raw in enumerate(_list(_section(document, "demands"), "demands")):
        where = f"demands[{index}]"
        raw = _object(raw, where)
        demands.append(Demand(
            origin=resolve(_text(raw, "origin", where), where),
            destination=resolve(_text(raw, "destination", where), where),
            volume=_number(raw, "volume", where),
        ))

    raw_econ = _object(_section(document, "economics"), "economics")
    overrides = {}
    for index, raw in enumerate(_list(raw_econ.get("train_size_overrides", []), "economics.train_size_overrides")):
        where = f"economics.train_size_overrides[{index}]"
        raw = _object(raw, where)
        pair = (resolve(_text(raw, "origin", where), where), resolve(_text(raw, "destination", where), where))
        overrides[pair] = _number(raw, "size", where)
    raw_track = _object(raw_econ.get("track_fn", {"kind": TrackFunction.STEP}), "economics.track_fn")
    thresholds = raw_track.get("thresholds")
    if thresholds is not None:
        thresholds = tuple(_number({"a": a}, "a", "economics.track_fn.thresholds")
                           for a in _list(thresholds, "economics.track_fn.thresholds"))
    economics = EconomicParams(
        budget=_number(raw_econ, "budget", "economics"),
        discount_rate=_number(raw_econ, "discount_rate", "economics"),
        car_hour_value=_number(raw_econ, "car_hour_value", "economics"),
        train_size_default=_number(raw_econ, "train_size", "economics", default=50.0),
        train_size_overrides=overrides,
        track_fn=TrackFunction(kind=_text(raw_track, "kind", "economics.track_fn"), thresholds=thresholds),
        days_per_year=_number(raw_econ, "days_per_year", "economics", integer=True, default=365),
    )

    instance = Instance(
        nodes=tuple(nodes),
        demands=tuple(demands),
        itineraries=itineraries,
        economics=economics,
        edges=tuple(edges),
    )
    if validate:
        report = validate_instance(instance)
        if not report.is_valid:
            raise InstanceValidationError(report)
    return instance


def _render(value):
    """Integral floats render without a fractional part so output is byte-stable."""
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def serialize_instance(instance: Instance) -> str:
    """Render an Instance in the instance file format (stable key order)."""
    document = {"format": INSTANCE_FORMAT, "nodes": []}
    for node in instance.nodes:
        attrs = node.attrs
        entry = {
            "id": node.id,
            "original": node.is_original_yard,
            "potential": node.is_potential,
            "attrs": {
                "c": _render(attrs.accumulation_param),
                "cap_total": _render(attrs.capacity_total),
                "cap_local": _render(attrs.capacity_local),
                "tracks_total": attrs.tracks_total,
                "tracks_local": attrs.tracks_local,
                "tau": _render(attrs.reclass_cost),
            },
            "plans": [
                {
                    "cost": _render(plan.cost),
                    "lifetime": plan.lifetime_years,
                    "tau_after": _render(plan.reclass_cost_after),
                    "cap_gain": _render(plan.capacity_gain),
                    "tracks_gain": plan.tracks_gain,
                }
                for plan in node.plans
            ],
        }
        document["nodes"].append(entry)
    if instance.edges:
        document["edges"] = [
            {"from": edge.u, "to": edge.v, "length": _render(edge.length)} for edge in instance.edges
        ]
    if instance.itineraries:
        document["itineraries"] = [
            {"origin": origin, "destination": destination, "via": list(itinerary.via)}
            for (origin, destination), itinerary in sorted(instance.itineraries.items())
        ]
    document["demands"] = [
        {"origin": d.origin, "destination": d.destination, "volume": _render(d.volume)}
        for d in instance.demands
    ]
    economics = instance.economics
    track_fn = {"kind": economics.track_fn.kind}
    if economics.track_fn.thresholds is not None:
        track_fn["thresholds"] = [_render(a) for a in economics.track_fn.thresholds]
    document["economics"] = {
        "budget": _render(economics.budget),
        "discount_rate": _render(economics.discount_rate),
        "car_hour_value": _render(economics.car_hour_value),
        "days_per_year": economics.days_per_year,
        "train_size": _render(economics.train_size_default),
        "train_size_overrides": [
            {"origin": origin, "destination": destination, "size": _render(size)}
            for (origin, destination), size in sorted(economics.train_size_overrides.items())
        ],
        "track_fn": track_fn,
    }
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"
