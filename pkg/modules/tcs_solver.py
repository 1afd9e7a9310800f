"""
TCS Solver
Finds the least-cost train connecting service plan for a fixed scenario:
exhaustive enumeration for small pair closures, multi-start first-improvement
local search for larger ones.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from config.solver_config import SOLVER_CONFIG, get_thread_cap
from modules.exceptions import ExactLimitExceededError, InfeasibleError, RoutingCycleError, YardLocError
from modules.flow_engine import (
    DIRECT,
    CostBreakdown,
    Evaluation,
    FeasibilityViolation,
    FlowState,
    Route,
    Scenario,
    TcsAssignment,
    evaluate_assignment,
)
from modules.instance_model import Pair

logger = logging.getLogger(__name__)

EXACT = "exact"
HEURISTIC = "heuristic"
AUTO = "auto"

PROVEN_OPTIMAL = "ProvenOptimal"
HEURISTIC_BEST = "HeuristicBest"
INFEASIBLE = "Infeasible"

# Random starts tried per restart before falling back to the repaired all-Direct start
RANDOM_START_ATTEMPTS = 5


@dataclass(frozen=True)
class TcsSolveConfig:
    mode: str = AUTO
    exact_pair_limit: int = 12
    restarts: int = 8
    max_iterations: int = 10000
    rng_seed: int = 0
    threads: Optional[int] = None

    @classmethod
    def from_settings(cls, **overrides) -> "TcsSolveConfig":
        settings = dict(
            exact_pair_limit=SOLVER_CONFIG['exact_pair_limit'],
            restarts=SOLVER_CONFIG['restarts'],
            max_iterations=SOLVER_CONFIG['max_iterations'],
            rng_seed=SOLVER_CONFIG['seed'],
        )
        settings.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**settings)

    def __post_init__(self):
        if self.mode not in (EXACT, HEURISTIC, AUTO):
            raise ValueError(f"unknown TCS mode {self.mode!r}")
        if self.exact_pair_limit < 1 or self.restarts < 1 or self.max_iterations < 1:
            raise ValueError("TCS solver limits must be positive")


@dataclass(frozen=True)
class TcsPlan:
    assignment: TcsAssignment
    flows: Optional[FlowState]
    cost: Optional[CostBreakdown]
    feasible: bool
    optimality: str
    violations: Tuple[FeasibilityViolation, ...] = ()
    evaluations: int = 0

    @property
    def z_total(self) -> float:
        return self.cost.z_total if self.feasible else math.inf


def _plan_from(evaluation: Evaluation, optimality: str, evaluations: int) -> TcsPlan:
    return TcsPlan(
        assignment=evaluation.assignment,
        flows=evaluation.flows,
        cost=evaluation.cost,
        feasible=evaluation.feasibility.feasible,
        optimality=optimality if evaluation.feasibility.feasible else INFEASIBLE,
        violations=evaluation.feasibility.violations,
        evaluations=evaluations,
    )


def _rank(evaluation: Evaluation) -> Tuple:
    """Merge order: feasible first, then cost, then lexicographic assignment."""
    feasible = evaluation.feasibility.feasible
    measure = evaluation.cost.z_total if feasible else evaluation.feasibility.total_excess()
    return (not feasible, measure, evaluation.assignment.key())


def solve_exact(scenario: Scenario, config: TcsSolveConfig) -> TcsPlan:
    """
    Enumerate every route combination over the induced pair closure.

    Ties go to the lexicographically smallest assignment vector (pairs sorted,
    Direct before Via(k), Via sorted by k).

    Raises:
        ExactLimitExceededError: the closure holds more than exact_pair_limit pairs
    """
    pairs = scenario.instance.pair_closure
    if len(pairs) > config.exact_pair_limit:
        raise ExactLimitExceededError(
            f"{len(pairs)} routable pairs exceed exact_pair_limit {config.exact_pair_limit}")

    choice_lists = [scenario.choices(pair) for pair in pairs]
    best: Optional[Evaluation] = None
    least_violating: Optional[Evaluation] = None
    evaluations = 0
    for combination in itertools.product(*choice_lists):
        routes = dict(zip(pairs, combination))
        try:
            evaluation = evaluate_assignment(scenario, TcsAssignment(routes))
        except RoutingCycleError as e:
            logger.debug("skipping cyclic combination: %s", e)
            continue
        # A non-Direct route on a pair without flow duplicates an earlier, smaller combination
        if any(not route.is_direct for pair, route in routes.items() if pair not in evaluation.flows.f):
            continue
        evaluations += 1
        if evaluation.feasibility.feasible:
            if best is None or evaluation.cost.z_total < best.cost.z_total:
                best = evaluation
        elif least_violating is None or _rank(evaluation) < _rank(least_violating):
            least_violating = evaluation

    logger.debug("exact TCS enumeration: %d pairs, %d evaluations", len(pairs), evaluations)
    if best is None:
        if least_violating is None:
            raise InfeasibleError("every route combination contains a routing cycle")
        return _plan_from(least_violating, INFEASIBLE, evaluations)
    return _plan_from(best, PROVEN_OPTIMAL, evaluations)


class _LocalSearch:
    """One restart of the first-improvement search; owns its mutable state."""

    def __init__(self, scenario: Scenario, config: TcsSolveConfig, restart: int):
        self.scenario = scenario
        self.config = config
        self.restart = restart
        self.pairs = scenario.instance.pair_closure
        self.rng = np.random.default_rng([config.rng_seed, restart])
        self.evaluations = 0

    def evaluate(self, routes: Dict[Pair, Route]) -> Optional[Evaluation]:
        self.evaluations += 1
        try:
            return evaluate_assignment(self.scenario, TcsAssignment(dict(routes)))
        except YardLocError as e:
            logger.debug("restart %d: move rejected: %s", self.restart, e)
            return None

    def all_direct(self) -> Dict[Pair, Route]:
        return {pair: DIRECT for pair in self.pairs}

    def random_start(self) -> Dict[Pair, Route]:
        routes = {}
        for pair in self.pairs:
            choices = self.scenario.choices(pair)
            routes[pair] = choices[int(self.rng.integers(len(choices)))]
        return routes

    def _repair_candidates(self, routes, evaluation: Evaluation):
        """Single-pair reroutes touching the violating yards, least-loaded target first."""
        over_tracks = {v.location for v in evaluation.feasibility.violations
                       if v.kind == FeasibilityViolation.TRACKS}
        over_capacity = {v.location for v in evaluation.feasibility.violations
                         if v.kind == FeasibilityViolation.CAPACITY}
        candidates = []
        for pair in sorted(evaluation.flows.f):
            route = routes[pair]
            touches = pair[0] in over_tracks or (not route.is_direct and route.via in over_capacity)
            if not touches:
                continue
            for choice in self.scenario.choices(pair):
                if choice == route:
                    continue
                if choice.is_direct:
                    load = 0.0
                else:
                    capacity = self.scenario.effective[choice.via].capacity
                    workload = evaluation.flows.workload(choice.via)
                    load = workload / capacity if capacity > 0 else math.inf
                candidates.append((load, pair, choice))
        candidates.sort()
        return candidates

    def repair(self, routes: Dict[Pair, Route]) -> Tuple[Dict[Pair, Route], Optional[Evaluation]]:
        evaluation = self.evaluate(routes)
        if evaluation is None:
            return routes, None
        limit = len(self.pairs) * 4
        for _ in range(limit):
            if evaluation.feasibility.feasible:
                break
            best_excess = evaluation.feasibility.total_excess()
            best_move = None
            for _, pair, choice in self._repair_candidates(routes, evaluation):
                trial = dict(routes)
                trial[pair] = choice
                candidate = self.evaluate(trial)
                if candidate is None:
                    continue
                excess = candidate.feasibility.total_excess()
                if excess < best_excess:
                    best_excess = excess
                    best_move = (trial, candidate)
            if best_move is None:
                break
            routes, evaluation = best_move
        return routes, evaluation

    def improve(self, routes: Dict[Pair, Route], evaluation: Evaluation) -> Evaluation:
        iterations = 0
        improved = True
        while improved and iterations < self.config.max_iterations:
            improved = False
            order = sorted(evaluation.flows.f)
            if self.restart > 0:
                order = [order[i] for i in self.rng.permutation(len(order))]
            for pair in order:
                for choice in self.scenario.choices(pair):
                    if choice == routes[pair]:
                        continue
                    iterations += 1
                    trial = dict(routes)
                    trial[pair] = choice
                    candidate = self.evaluate(trial)
                    if (candidate is not None and candidate.feasibility.feasible
                            and candidate.cost.z_total < evaluation.cost.z_total):
                        routes, evaluation = trial, candidate
                        improved = True
                        break
                    if iterations >= self.config.max_iterations:
                        break
                if improved or iterations >= self.config.max_iterations:
                    break
        return evaluation

    def run(self) -> Optional[Evaluation]:
        starts = [self.all_direct()] if self.restart == 0 else [
            self.random_start() for _ in range(RANDOM_START_ATTEMPTS)] + [self.all_direct()]
        fallback = None
        for start in starts:
            routes, evaluation = self.repair(start)
            if evaluation is None:
                continue
            if evaluation.feasibility.feasible:
                return self.improve(routes, evaluation)
            if fallback is None or _rank(evaluation) < _rank(fallback):
                fallback = evaluation
        logger.debug("restart %d: repair failed", self.restart)
        return fallback


def solve_heuristic(scenario: Scenario, config: TcsSolveConfig) -> TcsPlan:
    """
    Multi-start first-improvement local search over single-pair route changes.

    Restart 0 starts from all-Direct, later restarts from seeded random
    assignments; infeasible starts are repaired by greedy least-loaded
    rerouting. Restarts may run on worker threads; the merge is by
    (feasibility, cost, assignment) so the answer does not depend on scheduling.
    """
    threads = config.threads or get_thread_cap()
    searches = [_LocalSearch(scenario, config, restart) for restart in range(config.restarts)]
    if threads > 1 and len(searches) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(searches))) as pool:
            results = list(pool.map(lambda search: search.run(), searches))
    else:
        results = [search.run() for search in searches]

    evaluations = sum(search.evaluations for search in searches)
    found = [result for result in results if result is not None]
    if not found:
        raise InfeasibleError("no restart produced an evaluable assignment")
    best = min(found, key=_rank)
    if not best.feasibility.feasible:
        logger.warning("heuristic TCS search found no feasible plan; worst violation %s",
                       best.feasibility.worst())
    return _plan_from(best, HEURISTIC_BEST, evaluations)


def solve_tcs(scenario: Scenario, config: TcsSolveConfig) -> TcsPlan:
    """Dispatch on config.mode; auto picks exact when the closure fits exact_pair_limit."""
    mode = config.mode
    if mode == AUTO:
        mode = EXACT if len(scenario.instance.pair_closure) <= config.exact_pair_limit else HEURISTIC
    if mode == EXACT:
        return solve_exact(scenario, config)
    return solve_heuristic(scenario, config)


def evaluate_z(scenario: Scenario, config: TcsSolveConfig = None) -> float:
    """
    Z(Y): daily car-hours of the best TCS plan for the scenario.

    Raises:
        InfeasibleError: no feasible TCS plan was found
    """
    plan = solve_tcs(scenario, config or TcsSolveConfig.from_settings())
    if not plan.feasible:
        raise InfeasibleError("no feasible TCS plan for this decision", plan.violations)
    return plan.cost.z_total
