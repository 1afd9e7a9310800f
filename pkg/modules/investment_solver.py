"""
Investment Solver
Chooses one building or improvement plan per potential node to minimise
annualized capital plus annual operating cost, within the capital budget.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.solver_config import ANNEAL_CONFIG, SOLVER_CONFIG, get_thread_cap
from modules.exceptions import EnumerationLimitError, InfeasibleError, NoFeasibleDecisionError
from modules.flow_engine import InvestmentDecision, Scenario
from modules.instance_model import Instance, count_investment_combinations, derive_itineraries
from modules.tcs_solver import INFEASIBLE, TcsPlan, TcsSolveConfig, solve_tcs

logger = logging.getLogger(__name__)

ENUMERATE = "enumerate"
ANNEAL = "anneal"

OVER_BUDGET = "OverBudget"

# Relative slack on the budget comparison for float sums of plan costs
BUDGET_TOLERANCE = 1e-9


@dataclass(frozen=True)
class AnnealSettings:
    initial_temp: float = 10000.0
    cooling_rate: float = 0.95
    steps: int = 200
    rng_seed: int = 0

    def __post_init__(self):
        if not self.initial_temp > 0 or self.steps < 1:
            raise ValueError("annealing temperature and steps must be positive")
        if not 0 < self.cooling_rate < 1:
            raise ValueError("cooling_rate must lie in (0, 1)")


@dataclass(frozen=True)
class UpperSolveConfig:
    mode: str = ENUMERATE
    enumerate_limit: int = 1000000
    anneal: AnnealSettings = field(default_factory=AnnealSettings)
    lower_config: TcsSolveConfig = field(default_factory=TcsSolveConfig)
    threads: Optional[int] = None

    @classmethod
    def from_settings(cls, mode: str = ENUMERATE, seed: int = None, lower_mode: str = None,
                      enumerate_limit: int = None, steps: int = None, restarts: int = None,
                      threads: int = None) -> "UpperSolveConfig":
        seed = SOLVER_CONFIG['seed'] if seed is None else seed
        anneal = AnnealSettings(
            initial_temp=ANNEAL_CONFIG['initial_temp'],
            cooling_rate=ANNEAL_CONFIG['cooling_rate'],
            steps=steps or ANNEAL_CONFIG['steps'],
            rng_seed=seed,
        )
        lower = TcsSolveConfig.from_settings(mode=lower_mode, rng_seed=seed, restarts=restarts, threads=threads)
        return cls(
            mode=mode,
            enumerate_limit=enumerate_limit or SOLVER_CONFIG['enumerate_limit'],
            anneal=anneal,
            lower_config=lower,
            threads=threads,
        )

    def __post_init__(self):
        if self.mode not in (ENUMERATE, ANNEAL):
            raise ValueError(f"unknown investment search mode {self.mode!r}")
        if self.enumerate_limit < 1:
            raise ValueError("enumerate_limit must be positive")


@dataclass(frozen=True)
class LocationPlan:
    decision: InvestmentDecision
    tcs: TcsPlan
    capital_raw: float
    annualized_capital: float
    annual_operation: float
    objective: float
    within_budget: bool

    @property
    def feasible(self) -> bool:
        return self.within_budget and self.tcs.feasible


@dataclass(frozen=True)
class SearchRecord:
    """One line of the solve log."""
    decision: Tuple[int, ...]
    within_budget: bool
    status: str
    z: Optional[float] = None
    objective: Optional[float] = None

    def as_dict(self) -> Dict:
        return {
            "decision": list(self.decision),
            "within_budget": self.within_budget,
            "status": self.status,
            "z": self.z,
            "objective": self.objective,
        }


@dataclass
class SolveResult:
    instance: Instance
    plan: LocationPlan
    log: List[SearchRecord]
    mode: str
    combinations: int
    evaluated: int


def capital_recovery_factor(discount_rate: float, lifetime: int) -> float:
    """
    Uniform annual cost per unit of capital: g(1+g)^T / ((1+g)^T - 1).

    Evaluated as g / (1 - (1+g)^-T) to stay finite for long lifetimes;
    a zero rate gives the straight-line limit 1/T.
    """
    if lifetime < 1:
        raise ValueError(f"lifetime must be at least one year, got {lifetime}")
    if discount_rate < 0:
        raise ValueError(f"discount rate must be non-negative, got {discount_rate}")
    if discount_rate == 0:
        return 1.0 / lifetime
    return discount_rate / -math.expm1(-lifetime * math.log1p(discount_rate))


def _chosen_plans(instance: Instance, decision: InvestmentDecision):
    for node_id in instance.potential_ids:
        plan = instance.node(node_id).plan(decision.plan_index(node_id))
        if plan is not None:
            yield plan


def annualized_investment(instance: Instance, decision: InvestmentDecision) -> float:
    """
    Yearly equivalent of the chosen plans' capital cost.

    Args:
        instance: Instance holding the plans and the discount rate
        decision: Plan index per potential node

    Returns:
        Sum of capital recovery factor times cost over the non-zero plans
    """
    rate = instance.economics.discount_rate
    return sum(capital_recovery_factor(rate, plan.lifetime_years) * plan.cost
               for plan in _chosen_plans(instance, decision))


def capital_outlay(instance: Instance, decision: InvestmentDecision) -> float:
    """
    Raw capital spent by a decision, the amount checked against the budget.

    Args:
        instance: Instance holding the plans
        decision: Plan index per potential node

    Returns:
        Undiscounted sum of the chosen plans' costs
    """
    return sum(plan.cost for plan in _chosen_plans(instance, decision))


def budget_feasible(instance: Instance, decision: InvestmentDecision) -> bool:
    """
    Raw (undiscounted) plan costs must not exceed the budget; the bound is inclusive.

    Returns:
        True when the capital outlay fits the budget
    """
    budget = instance.economics.budget
    return capital_outlay(instance, decision) <= budget + BUDGET_TOLERANCE * max(1.0, abs(budget))


def evaluate_decision(instance: Instance, decision: InvestmentDecision, config: UpperSolveConfig) -> LocationPlan:
    """
    Objective of one decision: annualized capital + days * alpha * Z(Y).

    A lower-level infeasible decision gets objective math.inf and a TcsPlan
    with optimality Infeasible; a budget violation is recorded, not rejected.
    """
    scenario = Scenario(instance, decision)
    tcs = solve_tcs(scenario, config.lower_config)
    economics = instance.economics
    capital = annualized_investment(instance, decision)
    if tcs.feasible:
        operation = economics.days_per_year * economics.car_hour_value * tcs.cost.z_total
        objective = capital + operation
    else:
        operation = math.inf
        objective = math.inf
    return LocationPlan(
        decision=decision,
        tcs=tcs,
        capital_raw=capital_outlay(instance, decision),
        annualized_capital=capital,
        annual_operation=operation,
        objective=objective,
        within_budget=budget_feasible(instance, decision),
    )


class _DecisionEvaluator:
    """Evaluates decision vectors once each and keeps the solve log."""

    def __init__(self, instance: Instance, config: UpperSolveConfig):
        self.instance = instance
        self.config = config
        self.cache: Dict[Tuple[int, ...], Optional[LocationPlan]] = {}
        self.log: List[SearchRecord] = []

    def evaluate(self, vector: Tuple[int, ...]) -> Optional[LocationPlan]:
        """LocationPlan, or None when the vector is over budget or could not be solved."""
        if vector in self.cache:
            return self.cache[vector]
        outcome = _evaluate_vector(self.instance, self.config, vector)
        self.record(vector, outcome)
        return outcome[1]

    def record(self, vector: Tuple[int, ...], outcome: Tuple[bool, Optional[LocationPlan]]):
        self.cache[vector] = outcome[1]
        self.log.append(_search_record(vector, *outcome))


def _evaluate_vector(instance: Instance, config: UpperSolveConfig,
                     vector) -> Tuple[bool, Optional[LocationPlan]]:
    """(within_budget, plan); plan is None when skipped or the lower level had nothing to offer."""
    decision = InvestmentDecision.from_vector(instance, vector)
    if not budget_feasible(instance, decision):
        return False, None
    try:
        return True, evaluate_decision(instance, decision, config)
    except InfeasibleError as e:
        logger.warning("decision %s not evaluated: %s", vector, e)
        return True, None


def _search_record(vector, within_budget: bool, plan: Optional[LocationPlan]) -> SearchRecord:
    if not within_budget:
        return SearchRecord(tuple(vector), within_budget=False, status=OVER_BUDGET)
    if plan is None or not plan.tcs.feasible:
        return SearchRecord(tuple(vector), within_budget=True, status=INFEASIBLE)
    return SearchRecord(tuple(vector), within_budget=True, status=plan.tcs.optimality,
                        z=plan.tcs.cost.z_total, objective=plan.objective)


def _better(candidate: Optional[LocationPlan], incumbent: Optional[LocationPlan], instance: Instance) -> bool:
    """Strictly lower objective wins; equal objectives go to the smaller decision vector."""
    if candidate is None or not candidate.feasible:
        return False
    if incumbent is None:
        return True
    if candidate.objective != incumbent.objective:
        return candidate.objective < incumbent.objective
    return candidate.decision.vector(instance) < incumbent.decision.vector(instance)


def _enumerate(instance: Instance, config: UpperSolveConfig, evaluator: _DecisionEvaluator, threads: int):
    ranges = [range(len(instance.node(node_id).plans) + 1) for node_id in instance.potential_ids]
    vectors = list(itertools.product(*ranges))
    if threads > 1 and len(vectors) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda v: _evaluate_vector(instance, config, v), vectors))
    else:
        outcomes = [_evaluate_vector(instance, config, v) for v in vectors]

    best = None
    for vector, outcome in zip(vectors, outcomes):
        evaluator.record(vector, outcome)
        if _better(outcome[1], best, instance):
            best = outcome[1]
    return best


def _anneal(instance: Instance, config: UpperSolveConfig, evaluator: _DecisionEvaluator):
    settings = config.anneal
    rng = np.random.default_rng(settings.rng_seed)
    sizes = [len(instance.node(node_id).plans) + 1 for node_id in instance.potential_ids]

    current_vector = tuple(0 for _ in sizes)
    current = evaluator.evaluate(current_vector)
    best = current if current is not None and current.feasible else None
    movable = [index for index, size in enumerate(sizes) if size > 1]
    if not movable:
        return best

    temperature = settings.initial_temp
    for step in range(settings.steps):
        position = movable[int(rng.integers(len(movable)))]
        shift = int(rng.integers(1, sizes[position]))
        neighbor = list(current_vector)
        neighbor[position] = (neighbor[position] + shift) % sizes[position]
        neighbor = tuple(neighbor)

        candidate = evaluator.evaluate(neighbor)
        if candidate is not None and candidate.feasible:
            current_objective = current.objective if current is not None and current.feasible else math.inf
            delta = candidate.objective - current_objective
            if delta <= 0 or (temperature > 0 and rng.random() < math.exp(-delta / temperature)):
                current_vector, current = neighbor, candidate
            if _better(candidate, best, instance):
                best = candidate
        temperature *= settings.cooling_rate
        logger.debug("anneal step %d temp %.3f current %s", step, temperature, current_vector)
    return best


def solve(instance: Instance, config: UpperSolveConfig = None) -> SolveResult:
    """
    Search investment decisions and return the best LocationPlan with its solve log.

    Enumerate visits every decision (over-budget ones are logged and skipped);
    anneal walks single-node plan changes from the all-plan-0 baseline. The
    baseline is always evaluated, so the result never does worse than it.

    Raises:
        EnumerationLimitError: combination count above enumerate_limit in enumerate mode
        NoFeasibleDecisionError: no decision is within budget and lower-level feasible
    """
    config = config or UpperSolveConfig.from_settings()
    instance = derive_itineraries(instance)
    combinations = count_investment_combinations(instance, include_no_invest=True)
    threads = config.threads or get_thread_cap()
    evaluator = _DecisionEvaluator(instance, config)

    if config.mode == ENUMERATE:
        if combinations > config.enumerate_limit:
            raise EnumerationLimitError(
                f"{combinations} investment combinations exceed enumerate_limit {config.enumerate_limit}")
        logger.info("enumerating %d investment decisions on %d thread(s)", combinations, threads)
        best = _enumerate(instance, config, evaluator, threads)
    else:
        logger.info("annealing over %d investment decisions for %d steps", combinations, config.anneal.steps)
        best = _anneal(instance, config, evaluator)

    if best is None:
        raise NoFeasibleDecisionError("no investment decision is within budget and lower-level feasible")
    logger.info("best decision %s objective %.3f", best.decision.vector(instance), best.objective)
    return SolveResult(
        instance=instance,
        plan=best,
        log=evaluator.log,
        mode=config.mode,
        combinations=combinations,
        evaluated=len(evaluator.log),
    )
