"""
Test file for Investment Solver Module
Capital recovery, budget handling and the upper-level search.
"""

from decimal import Decimal, getcontext

import pytest

from helpers import line_instance, plan, random_investment_instance, yard
from modules.exceptions import EnumerationLimitError, NoFeasibleDecisionError
from modules.flow_engine import InvestmentDecision
from modules.instance_model import EconomicParams, Instance
from modules.investment_solver import (
    ANNEAL,
    ENUMERATE,
    OVER_BUDGET,
    AnnealSettings,
    UpperSolveConfig,
    annualized_investment,
    budget_feasible,
    capital_recovery_factor,
    evaluate_decision,
    solve,
)
from modules.tcs_solver import EXACT, TcsSolveConfig


def crf_oracle(rate: float, lifetime: int) -> float:
    getcontext().prec = 60
    gamma = Decimal(str(rate))
    growth = (1 + gamma) ** lifetime
    return float(gamma * growth / (growth - 1))


def exact_upper(mode=ENUMERATE, **overrides):
    return UpperSolveConfig(mode=mode, lower_config=TcsSolveConfig(mode=EXACT), threads=1, **overrides)


def investment_line(cost: float, capacity_b: float = 50.0, budget: float = 1e9) -> Instance:
    """Line instance where B cannot relay A->C until its one plan adds capacity."""
    return line_instance(capacity_b=capacity_b, plans_b=(plan(1, cost, lifetime=20, cap_gain=100.0),),
                         budget=budget)


def test_crf_one_year():
    assert capital_recovery_factor(0.1, 1) == pytest.approx(1.1, abs=1e-12)


def test_crf_matches_high_precision_oracle():
    assert capital_recovery_factor(0.1, 20) == pytest.approx(crf_oracle(0.1, 20), abs=1e-9)
    assert capital_recovery_factor(0.1, 20) == pytest.approx(0.1174596, abs=1e-7)


def test_crf_zero_rate():
    assert capital_recovery_factor(0.0, 5) == 0.2


@pytest.mark.parametrize("rate", [0.05, 0.1])
def test_crf_long_lifetime_limit(rate):
    assert abs(capital_recovery_factor(rate, 10 ** 6) - rate) < 1e-9


def test_crf_strictly_decreasing_and_above_rate():
    values = [capital_recovery_factor(0.07, lifetime) for lifetime in range(1, 101)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert all(value > 0.07 for value in values)


def test_crf_rejects_zero_lifetime():
    with pytest.raises(ValueError):
        capital_recovery_factor(0.1, 0)


def test_annualized_investment():
    single = line_instance(plans_b=(plan(1, 1000.0, lifetime=1),))
    assert annualized_investment(single, InvestmentDecision({"B": 0})) == 0
    assert annualized_investment(single, InvestmentDecision({"B": 1})) == pytest.approx(1100.0)

    pair = Instance(
        nodes=(yard("K1", potential=True, plans=[plan(1, 1000.0)]),
               yard("K2", potential=True, plans=[plan(1, 2000.0)])),
        demands=(),
        itineraries={},
        economics=EconomicParams(budget=0.0, discount_rate=0.1, car_hour_value=1.0),
    )
    both = InvestmentDecision({"K1": 1, "K2": 1})
    assert annualized_investment(pair, both) == pytest.approx(3 * crf_oracle(0.1, 20) * 1000, abs=1e-3)
    assert annualized_investment(pair, both) == pytest.approx(352.379, abs=1e-3)


def test_budget_boundary_is_inclusive():
    instance = investment_line(cost=500.0, budget=500.0)
    assert budget_feasible(instance, InvestmentDecision({"B": 0}))
    assert budget_feasible(instance, InvestmentDecision({"B": 1}))
    assert not budget_feasible(instance.with_economics(budget=499.0), InvestmentDecision({"B": 1}))


def test_baseline_objective_line(line3):
    result = evaluate_decision(line3, InvestmentDecision({}), exact_upper())
    assert result.tcs.cost.z_total == 1200
    assert result.objective == 438000
    assert result.annualized_capital == 0
    assert result.within_budget


def test_zero_demands_objective():
    instance = Instance((yard("A"),), (), {}, EconomicParams(budget=0.0, discount_rate=0.1, car_hour_value=3.0))
    assert evaluate_decision(instance, InvestmentDecision({}), exact_upper()).objective == 0


def test_days_per_year_scales_operation(line3):
    shorter = line3.with_economics(days_per_year=250)
    result = evaluate_decision(shorter, InvestmentDecision({}), exact_upper())
    assert result.annual_operation == 250 * 1200


def test_solve_without_potential_nodes(line3):
    result = solve(line3, exact_upper())
    assert result.plan.decision.choice == {}
    assert result.plan.objective == 438000
    assert result.combinations == 1


def test_zero_budget_keeps_plan_zero():
    instance = investment_line(cost=1.0, budget=0.0)
    result = solve(instance, exact_upper())
    assert result.plan.decision.vector(result.instance) == (0,)
    assert any(record.status == OVER_BUDGET for record in result.log)


@pytest.mark.parametrize("cost, chosen", [(500000.0, 1), (1000000.0, 0)])
def test_plan_chosen_iff_it_pays_off(cost, chosen):
    # savings of the capacity plan: 365 * alpha * (1500 - 1200) = 109500 per year
    instance = investment_line(cost=cost)
    result = solve(instance, exact_upper())
    assert result.plan.decision.vector(result.instance) == (chosen,)
    annual = capital_recovery_factor(0.1, 20) * cost
    assert (annual < 365 * 300) == bool(chosen)
    if chosen:
        assert result.plan.objective == pytest.approx(annual + 365 * 1200)
    else:
        assert result.plan.objective == 365 * 1500


def test_anneal_never_worse_than_baseline():
    instance = investment_line(cost=500000.0)
    config = exact_upper(mode=ANNEAL, anneal=AnnealSettings(steps=30, rng_seed=4))
    result = solve(instance, config)
    baseline = evaluate_decision(result.instance, InvestmentDecision({"B": 0}), config)
    assert result.plan.objective <= baseline.objective
    assert result.log[0].decision == (0,)


def test_enumeration_limit():
    instance = investment_line(cost=10.0)
    with pytest.raises(EnumerationLimitError):
        solve(instance, exact_upper(enumerate_limit=1))


def test_no_feasible_decision():
    instance = line_instance(capacity_b=0.0)
    tight = Instance(
        nodes=(yard("A", tracks=1),) + instance.nodes[1:],
        demands=instance.demands,
        itineraries=instance.itineraries,
        economics=instance.economics,
    )
    with pytest.raises(NoFeasibleDecisionError):
        solve(tight, exact_upper())


def test_solve_log_records_every_decision():
    instance = investment_line(cost=500000.0)
    result = solve(instance, exact_upper())
    assert [record.decision for record in result.log] == [(0,), (1,)]
    assert result.evaluated == 2
    entry = result.log[1].as_dict()
    assert entry["decision"] == [1]
    assert entry["within_budget"] is True
    assert entry["objective"] == pytest.approx(result.plan.objective)


@pytest.mark.parametrize("seed", range(20))
def test_budget_monotonicity(seed):
    instance = random_investment_instance(seed)
    objectives = []
    for budget in (0.0, 50000.0, 150000.0, 1e9):
        result = solve(instance.with_economics(budget=budget), exact_upper())
        objectives.append(result.plan.objective)
    assert all(later <= earlier + 1e-9 * max(1.0, earlier) for earlier, later in zip(objectives, objectives[1:]))


def test_enumeration_threads_do_not_change_result():
    instance = random_investment_instance(3).with_economics(budget=1e9)
    serial = solve(instance, exact_upper())
    parallel = solve(instance, UpperSolveConfig(lower_config=TcsSolveConfig(mode=EXACT), threads=4))
    assert parallel.plan == serial.plan
    assert parallel.log == serial.log


def test_config_validation():
    with pytest.raises(ValueError):
        UpperSolveConfig(mode="greedy")
    with pytest.raises(ValueError):
        AnnealSettings(cooling_rate=1.0)
