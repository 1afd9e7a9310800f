"""
Reporting Module
Turns a SolveResult into a RunReport: tabulated summaries for the terminal
and the line-oriented yardloc-report-v1 file for audit and regression diffs.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import pandas as pd
from tabulate import tabulate

from modules.exceptions import ReportFormatError, TrackOverflowError
from modules.flow_engine import Scenario, track_demand, tracks_by_origin
from modules.investment_solver import SearchRecord, SolveResult

logger = logging.getLogger(__name__)

REPORT_FORMAT = "yardloc-report-v1"
RECORD_TYPES = ("instance", "decision", "service", "yard", "cost", "solver")

# Route column of a service that only carries relayed cars
SERVICE_ONLY = "-"

SERVICE_COLUMNS = ["origin", "destination", "route", "f", "D", "tracks"]
YARD_COLUMNS = ["node", "workload", "capacity", "capacity_utilization",
                "tracks_used", "tracks", "track_utilization", "tau"]


def _plain(value):
    """numpy scalars to Python numbers; NaN (undefined ratio) to None."""
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def _records(frame: pd.DataFrame) -> List[Dict]:
    return [{key: _plain(value) for key, value in row.items()} for row in frame.to_dict(orient="records")]


@dataclass
class RunReport:
    instance: Dict
    decisions: List[Dict]
    services: pd.DataFrame
    yards: pd.DataFrame
    cost: Dict
    solver: Dict
    wall_time: Optional[float] = field(default=None, compare=False)

    @classmethod
    def from_result(cls, result: SolveResult, seed: int, tcs_mode: str,
                    wall_time: Optional[float] = None) -> "RunReport":
        """Collect every reported number from the SolveResult without re-rounding."""
        instance = result.instance
        plan = result.plan
        scenario = Scenario(instance, plan.decision)
        flows = plan.tcs.flows

        decisions = []
        for node_id in instance.potential_ids:
            index = plan.decision.plan_index(node_id)
            chosen = instance.node(node_id).plan(index)
            decisions.append({
                "node": node_id,
                "plan": index,
                "cost": chosen.cost if chosen else 0.0,
                "lifetime": chosen.lifetime_years if chosen else None,
                "tau_after": chosen.reclass_cost_after if chosen else None,
                "cap_gain": chosen.capacity_gain if chosen else 0.0,
                "tracks_gain": chosen.tracks_gain if chosen else 0,
            })

        # pairs with a route, plus services that only carry relayed cars
        routes = plan.tcs.assignment.routes
        service_rows = []
        for pair in sorted(set(routes) | set(flows.D)):
            route = routes.get(pair)
            service_flow = flows.D.get(pair, 0.0)
            try:
                tracks = track_demand(service_flow, scenario.track_fn)
            except TrackOverflowError:
                tracks = math.inf
            service_rows.append([pair[0], pair[1], str(route) if route is not None else SERVICE_ONLY,
                                 flows.f.get(pair, 0.0), service_flow, tracks])
        services = pd.DataFrame(service_rows, columns=SERVICE_COLUMNS)

        used = tracks_by_origin(scenario, flows)
        yard_rows = []
        for node in instance.nodes:
            effective = scenario.effective[node.id]
            yard_rows.append({
                "node": node.id,
                "workload": flows.workload(node.id),
                "capacity": effective.capacity,
                "tracks_used": used.get(node.id, 0),
                "tracks": effective.tracks,
                "tau": effective.tau,
            })
        yards = pd.DataFrame(yard_rows)
        yards["capacity_utilization"] = (yards["workload"] / yards["capacity"]).where(yards["capacity"] > 0)
        yards["track_utilization"] = (yards["tracks_used"] / yards["tracks"]).where(yards["tracks"] > 0)
        yards = yards[YARD_COLUMNS]

        breakdown = plan.tcs.cost
        economics = instance.economics
        cost = {
            "capital_raw": plan.capital_raw,
            "annualized_capital": plan.annualized_capital,
            "accumulation": breakdown.accumulation,
            "reclassification": breakdown.reclassification,
            "reclassification_original": breakdown.reclassification_original,
            "reclassification_potential": breakdown.reclassification_potential,
            "z_total": breakdown.z_total,
            "days_per_year": economics.days_per_year,
            "car_hour_value": economics.car_hour_value,
            "annual_operation": plan.annual_operation,
            "objective": plan.objective,
            "budget": economics.budget,
        }
        solver = {
            "mode": result.mode,
            "tcs_mode": tcs_mode,
            "seed": seed,
            "optimality": plan.tcs.optimality,
            "combinations": result.combinations,
            "evaluated": result.evaluated,
            "tcs_evaluations": plan.tcs.evaluations,
        }
        summary = {
            "nodes": len(instance.nodes),
            "potential": len(instance.potential_ids),
            "demands": len(instance.demands),
            "pairs": len(instance.pair_closure),
            "track_fn": economics.track_fn.kind,
        }
        return cls(summary, decisions, services, yards, cost, solver, wall_time)

    def records(self) -> List[Dict]:
        """Report lines in file order; wall time is left out so files stay byte-identical."""
        lines = [{"record": "instance", **self.instance}]
        lines += [{"record": "decision", **entry} for entry in self.decisions]
        lines += [{"record": "service", **row} for row in _records(self.services)]
        lines += [{"record": "yard", **row} for row in _records(self.yards)]
        lines.append({"record": "cost", **self.cost})
        lines.append({"record": "solver", **self.solver})
        return lines

    def render(self) -> str:
        body = "\n".join(json.dumps(line, ensure_ascii=False) for line in self.records())
        return f"{REPORT_FORMAT}\n{body}\n"

    def summary(self) -> str:
        """Fixed-width tables for standard output."""
        parts = [
            f"=== YARD LOCATION REPORT ({self.solver['mode'].upper()}) ===",
            f"Nodes: {self.instance['nodes']}  Potential: {self.instance['potential']}  "
            f"Demands: {self.instance['demands']}  Routable pairs: {self.instance['pairs']}",
        ]
        if self.decisions:
            parts.append("\nInvestment Decision:")
            parts.append(tabulate(
                [[d["node"], d["plan"], d["cost"], d["lifetime"] or "-", d["cap_gain"], d["tracks_gain"]]
                 for d in self.decisions],
                headers=["Node", "Plan", "Cost", "Lifetime (yr)", "Capacity Gain", "Tracks Gain"],
                tablefmt="grid", floatfmt=".3f"))
        parts.append("\nTrain Connecting Services:")
        parts.append(tabulate(self.services, headers=["Origin", "Destination", "Route", "f", "D", "Tracks"],
                              tablefmt="grid", floatfmt=".3f", showindex=False))
        parts.append("\nYard Utilization:")
        parts.append(tabulate(self.yards, headers=["Yard", "Workload", "Capacity", "Cap Util", "Tracks Used",
                                                   "Tracks", "Track Util", "Tau"],
                              tablefmt="grid", floatfmt=".3f", showindex=False, missingval="-"))
        cost = self.cost
        parts.append("\nCost Breakdown:")
        parts.append(tabulate([
            ["Capital outlay", cost["capital_raw"]],
            ["Annualized capital", cost["annualized_capital"]],
            ["Accumulation (car-hours/day)", cost["accumulation"]],
            ["Reclassification (car-hours/day)", cost["reclassification"]],
            ["Z (car-hours/day)", cost["z_total"]],
            ["Annual operation", cost["annual_operation"]],
            ["Objective", cost["objective"]],
        ], headers=["Item", "Value"], tablefmt="grid", floatfmt=".3f"))
        solver = self.solver
        line = (f"\nSolver: {solver['mode']} / TCS {solver['tcs_mode']}  seed {solver['seed']}  "
                f"{solver['optimality']}  evaluated {solver['evaluated']} of {solver['combinations']}")
        if self.wall_time is not None:
            line += f"  wall time {self.wall_time:.3f}s"
        parts.append(line)
        return "\n".join(parts) + "\n"


def write_report(report: RunReport, path: str):
    """
    Write the report file.

    Args:
        report: RunReport to render
        path: Output file, overwritten; LF line endings
    """
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(report.render())
    logger.info("report written to %s", path)


def read_report(path: str) -> Dict[str, List[Dict]]:
    """
    Parse a report file into its records grouped by type.

    Raises:
        ReportFormatError: wrong header, malformed line, or unknown record type
    """
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines or lines[0] != REPORT_FORMAT:
        raise ReportFormatError(f"missing {REPORT_FORMAT} header", line=1, column=1)
    grouped: Dict[str, List[Dict]] = {kind: [] for kind in RECORD_TYPES}
    for number, text in enumerate(lines[1:], start=2):
        if not text.strip():
            continue
        try:
            record = json.loads(text)
        except json.JSONDecodeError as e:
            raise ReportFormatError(e.msg, line=number, column=e.colno) from e
        kind = record.pop("record", None) if isinstance(record, dict) else None
        if kind not in grouped:
            raise ReportFormatError(f"unknown record type {kind!r}", line=number, column=1)
        grouped[kind].append(record)
    return grouped


def write_solve_log(log: List[SearchRecord], path: str):
    """One JSON object per evaluated decision, in evaluation order."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for entry in log:
            handle.write(json.dumps(entry.as_dict()) + "\n")
    logger.info("solve log (%d decisions) written to %s", len(log), path)


def format_violations(violations) -> str:
    """Feasibility diagnostics, worst first."""
    ordered = sorted(violations, key=lambda v: (-v.excess, v.kind, v.location))
    rows = [[v.kind, v.location, v.lhs, v.rhs, v.excess] for v in ordered]
    return tabulate(rows, headers=["Violation", "Where", "Used", "Available", "Excess"],
                    tablefmt="grid", floatfmt=".3f")
