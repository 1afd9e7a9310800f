"""
Main CLI Interface
Command-line entry point for yardloc: validate instance files, solve the
yard location problem, generate synthetic instances and count decisions.
"""

import argparse
import os
import sys
import time

# Add the project root to the Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from colorama import Fore, Style, just_fix_windows_console

from config.solver_config import SOLVER_CONFIG, configure_logging
from instances.generator import GeneratorSpec, InstanceGenerator
from instances.instance_store import InstanceStore
from modules.exceptions import (
    EnumerationLimitError,
    GeneratorSpecError,
    InfeasibleError,
    InstanceFormatError,
    NoFeasibleDecisionError,
    YardLocError,
)
from modules.flow_engine import InvestmentDecision
from modules.instance_model import TrackFunction, count_investment_combinations, validate_instance
from modules.investment_solver import ANNEAL, ENUMERATE, UpperSolveConfig, evaluate_decision, solve
from modules.reporting import RunReport, format_violations, write_report, write_solve_log
from modules.tcs_solver import AUTO, EXACT, HEURISTIC

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


class YardLocCLI:
    def __init__(self, stdout=None, stderr=None):
        """
        Initialize the CLI.

        Args:
            stdout: stream for reports and listings (default sys.stdout)
            stderr: stream for status lines and diagnostics (default sys.stderr)
        """
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr
        self.store = InstanceStore()

    def _say(self, text: str = ""):
        self.stdout.write(text + "\n")

    def _status(self, ok: bool, message: str):
        color, mark = (Fore.GREEN, "✅") if ok else (Fore.RED, "❌")
        self.stderr.write(f"{color}{mark} {message}{Style.RESET_ALL}\n")

    def _note(self, message: str):
        self.stderr.write(f"{Fore.YELLOW}⚠️  {message}{Style.RESET_ALL}\n")

    def _load_valid(self, path: str):
        """Load an instance; print violations and return None when it does not validate."""
        instance = self.store.load(path)
        report = validate_instance(instance)
        for warning in report.warnings:
            self._note(f"warning: {warning}")
        if not report.is_valid:
            for violation in report.violations:
                self._say(str(violation))
            self._status(False, f"{path}: {len(report.violations)} violation(s)")
            return None
        return instance

    def cmd_validate(self, path: str) -> int:
        """Exit 0 iff the instance validates; violations go to stdout one per line."""
        if self._load_valid(path) is None:
            return EXIT_DOMAIN
        return EXIT_OK

    def cmd_count(self, path: str) -> int:
        instance = self._load_valid(path)
        if instance is None:
            return EXIT_DOMAIN
        self._say(f"combinations including plan 0: {count_investment_combinations(instance, True)}")
        self._say(f"combinations excluding plan 0: {count_investment_combinations(instance, False)}")
        return EXIT_OK

    def cmd_solve(self, args) -> int:
        """
        Solve one instance file and print the summary.

        Args:
            args: Parsed solve arguments

        Returns:
            Exit code; EXIT_DOMAIN when the instance is invalid or no feasible plan exists
        """
        instance = self._load_valid(args.file)
        if instance is None:
            return EXIT_DOMAIN
        if args.budget_override is not None:
            instance = instance.with_economics(budget=args.budget_override)
        if args.track_fn == TrackFunction.LINEAR:
            instance = instance.with_economics(track_fn=TrackFunction.linear())
        elif args.track_fn == TrackFunction.STEP:
            # a step function from the file keeps its own thresholds
            current = instance.economics.track_fn
            thresholds = current.thresholds if current.kind == TrackFunction.STEP else None
            instance = instance.with_economics(track_fn=TrackFunction.step(thresholds))

        seed = SOLVER_CONFIG['seed'] if args.seed is None else args.seed
        config = UpperSolveConfig.from_settings(
            mode=args.mode,
            seed=seed,
            lower_mode=args.tcs,
            enumerate_limit=args.enumerate_limit,
            steps=args.steps,
            restarts=args.restarts,
        )

        started = time.perf_counter()
        try:
            result = solve(instance, config)
        except EnumerationLimitError as e:
            self._status(False, f"{e}; try --mode {ANNEAL}")
            return EXIT_DOMAIN
        except (NoFeasibleDecisionError, InfeasibleError) as e:
            self._status(False, str(e))
            self._baseline_diagnostics(instance, config)
            return EXIT_DOMAIN
        elapsed = time.perf_counter() - started

        report = RunReport.from_result(result, seed=seed, tcs_mode=args.tcs, wall_time=elapsed)
        self.stdout.write(report.summary())
        if args.out:
            write_report(report, args.out)
        if args.log:
            write_solve_log(result.log, args.log)
        self._status(True, f"objective {result.plan.objective:.3f} in {elapsed:.3f}s")
        return EXIT_OK

    def _baseline_diagnostics(self, instance, config: UpperSolveConfig):
        """Show why the no-investment decision fails, worst violation first."""
        try:
            baseline = evaluate_decision(instance, InvestmentDecision.baseline(instance), config)
        except YardLocError as e:
            self._note(f"baseline not evaluated: {e}")
            return
        if baseline.tcs.violations:
            self.stderr.write("Baseline feasibility diagnostics:\n")
            self.stderr.write(format_violations(baseline.tcs.violations) + "\n")

    def cmd_generate(self, args) -> int:
        spec = GeneratorSpec(
            node_count=args.nodes,
            potential_fraction=args.potential_fraction,
            plans_per_node=args.plans,
            demand_density=args.density,
            capacity_slack=args.slack,
            rng_seed=args.seed,
        )
        instance = InstanceGenerator(spec).generate()
        self.store.save(instance, args.out)
        self._status(True, f"wrote {len(instance.nodes)} nodes, {len(instance.demands)} demands to {args.out}")
        return EXIT_OK

    @staticmethod
    def build_parser() -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog="yardloc", description="Classification yard location solver")
        parser.add_argument("--log-level", default=None, help="logging level (default from YARDLOC_LOG_LEVEL)")
        commands = parser.add_subparsers(dest="command", required=True)

        validate = commands.add_parser("validate", help="check an instance file")
        validate.add_argument("file")

        count = commands.add_parser("count", help="count investment combinations")
        count.add_argument("file")

        run = commands.add_parser("solve", help="optimize yard investments")
        run.add_argument("file")
        run.add_argument("--mode", choices=[ENUMERATE, ANNEAL], default=ENUMERATE)
        run.add_argument("--tcs", choices=[EXACT, HEURISTIC, AUTO], default=AUTO)
        run.add_argument("--budget-override", type=float, default=None)
        run.add_argument("--track-fn", choices=[TrackFunction.LINEAR, TrackFunction.STEP], default=None)
        run.add_argument("--seed", type=int, default=None)
        run.add_argument("--out", default=None, help="structured report file")
        run.add_argument("--log", default=None, help="solve log file (JSON lines)")
        run.add_argument("--enumerate-limit", type=int, default=None)
        run.add_argument("--restarts", type=int, default=None)
        run.add_argument("--steps", type=int, default=None, help="annealing steps")

        generate = commands.add_parser("generate", help="write a synthetic instance")
        generate.add_argument("--nodes", type=int, default=6)
        generate.add_argument("--potential-fraction", type=float, default=0.5)
        generate.add_argument("--plans", type=int, default=2)
        generate.add_argument("--density", type=float, default=0.3)
        generate.add_argument("--slack", type=float, default=1.5)
        generate.add_argument("--seed", type=int, default=0)
        generate.add_argument("--out", required=True)
        return parser

    def run(self, argv=None) -> int:
        """Parse argv, dispatch, and map failures onto the exit-code contract."""
        try:
            args = self.build_parser().parse_args(argv)
        except SystemExit as e:
            return EXIT_OK if e.code in (0, None) else EXIT_USAGE
        configure_logging(args.log_level)

        try:
            if args.command == "validate":
                return self.cmd_validate(args.file)
            if args.command == "count":
                return self.cmd_count(args.file)
            if args.command == "solve":
                return self.cmd_solve(args)
            return self.cmd_generate(args)
        except OSError as e:
            self._status(False, f"I/O error: {e}")
            return EXIT_USAGE
        except (InstanceFormatError, GeneratorSpecError, ValueError) as e:
            self._status(False, str(e))
            return EXIT_USAGE
        except YardLocError as e:
            self._status(False, str(e))
            return EXIT_DOMAIN
        except KeyboardInterrupt:
            self._status(False, "interrupted")
            return EXIT_DOMAIN


def main():
    """Main function to run the application."""
    just_fix_windows_console()
    sys.exit(YardLocCLI().run())


if __name__ == "__main__":
    main()
