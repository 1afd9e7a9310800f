"""
Exceptions raised by the yardloc solver modules.
Validation and feasibility problems are returned as reports, not raised.
"""

from typing import Optional, Tuple


class YardLocError(Exception):
    """Base class for every domain error in yardloc."""


class InstanceFormatError(YardLocError):
    """The instance file could not be read into an Instance."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line} column {column}: {message}"
        super().__init__(message)


class InstanceValidationError(YardLocError):
    """An instance failed validate_instance."""

    def __init__(self, report):
        self.report = report
        rules = ", ".join(sorted({v.rule_id for v in report.violations}))
        super().__init__(f"instance has {len(report.violations)} violation(s): {rules}")


class ItineraryError(YardLocError):
    """An itinerary could not be derived (disconnected pair, bad edge)."""


class RoutingCycleError(YardLocError):
    """The per-destination Via graph contains a cycle."""

    def __init__(self, destination: str, cycle: Tuple[str, ...]):
        self.destination = destination
        self.cycle = cycle
        super().__init__(f"routing cycle toward {destination}: {' -> '.join(cycle)}")


class UnassignedPairError(YardLocError):
    """Flow reached an (origin, destination) pair with no route entry."""

    def __init__(self, pair):
        self.pair = pair
        super().__init__(f"no route for pair {pair[0]}->{pair[1]} carrying flow")


class InvalidRouteError(YardLocError):
    """A Via(k) route names a node outside the pair's itinerary."""


class TrackOverflowError(YardLocError):
    """Service flow exceeds the largest configured step threshold."""

    def __init__(self, flow: float, largest: float):
        self.flow = flow
        self.largest = largest
        super().__init__(f"service flow {flow} exceeds largest track threshold {largest}")


class ExactLimitExceededError(YardLocError):
    """The induced pair closure is too large for exact enumeration."""


class EnumerationLimitError(YardLocError):
    """The investment combination count exceeds enumerate_limit."""


class InfeasibleError(YardLocError):
    """No TCS assignment satisfies the capacity and track constraints."""

    def __init__(self, message: str, violations=()):
        self.violations = tuple(violations)
        super().__init__(message)


class NoFeasibleDecisionError(YardLocError):
    """No investment decision is both within budget and lower-level feasible."""


class GeneratorSpecError(YardLocError):
    """Contradictory or out-of-range generator settings."""


class ReportFormatError(InstanceFormatError):
    """A report file is not in the yardloc-report-v1 line format."""
