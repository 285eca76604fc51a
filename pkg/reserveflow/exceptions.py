from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from typing import Iterable, Sequence


class ReserveFlowError(Exception):
    """Base class for exceptions in this module."""

    pass


class CaseError(ReserveFlowError):
    """Base class for problems with a market case document."""

    pass


class CaseParseError(CaseError):
    """Exception raised when a case document cannot be parsed."""

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class CaseSchemaError(CaseError):
    """Exception raised when a case document does not match the case schema."""

    def __init__(self, problems: Sequence[str]) -> None:
        self.problems = tuple(problems)
        super().__init__("; ".join(self.problems))


class CaseValidationError(CaseError):
    """Exception raised when a parsed case fails semantic validation."""

    def __init__(self, errors: Sequence[str]) -> None:
        self.errors = tuple(errors)
        super().__init__("; ".join(self.errors))


class MissingDataError(CaseError):
    """Exception raised when bundled network data is unavailable."""

    pass


class UnknownScenarioError(CaseError):
    """Exception raised when a scenario reference does not resolve."""

    pass


class IslandedNetworkError(ReserveFlowError):
    """Exception raised when the network splits into islands."""

    def __init__(self, buses: Iterable[int], scenario: str = "base") -> None:
        self.buses = tuple(buses)
        self.scenario = scenario
        super().__init__(
            f"Topology '{scenario}' islands buses {list(self.buses)} from the slack bus"
        )


class NumericalFailureError(ReserveFlowError):
    """Exception raised when the LP solver fails to reach a verdict."""

    pass


class TooLargeError(ReserveFlowError):
    """Exception raised when basis enumeration exceeds its budget."""

    pass


class MarketError(ReserveFlowError):
    """Base class for market clearing verdicts other than optimal."""

    def __init__(self, message: str, constraints: Sequence[str] = ()) -> None:
        self.constraints = tuple(constraints)
        super().__init__(message)


class InfeasibleMarketError(MarketError):
    """Exception raised when no dispatch satisfies the market constraints."""

    pass


class UnboundedMarketError(MarketError):
    """Exception raised when the market objective has no lower bound."""

    pass


class DegenerateEnvelopeError(ReserveFlowError):
    """Exception raised when one-sided sensitivities disagree."""

    pass


class CalibrationFailedError(ReserveFlowError):
    """Exception raised when calibration cannot reach the published values."""

    def __init__(self, message: str, result: object = None) -> None:
        self.result = result
        super().__init__(message)
