"""
Custom exceptions for the wiretap workbench.
"""

from typing import Optional


class WorkbenchError(Exception):
    """Base exception for all workbench errors."""

    exit_code = 1

    def __init__(self, message: str, error_code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or "GENERAL_ERROR"


class ValidationError(WorkbenchError):
    """Raised when input validation fails."""

    exit_code = 2

    def __init__(self, message: str, error_code: Optional[str] = None):
        super().__init__(message, error_code or "VALIDATION_ERROR")


class AlphabetMismatchError(ValidationError):
    """Raised when two objects that must share an alphabet do not."""

    def __init__(self, expected, actual):
        super().__init__(
            f"Alphabet mismatch: expected {list(expected)}, got {list(actual)}",
            "ALPHABET_MISMATCH",
        )
        self.expected = tuple(expected)
        self.actual = tuple(actual)


class ConfigurationError(ValidationError):
    """Raised when an experiment configuration is unusable."""

    def __init__(self, message: str, findings: Optional[list] = None):
        super().__init__(message, "CONFIG_ERROR")
        self.findings = findings or []


class CapExceededError(WorkbenchError):
    """Raised when an exact enumeration would exceed a configured cap."""

    exit_code = 3

    def __init__(self, what: str, requested: int, cap: int, hint: str = ""):
        message = f"{what} needs {requested} entries, cap is {cap}"
        if hint:
            message = f"{message} ({hint})"
        super().__init__(message, "CAP_EXCEEDED")
        self.what = what
        self.requested = requested
        self.cap = cap
        self.hint = hint


class ConvergenceError(WorkbenchError):
    """Raised when an iterative solver does not converge."""

    exit_code = 4

    def __init__(self, solver: str, iterations: int, bracket_width: float):
        super().__init__(
            f"{solver} did not converge after {iterations} iterations "
            f"(bracket width {bracket_width:.3e})",
            "CONVERGENCE_ERROR",
        )
        self.solver = solver
        self.iterations = iterations
        self.bracket_width = bracket_width


class InvariantViolationError(WorkbenchError):
    """Raised when a computed quantity breaks an inequality it must satisfy."""

    def __init__(self, invariant: str, lhs: float, rhs: float):
        super().__init__(
            f"Invariant '{invariant}' violated: {lhs!r} > {rhs!r}",
            "INVARIANT_VIOLATION",
        )
        self.invariant = invariant
        self.lhs = lhs
        self.rhs = rhs


class RunRecordError(WorkbenchError):
    """Raised when run manifests cannot be written, read or verified."""

    def __init__(self, message: str):
        super().__init__(message, "RUN_RECORD_ERROR")
