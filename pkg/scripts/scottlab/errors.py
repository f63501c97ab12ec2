"""
Error hierarchy shared by the library, the CLI and the API.

Each class carries the exit code the CLI reports for it, so dispatch can map
any failure with a single ``except ScottLabError``.
"""

from __future__ import annotations

from typing import Any, List, Optional

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


class ScottLabError(Exception):
    exit_code = EXIT_INPUT


class InputError(ScottLabError):
    exit_code = EXIT_INPUT


class FormulaSyntaxError(InputError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class OrdinalOverflowError(InputError):
    pass


class ArityError(InputError):
    pass


class SignatureMismatchError(InputError):
    pass


class UnboundVariableError(InputError):
    pass


class StructureFormatError(InputError):
    pass


class GroupFormatError(InputError):
    pass


class TraceError(InputError):
    pass


class MalformedDemandError(InputError):
    pass


class PreconditionError(InputError):
    pass


class IncompleteFamilyError(InputError):
    pass


class BudgetExceededError(ScottLabError):
    exit_code = EXIT_BUDGET

    def __init__(self, message: str, count: Optional[int] = None):
        self.count = count
        super().__init__(message)


class SearchBudgetExhausted(BudgetExceededError):
    def __init__(self, message: str, frontier: Optional[List[Any]] = None):
        self.frontier = list(frontier or [])
        super().__init__(message)


class ExtractionFailure(BudgetExceededError):
    def __init__(self, message: str, radius_hint: Optional[int] = None):
        self.radius_hint = radius_hint
        super().__init__(message)


class ConstructionHalted(ScottLabError):
    """A witness demand could not be discharged; the chain stops here."""

    exit_code = EXIT_MISMATCH

    def __init__(self, message: str, demand: Any = None, chain: Optional[List[Any]] = None):
        self.demand = demand
        self.chain = list(chain or [])
        super().__init__(message)
