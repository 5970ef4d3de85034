"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class BddtsError(Exception):
    """Base class for all library errors."""


class SortMismatch(BddtsError):
    pass


class UnboundVariable(BddtsError):
    pass


class DomainTooLarge(BddtsError):
    pass


class NonGroundImage(BddtsError):
    pass


class IncompatibleAssignments(BddtsError):
    pass


class UnknownLocation(BddtsError):
    pass


class ValidationFailed(BddtsError):
    def __init__(self, report):
        super().__init__(f"model validation failed: {report}")
        self.report = report


class IncompatibleModels(BddtsError):
    pass


class NotSaturated(BddtsError):
    pass


class IniNotTotal(BddtsError):
    pass


class NotOutputRich(BddtsError):
    pass


class RenamingNotDerivable(BddtsError):
    pass


class RenamingUndefined(BddtsError):
    pass


class IniViolatesInputGuard(BddtsError):
    pass


class GateMismatch(BddtsError):
    pass


class ParseError(BddtsError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        loc = f" at line {line}, col {col}" if line else ""
        super().__init__(f"{message}{loc}")
        self.line = line
        self.col = col


class UnknownGateOrVariable(ParseError):
    pass
