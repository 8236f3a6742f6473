"""Exception hierarchy.

Every error carries a stable ``code`` string (printed by the CLI) and belongs
to one of three families that map onto process exit statuses.
"""


class EcbError(Exception):
    code = "ERROR"
    exit_status = 1

    def __init__(self, message: str = "", **context):
        super().__init__(message)
        self.context = context

    def __str__(self):
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


class ValidationError(EcbError, ValueError):
    code = "VALIDATION_ERROR"
    exit_status = 2


class ParseError(ValidationError):
    code = "PARSE_ERROR"

    def __init__(self, message: str = "", line: int | None = None, column: int | None = None, **context):
        super().__init__(message, **context)
        self.line = line
        self.column = column


class UnitError(ValidationError):
    code = "UNIT_ERROR"


class RangeError(ValidationError):
    code = "RANGE_ERROR"


class InvalidSpeeds(ValidationError):
    code = "INVALID_SPEEDS"


class NumericalError(EcbError, ArithmeticError):
    code = "NUMERICAL_ERROR"
    exit_status = 3


class DegenerateDenominator(NumericalError):
    code = "DEGENERATE_DENOMINATOR"


class NonConverged(NumericalError):
    code = "NON_CONVERGED"


class SingularSystem(NumericalError):
    code = "SINGULAR_SYSTEM"


class NoConvergence(NumericalError):
    code = "NO_CONVERGENCE"


class ZeroReference(NumericalError):
    code = "ZERO_REFERENCE"


class EmptyFeasibleSet(NumericalError):
    code = "EMPTY_FEASIBLE_SET"
