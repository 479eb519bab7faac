"""Exception hierarchy.

Validation errors (bad parameters, malformed files, box mismatches) and
numerical failures (saturated scans, exhausted prefixes) are kept apart so the
command line can map them to distinct exit codes.
"""


class GSHError(Exception):
    pass


class ValidationError(GSHError, ValueError):
    """Input outside an operation's precondition."""


class BoxError(ValidationError):
    """Coefficient boxes are incompatible or exhausted."""


class NumericalError(GSHError, ArithmeticError):
    """A computation could not reach its accuracy target."""


class SaturationError(NumericalError):
    """A supremum scan ended at the edge of its search range."""


class PrefixExhaustedError(NumericalError):
    """A series needed more sequence terms than the materialized prefix."""
