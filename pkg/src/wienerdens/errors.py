"""Exception hierarchy shared by all modules and mapped to CLI exit codes."""


class WienerDensError(Exception):
    exit_code = 1


class ValidationError(WienerDensError, ValueError):
    """Invalid parameter or malformed input."""

    exit_code = 2


class CapacityError(WienerDensError):
    """An index set or table would exceed the configured size cap."""

    exit_code = 3


class NumericalError(WienerDensError, ArithmeticError):
    """A numerical routine failed (e.g. eigensolver non-convergence)."""

    exit_code = 4
