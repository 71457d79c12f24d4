"""Exception types raised across the package.

Every error carries a stable ``code`` (its class name) so the CLI can
report it as machine-readable JSON.
"""


class SideBySideError(Exception):
    """Base class for all package errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class InvalidParameter(SideBySideError, ValueError):
    pass


class DivisionByZeroCdf(SideBySideError, ZeroDivisionError):
    pass


class ZeroCdfOnGrid(SideBySideError, ValueError):
    pass


class OutOfRangeBid(SideBySideError, ValueError):
    pass


class NonpositiveGammaPrime(SideBySideError, ArithmeticError):
    pass


class DegenerateSupport(SideBySideError, ValueError):
    pass


class NotAnEquilibrium(SideBySideError, RuntimeError):
    pass


class QDerivativeNotPositive(SideBySideError, ValueError):
    pass


class LogConcavityViolated(SideBySideError, ValueError):
    pass


class NotSmooth(SideBySideError, ValueError):
    """A kinked family was used where a smooth one is required."""


class ConfigError(SideBySideError, ValueError):
    """Schema problem in a run configuration; ``key`` names the culprit."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
