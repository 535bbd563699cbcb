"""Exception types shared across the package."""


class PovmcError(Exception):
    """Base class for all package errors."""


class ValidationError(PovmcError, ValueError):
    """An object violates one of its structural invariants."""


class DimensionError(PovmcError, ValueError):
    """Operands have incompatible shapes or dimensions."""


class DomainError(PovmcError, ValueError):
    """Input is outside the mathematical domain of an operation."""


class StrategyCapError(PovmcError, RuntimeError):
    """The deterministic-strategy count exceeds the configured cap.

    Raised instead of attempting a solve that would blow up combinatorially;
    this is an explicit refusal, never a wrong answer.
    """


class QuadratureError(PovmcError, RuntimeError):
    """Numerical integration failed to reach the requested tolerance."""
