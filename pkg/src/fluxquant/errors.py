"""Exception types raised by fluxquant."""


class FluxquantError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(FluxquantError, ValueError):
    """An input violates a documented precondition."""


class ContractViolationError(FluxquantError, ValueError):
    """Objects passed together are mutually inconsistent (frame, allocation, basis)."""


class SingularConfigurationError(FluxquantError, ArithmeticError):
    """A closed-form expression hits a vanishing denominator."""


class AccuracyError(FluxquantError, RuntimeError):
    """Time stepping did not converge under step halving."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ParseError(FluxquantError, ValueError):
    """Malformed input file."""
