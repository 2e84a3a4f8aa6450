"""Exception types shared across the package."""
from __future__ import annotations

__all__ = [
    "DomainError",
    "RangeError",
    "HardRegimeError",
    "ConvergenceError",
    "StratumOverflow",
]


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(ValueError):
    """A deviation level ``x`` lies outside the band where a formula applies."""


class HardRegimeError(DomainError):
    """The walk is not softly censored: ``n V(M) >= 1``."""


class ConvergenceError(ArithmeticError):
    """Adaptive quadrature failed to reach its tolerance."""

    def __init__(self, message: str, value: float = float("nan"), error_estimate: float = float("inf")):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class StratumOverflow(ArithmeticError):
    """Binomial stratum weights underflow even in log space."""
