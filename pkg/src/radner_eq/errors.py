"""Exception hierarchy shared across the package."""
from __future__ import annotations

__all__ = [
    "RadnerEqError",
    "ConfigError",
    "ConvergenceError",
    "BlowUpError",
]


class RadnerEqError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(RadnerEqError, ValueError):
    """Invalid model, solver, or run configuration."""


class ConvergenceError(RadnerEqError, RuntimeError):
    """Fixed-point iteration failed to reach tolerance.

    Carries the residual history so callers can see whether the iteration
    was diverging (maturity too large for the endowment scale; compare
    against the maturity-scale report of the model module).
    """

    def __init__(self, message: str, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class BlowUpError(RadnerEqError, RuntimeError):
    """Riccati state exploded before the requested maturity.

    Carries the partial path up to the last safe time.
    """

    def __init__(self, message: str, path=None):
        super().__init__(message)
        self.path = path
