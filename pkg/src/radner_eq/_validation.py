"""Input validation helpers used across the estimator-facing API."""
from __future__ import annotations

import numpy as np

from .errors import ConfigError

__all__ = ["check_point_batch", "check_vector", "check_in_range", "check_positive"]


def check_point_batch(X, dim_factor: int, name: str = "X") -> np.ndarray:
    """Validate an (n, 1 + D) array of (t, y_1..y_D) evaluation rows."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != 1 + dim_factor:
        raise ConfigError(
            f"{name} must have shape (n, 1 + D) with columns (t, y_1..y_{dim_factor}); "
            f"got {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ConfigError(f"{name} contains non-finite entries")
    return X


def check_vector(x, size: int, name: str) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (size,):
        raise ConfigError(f"{name} must be a vector of length {size}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ConfigError(f"{name} contains non-finite entries")
    return x


def check_in_range(value: float, lo: float, hi: float, name: str,
                   lo_open: bool = True, hi_open: bool = False) -> float:
    value = float(value)
    ok_lo = value > lo if lo_open else value >= lo
    ok_hi = value < hi if hi_open else value <= hi
    if not (ok_lo and ok_hi and np.isfinite(value)):
        lo_b = "(" if lo_open else "["
        hi_b = ")" if hi_open else "]"
        raise ConfigError(f"{name} must lie in {lo_b}{lo}, {hi}{hi_b}, got {value}")
    return value


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not (np.isfinite(value) and value > 0):
        raise ConfigError(f"{name} must be positive, got {value}")
    return value
