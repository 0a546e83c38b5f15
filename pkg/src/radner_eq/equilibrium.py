"""Equilibrium quantities shared by both solver pipelines.

Given the value functions' origin values and gradient fields, the
interest rate, optimal strategies, and initial consumptions all follow in
closed form, and market clearing holds as an algebraic identity:

    r      = (1 / (tau T)) sum_i (u_i(0,0) - g0_i),       tau = sum_i 1/a_i
    H_i    = (lambda - a_i Cbar^T grad u_i) / (a_i e^{r(T-t)})
    c0_i   = (u_i(0,0) - g0_i - r T / a_i) / (1 + e^{rT})

so sum_i H_i = e^{-r(T-t)} (tau lambda - Cbar^T sum_i grad u_i) = 0
whenever lambda is the coupling of the same gradients, and sum_i c0_i = 0
by the definition of r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._validation import check_point_batch
from .errors import ConfigError
from .market import MarketConfig

__all__ = [
    "Equilibrium",
    "equilibrium_rate",
    "initial_consumption",
    "consumption_objective",
]


def equilibrium_rate(u_at_origin, g0, market: MarketConfig, T: float) -> float:
    """Constant interest rate making time-zero consumption clear."""
    if not T > 0:
        raise ConfigError(f"equilibrium rate: need T > 0, got {T}")
    u0 = np.atleast_1d(np.asarray(u_at_origin, dtype=float))
    g0 = np.atleast_1d(np.asarray(g0, dtype=float))
    return float(np.sum(u0 - g0) / (market.tau_sigma * T))


def consumption_objective(c0: float, a_i: float, u0_i: float, g0_i: float,
                          r: float, T: float) -> float:
    """Time-zero utility of consuming c0 now and investing the rest."""
    return -math.exp(-a_i * (c0 + g0_i)) - math.exp(a_i * math.exp(r * T) * c0 - a_i * u0_i)


def initial_consumption(i: int, u_at_origin, g0, r: float,
                        market: MarketConfig, T: float) -> float:
    """Unique maximizer of the strictly concave two-date consumption split.

    First-order condition of ``consumption_objective`` in closed form.
    """
    if not np.isfinite(r):
        raise ConfigError("initial consumption: rate must be finite")
    a_i = float(market.risk_aversions[i])
    u0_i = float(np.atleast_1d(u_at_origin)[i])
    g0_i = float(np.atleast_1d(g0)[i])
    return (u0_i - g0_i - r * T / a_i) / (1.0 + math.exp(r * T))


@dataclass
class Equilibrium:
    """Interest rate, market price of risk, strategies, and consumptions.

    ``lambda_fn`` maps (t, points(n, D)) -> (n, N); ``grad_fns[i]`` maps
    (t, points) -> (n, D) and is the value-function gradient of investor
    i.  Strategies are derived, not stored.
    """

    market: MarketConfig
    maturity: float
    r: float
    c0: np.ndarray
    lambda_fn: Callable[[float, np.ndarray], np.ndarray]
    grad_fns: Sequence[Callable[[float, np.ndarray], np.ndarray]]
    provenance: str
    u_at_origin: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.c0 = np.atleast_1d(np.asarray(self.c0, dtype=float))
        if self.c0.size != self.market.num_investors:
            raise ConfigError("equilibrium: c0 must have one entry per investor")
        if abs(float(self.c0.sum())) > 1e-10:
            raise ConfigError(
                f"equilibrium: initial consumptions do not clear "
                f"(sum = {float(self.c0.sum()):.3e})"
            )
        if self.provenance not in ("picard", "riccati"):
            raise ConfigError("equilibrium: provenance must be picard or riccati")

    def lambda_at(self, t: float, y) -> np.ndarray:
        """Market price of risk at time t, points y of shape (n, D) or (D,)."""
        y = np.asarray(y, dtype=float)
        scalar = y.ndim <= 1
        out = self.lambda_fn(float(t), y.reshape(-1, self.market.dim_factor))
        return out[0] if scalar else out

    def strategy(self, i: int, t: float, y) -> np.ndarray:
        """Optimal holdings of investor i in the N traded assets."""
        y = np.asarray(y, dtype=float)
        scalar = y.ndim <= 1
        pts = y.reshape(-1, self.market.dim_factor)
        a_i = float(self.market.risk_aversions[i])
        lam = self.lambda_fn(float(t), pts)
        grad = self.grad_fns[i](float(t), pts)
        proj = grad @ self.market.cbar(float(t))
        disc = a_i * math.exp(self.r * (self.maturity - float(t)))
        out = (lam - a_i * proj) / disc
        return out[0] if scalar else out

    def total_strategy(self, t: float, y) -> np.ndarray:
        """sum_i H_i; identically zero in a clearing equilibrium."""
        y = np.asarray(y, dtype=float)
        pts = y.reshape(-1, self.market.dim_factor)
        total = np.zeros((pts.shape[0], self.market.dim_assets))
        for i in range(self.market.num_investors):
            total += self.strategy(i, t, pts)
        return total

    def predict_lambda(self, X) -> np.ndarray:
        """Evaluate lambda on rows (t, y_1..y_D); returns (n, N)."""
        X = check_point_batch(X, self.market.dim_factor)
        out = np.empty((X.shape[0], self.market.dim_assets))
        for k in range(X.shape[0]):
            out[k] = self.lambda_fn(float(X[k, 0]), X[k, 1:][None, :])[0]
        return out


def assemble_equilibrium(market: MarketConfig, T: float, u_at_origin,
                         g0, lambda_fn, grad_fns, provenance: str) -> Equilibrium:
    """Wire rate + consumptions from the solved value functions."""
    u0 = np.atleast_1d(np.asarray(u_at_origin, dtype=float))
    g0 = np.atleast_1d(np.asarray(g0, dtype=float))
    r = equilibrium_rate(u0, g0, market, T)
    c0 = np.array([
        initial_consumption(i, u0, g0, r, market, T)
        for i in range(market.num_investors)
    ])
    return Equilibrium(
        market=market, maturity=float(T), r=r, c0=c0, lambda_fn=lambda_fn,
        grad_fns=list(grad_fns), provenance=provenance, u_at_origin=u0,
    )
