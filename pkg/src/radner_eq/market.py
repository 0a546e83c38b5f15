"""Market configuration and the reduction to a driftless factor process.

An Ornstein-Uhlenbeck factor dY = (A(t) + B(t) Y) dt + C(t) dW is mapped
to the driftless form Y~_t = int_0^t C~(u) dW_u through the fundamental
matrix Phi of B.  All solvers downstream work exclusively with the
driftless form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._validation import check_in_range, check_vector
from .endowments import Endowment, TransformedEndowment
from .errors import ConfigError
from .schedules import VolSchedule, constant_schedule

__all__ = ["MarketConfig", "RawFactorSpec", "ReducedCoordinates", "reduce_coordinates"]

_ELLIPTICITY_SAMPLES = 2001
_ELLIPTICITY_SLACK = 1e-9


@dataclass(frozen=True)
class MarketConfig:
    """Static description of the traded market.

    N <= D assets trade against a D-dimensional Gaussian factor; with
    N < D the endowment risk is not fully hedgeable and the model is
    incomplete.
    """

    dim_factor: int
    dim_assets: int
    num_investors: int
    risk_aversions: np.ndarray
    vol_schedule: VolSchedule
    maturity: float = 1.0
    holder_alpha: float = 0.5
    delta_lower: float = field(default=None)  # type: ignore[assignment]
    delta_upper: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        D, N, I = self.dim_factor, self.dim_assets, self.num_investors
        if not (isinstance(D, int) and D >= 1):
            raise ConfigError(f"dim_factor must be a positive integer, got {D}")
        if not (isinstance(N, int) and N >= 1):
            raise ConfigError(f"dim_assets must be a positive integer, got {N}")
        if N > D:
            raise ConfigError(
                f"market: dimension rule N <= D violated (dim_assets={N} > dim_factor={D})"
            )
        if not (isinstance(I, int) and I >= 1):
            raise ConfigError(f"num_investors must be a positive integer, got {I}")
        a = check_vector(self.risk_aversions, I, "risk_aversions")
        if np.any(a <= 0):
            raise ConfigError("risk_aversions must all be positive")
        object.__setattr__(self, "risk_aversions", a)
        check_in_range(self.maturity, 0.0, 1.0, "maturity")
        check_in_range(self.holder_alpha, 0.0, 1.0, "holder_alpha", hi_open=True)
        if self.vol_schedule.dim != D:
            raise ConfigError(
                f"vol_schedule is {self.vol_schedule.dim}-dimensional, expected {D}"
            )
        lo, hi = self.vol_schedule.ellipticity_range(_ELLIPTICITY_SAMPLES)
        if self.delta_lower is None:
            object.__setattr__(self, "delta_lower", max(lo - _ELLIPTICITY_SLACK, 1e-300))
        if self.delta_upper is None:
            object.__setattr__(self, "delta_upper", hi + _ELLIPTICITY_SLACK)
        if not 0.0 < self.delta_lower < self.delta_upper:
            raise ConfigError(
                f"ellipticity bounds must satisfy 0 < delta_lower < delta_upper, "
                f"got ({self.delta_lower}, {self.delta_upper})"
            )
        if lo < self.delta_lower - _ELLIPTICITY_SLACK or hi > self.delta_upper + _ELLIPTICITY_SLACK:
            raise ConfigError(
                f"vol schedule violates the configured ellipticity band: sampled "
                f"eigenvalue range [{lo:.6g}, {hi:.6g}] escapes "
                f"[{self.delta_lower:.6g}, {self.delta_upper:.6g}]"
            )

    @property
    def tau_sigma(self) -> float:
        """Aggregate risk tolerance: sum of 1/a_i. Strictly positive."""
        return float(np.sum(1.0 / self.risk_aversions))

    def vol(self, t):
        """C(t), shape (..., D, D)."""
        return self.vol_schedule(t)

    def cbar(self, t):
        """First N columns of C(t): the loadings on the traded noises."""
        return self.vol_schedule(t)[..., :, : self.dim_assets]

    def check_endowments(self, endowments: Sequence[Endowment]) -> list[Endowment]:
        endowments = list(endowments)
        if len(endowments) != self.num_investors:
            raise ConfigError(
                f"expected {self.num_investors} endowments, got {len(endowments)}"
            )
        return endowments


@dataclass
class RawFactorSpec:
    """Ornstein-Uhlenbeck data dY = (A + B Y) dt + C dW, Y_0 given."""

    A: Callable[[float], np.ndarray]
    B: Callable[[float], np.ndarray]
    C: VolSchedule
    Y0: np.ndarray

    def __post_init__(self):
        self.Y0 = np.atleast_1d(np.asarray(self.Y0, dtype=float))
        D = self.C.dim
        for name, fn, shape in (("A", self.A, (D,)), ("B", self.B, (D, D))):
            probe = np.asarray(fn(0.0), dtype=float)
            if probe.shape != shape:
                raise ConfigError(f"raw factor: {name}(t) must have shape {shape}")
        for t in np.linspace(0.0, 1.0, 33):
            if not (np.all(np.isfinite(np.asarray(self.A(t))))
                    and np.all(np.isfinite(np.asarray(self.B(t))))):
                raise ConfigError("raw factor: A and B must be finite on [0, 1]")


@dataclass
class ReducedCoordinates:
    """Output of the change of coordinates: driftless schedule plus wrapped
    endowments g~(y) = g(Phi(T)(Y0 + int Phi^-1 A + y))."""

    vol_schedule: VolSchedule
    endowments: list[Endowment]
    fundamental_terminal: np.ndarray
    drift_shift: np.ndarray

    def __iter__(self):
        return iter((self.vol_schedule, self.endowments))


def _is_zero_map(fn: Callable, shape, T: float) -> bool:
    ts = np.linspace(0.0, T, 65)
    return all(np.all(np.asarray(fn(t), dtype=float) == 0.0) for t in ts)


def reduce_coordinates(raw: RawFactorSpec, endowments: Sequence[Endowment],
                       T: float, num_steps: int = 1024,
                       schedule_knots: int = 257) -> ReducedCoordinates:
    """Remove drift and autoregression from the factor process.

    Integrates the fundamental matrix Phi' = B Phi, Phi(0) = I (together
    with its inverse and the drift integral) by a classical 4th-order
    fixed-step scheme with step T/num_steps, then returns the transformed
    volatility C~ = Phi^-1 C as a piecewise-linear schedule sampled on
    ``schedule_knots`` knots, plus endowment wrappers.
    """
    check_in_range(T, 0.0, 1.0, "T")
    D = raw.C.dim
    endowments = list(endowments)

    if (_is_zero_map(raw.A, (D,), T) and _is_zero_map(raw.B, (D, D), T)
            and np.all(raw.Y0 == 0.0)):
        # Identity transform: hand back the inputs untouched.
        return ReducedCoordinates(raw.C, endowments, np.eye(D), np.zeros(D))

    # Step count rounded to a multiple of the knot intervals so every knot
    # sits exactly on the integration grid.
    segments = schedule_knots - 1
    per_knot = max(1, -(-num_steps // segments))
    num_steps = per_knot * segments
    h = T / num_steps

    eye = np.eye(D)
    state = (eye.copy(), eye.copy(), np.zeros(D))  # Phi, Phi^{-1}, int Phi^{-1} A
    psi_knots = np.empty((schedule_knots, D, D))
    psi_knots[0] = eye

    def rhs(t, st):
        p, q, _ = st
        A_t = np.asarray(raw.A(t), dtype=float)
        B_t = np.asarray(raw.B(t), dtype=float)
        return B_t @ p, -q @ B_t, q @ A_t

    for k in range(num_steps):
        t = k * h
        k1 = rhs(t, state)
        k2 = rhs(t + 0.5 * h, tuple(s + 0.5 * h * d for s, d in zip(state, k1)))
        k3 = rhs(t + 0.5 * h, tuple(s + 0.5 * h * d for s, d in zip(state, k2)))
        k4 = rhs(t + h, tuple(s + h * d for s, d in zip(state, k3)))
        state = tuple(
            s + (h / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
            for s, d1, d2, d3, d4 in zip(state, k1, k2, k3, k4)
        )
        phi = state[0]
        if not np.all(np.isfinite(phi)) or np.linalg.cond(phi) > 1e12:
            raise ConfigError(
                f"coordinate reduction: fundamental matrix singular near t={t + h:.6g}"
            )
        if (k + 1) % per_knot == 0:
            psi_knots[(k + 1) // per_knot] = state[1]

    phi, _, drift = state

    # Sample C~ = Phi^{-1} C at the knots and rebuild a piecewise-linear
    # schedule (keeps exact Gram integrals downstream).
    knots = np.linspace(0.0, T, schedule_knots)
    c_samples = np.einsum("kij,kjl->kil", psi_knots, raw.C(knots))

    breakpoints = list(knots)
    pieces = []
    for k in range(segments):
        width = knots[k + 1] - knots[k]
        slope = (c_samples[k + 1] - c_samples[k]) / width
        pieces.append(np.stack([c_samples[k], slope]))
    if T < 1.0:
        breakpoints.append(1.0)
        pieces.append(np.stack([c_samples[-1], np.zeros((D, D))]))
    schedule = VolSchedule(breakpoints, np.stack(pieces))

    lo, _ = schedule.ellipticity_range()
    if lo <= 0.0:
        raise ConfigError(
            "coordinate reduction: transformed schedule loses ellipticity "
            f"(sampled minimum eigenvalue {lo:.6g})"
        )

    shift = raw.Y0 + drift
    wrapped = [TransformedEndowment(g, phi, shift) for g in endowments]
    return ReducedCoordinates(schedule, wrapped, phi, shift)


def single_factor_market(c: float = 1.0, a: float = 1.0, maturity: float = 1.0,
                         holder_alpha: float = 0.5) -> MarketConfig:
    """Convenience: the I=1, D=N=1, constant-volatility complete market."""
    return MarketConfig(
        dim_factor=1,
        dim_assets=1,
        num_investors=1,
        risk_aversions=np.array([a]),
        vol_schedule=constant_schedule([[c]]),
        maturity=maturity,
        holder_alpha=holder_alpha,
    )
