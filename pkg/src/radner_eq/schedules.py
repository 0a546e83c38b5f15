"""Piecewise-polynomial volatility schedules t -> C(t).

The factor process is driven through a deterministic D x D volatility
matrix C(t).  Restricting C to piecewise polynomials in t keeps the
accumulated covariance

    Sigma(t, s) = int_t^s C(u) C(u)^T du

and the plain integral int_t^s C(u) du exactly computable, which removes
one discretization layer from every downstream quadrature.
"""
from __future__ import annotations

import numpy as np

__all__ = ["VolSchedule", "constant_schedule", "linear_schedule"]


class VolSchedule:
    """Matrix-valued piecewise polynomial on [0, 1].

    Pieces are indexed by breakpoints 0 = b_0 < b_1 < ... < b_P = 1; on
    piece p the matrix is sum_a coeffs[p, a] * (t - b_p)**a.
    """

    def __init__(self, breakpoints, coeffs):
        breakpoints = np.asarray(breakpoints, dtype=float)
        coeffs = np.asarray(coeffs, dtype=float)
        if breakpoints.ndim != 1 or breakpoints.size < 2:
            raise ValueError("vol schedule: need at least two breakpoints")
        if np.any(np.diff(breakpoints) <= 0):
            raise ValueError("vol schedule: breakpoints must be increasing")
        if coeffs.ndim != 4 or coeffs.shape[0] != breakpoints.size - 1:
            raise ValueError(
                "vol schedule: coeffs must have shape (pieces, degree+1, D, D)"
            )
        if coeffs.shape[2] != coeffs.shape[3]:
            raise ValueError("vol schedule: C(t) must be square")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("vol schedule: coefficients must be finite")
        self.breakpoints = breakpoints
        self.coeffs = coeffs

    @property
    def dim(self) -> int:
        return self.coeffs.shape[2]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    def _piece_index(self, t):
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        return np.clip(idx, 0, self.breakpoints.size - 2)

    def __call__(self, t):
        """Evaluate C(t); scalar t -> (D, D), array t -> (..., D, D)."""
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        t_flat = np.atleast_1d(t_arr)
        idx = self._piece_index(t_flat)
        u = t_flat - self.breakpoints[idx]
        out = np.zeros(t_flat.shape + (self.dim, self.dim))
        # Horner in the local coordinate, highest degree first.
        for a in range(self.degree, -1, -1):
            out *= u[..., None, None]
            out += self.coeffs[idx, a]
        if scalar:
            return out[0]
        return out.reshape(t_arr.shape + (self.dim, self.dim))

    def _segments(self, t: float, s: float):
        """Yield (piece index, local start, local end) covering [t, s]."""
        if not 0.0 <= t < s <= self.breakpoints[-1] + 1e-12:
            raise ValueError(
                f"vol schedule: need 0 <= t < s <= {self.breakpoints[-1]}, "
                f"got (t, s) = ({t}, {s})"
            )
        p0 = int(self._piece_index(t))
        p1 = int(self._piece_index(min(s, self.breakpoints[-1] - 1e-15)))
        for p in range(p0, p1 + 1):
            lo = max(t, self.breakpoints[p])
            hi = min(s, self.breakpoints[p + 1])
            if hi > lo:
                yield p, lo - self.breakpoints[p], hi - self.breakpoints[p]

    def gram_integral(self, t: float, s: float) -> np.ndarray:
        """Exact int_t^s C(u) C(u)^T du."""
        deg = self.degree
        out = np.zeros((self.dim, self.dim))
        for p, u0, u1 in self._segments(t, s):
            A = self.coeffs[p]
            for a in range(deg + 1):
                for b in range(deg + 1):
                    k = a + b + 1
                    out += (A[a] @ A[b].T) * ((u1**k - u0**k) / k)
        return 0.5 * (out + out.T)

    def integral(self, t: float, s: float) -> np.ndarray:
        """Exact int_t^s C(u) du."""
        out = np.zeros((self.dim, self.dim))
        for p, u0, u1 in self._segments(t, s):
            A = self.coeffs[p]
            for a in range(self.degree + 1):
                k = a + 1
                out += A[a] * ((u1**k - u0**k) / k)
        return out

    def ellipticity_range(self, num_samples: int = 2001) -> tuple[float, float]:
        """Sampled (min, max) eigenvalue of C(t)C(t)^T over [0, 1]."""
        ts = np.linspace(self.breakpoints[0], self.breakpoints[-1], num_samples)
        mats = self(ts)
        grams = mats @ np.swapaxes(mats, -1, -2)
        eig = np.linalg.eigvalsh(grams)
        return float(eig.min()), float(eig.max())


def constant_schedule(matrix) -> VolSchedule:
    """C(t) identically equal to the given D x D matrix."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    return VolSchedule([0.0, 1.0], matrix[None, None, :, :])


def linear_schedule(base, slope) -> VolSchedule:
    """C(t) = base + t * slope on [0, 1]."""
    base = np.atleast_2d(np.asarray(base, dtype=float))
    slope = np.atleast_2d(np.asarray(slope, dtype=float))
    if base.shape != slope.shape:
        raise ValueError("vol schedule: base and slope shapes differ")
    coeffs = np.stack([base, slope])[None, :, :, :]
    return VolSchedule([0.0, 1.0], coeffs)
