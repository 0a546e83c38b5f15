"""Terminal endowment specifications.

Every endowment is a function g: R^D -> R paid at maturity, packaged with
exact gradient and Hessian evaluators (all vectorized over leading axes)
plus a scalar initial endowment ``g0`` paid at time zero.

Convention for quadratics: ``QuadraticEndowment(f, h, j)`` represents

    g(y) = f + h . y + y^T j y

with j stored symmetrized, so the gradient is h + 2 j y and the Hessian
is 2 j.  A quadratic written in Hessian form f + h.y + (1/2) y^T Q y
therefore ingests as j = Q / 2; ``taylor2`` in the compare module uses
exactly this rule and a round-trip test pins it down.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "Endowment",
    "QuadraticEndowment",
    "ExampleEndowment",
    "AnalyticEndowment",
    "TransformedEndowment",
    "example_f",
    "example_F",
]


class Endowment:
    """Base interface: value/gradient/hessian at any batch of points."""

    g0: float = 0.0

    def value(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def has_hessian(self) -> bool:
        return True


def _as_points(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim == 0:
        y = y.reshape(1)
    return y


class QuadraticEndowment(Endowment):
    """g(y) = f + h.y + y^T j y with j symmetrized on ingestion."""

    def __init__(self, f: float, h, j, g0: float = 0.0):
        self.f = float(f)
        self.h = np.atleast_1d(np.asarray(h, dtype=float))
        j = np.asarray(j, dtype=float)
        if j.ndim == 0:
            j = j.reshape(1, 1)
        if j.shape != (self.h.size, self.h.size):
            raise ValueError("quadratic endowment: j must be D x D with D = len(h)")
        self.j = 0.5 * (j + j.T)
        self.g0 = float(g0)

    @property
    def dim(self) -> int:
        return self.h.size

    def value(self, y):
        y = _as_points(y)
        return self.f + y @ self.h + np.einsum("...i,ij,...j->...", y, self.j, y)

    def gradient(self, y):
        y = _as_points(y)
        return self.h + 2.0 * y @ self.j

    def hessian(self, y):
        y = _as_points(y)
        return np.broadcast_to(2.0 * self.j, y.shape[:-1] + self.j.shape).copy()


def example_f(x, alpha: float):
    """Compactly supported bump: 2 - |x|^(1+a) inside the unit ball,
    (2 - |x|)^(1+a) on 1 < |x| < 2, zero outside."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("example endowment: alpha must lie in (0, 1)")
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.zeros_like(ax)
    inner = ax <= 1.0
    ring = (ax > 1.0) & (ax < 2.0)
    out[inner] = 2.0 - ax[inner] ** (1.0 + alpha)
    out[ring] = (2.0 - ax[ring]) ** (1.0 + alpha)
    return out


def _example_f_prime(x, alpha: float):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    sg = np.sign(x)
    out = np.zeros_like(ax)
    inner = ax <= 1.0
    ring = (ax > 1.0) & (ax < 2.0)
    out[inner] = -(1.0 + alpha) * ax[inner] ** alpha * sg[inner]
    out[ring] = -(1.0 + alpha) * (2.0 - ax[ring]) ** alpha * sg[ring]
    return out


def example_F(x, alpha: float):
    """Antiderivative of ``example_f`` vanishing at and below -2.

    Closed form per piece; F(x) = 4 for x >= 2 by symmetry of the bump.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("example endowment: alpha must lie in (0, 1)")
    x = np.asarray(x, dtype=float)
    p = 2.0 + alpha
    out = np.zeros_like(x)

    m = (x > -2.0) & (x <= -1.0)
    out[m] = (2.0 + x[m]) ** p / p
    m = (x > -1.0) & (x <= 0.0)
    out[m] = 2.0 * (x[m] + 1.0) + (-x[m]) ** p / p
    m = (x > 0.0) & (x <= 1.0)
    out[m] = 2.0 + 2.0 * x[m] - x[m] ** p / p
    m = (x > 1.0) & (x < 2.0)
    out[m] = 4.0 - (2.0 - x[m]) ** p / p
    out[x >= 2.0] = 4.0
    return out


class ExampleEndowment(Endowment):
    """One-dimensional endowment g = F with F' = example_f.

    F is C^(2+alpha) but not C^3, which is what makes it the worst-case
    instance for the second-order approximation rate.
    """

    def __init__(self, alpha: float, g0: float = 0.0):
        if not 0.0 < alpha < 1.0:
            raise ValueError("example endowment: alpha must lie in (0, 1)")
        self.alpha = float(alpha)
        self.g0 = float(g0)

    dim = 1

    def value(self, y):
        y = _as_points(y)
        return example_F(y[..., 0], self.alpha)

    def gradient(self, y):
        y = _as_points(y)
        return example_f(y[..., 0], self.alpha)[..., None]

    def hessian(self, y):
        y = _as_points(y)
        return _example_f_prime(y[..., 0], self.alpha)[..., None, None]


class AnalyticEndowment(Endowment):
    """Closed-form smooth families with exact derivatives.

    Tags:
      cos   : c * cos(k.y + phase)
      sin   : c * sin(k.y + phase)
      gauss : c * exp(-|y - m|^2 / (2 w^2))
    """

    def __init__(self, tag: str, *, scale: float = 1.0, wavevector=None,
                 phase: float = 0.0, center=None, width: float = 1.0,
                 dim: int = 1, g0: float = 0.0):
        if tag not in ("cos", "sin", "gauss"):
            raise ValueError(f"analytic endowment: unknown tag {tag!r}")
        self.tag = tag
        self.scale = float(scale)
        self.phase = float(phase)
        self.width = float(width)
        if wavevector is None:
            wavevector = np.ones(dim)
        self.wavevector = np.atleast_1d(np.asarray(wavevector, dtype=float))
        if center is None:
            center = np.zeros(self.wavevector.size)
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.g0 = float(g0)

    @property
    def dim(self) -> int:
        return self.wavevector.size

    def _trig(self, y):
        return y @ self.wavevector + self.phase

    def value(self, y):
        y = _as_points(y)
        if self.tag == "cos":
            return self.scale * np.cos(self._trig(y))
        if self.tag == "sin":
            return self.scale * np.sin(self._trig(y))
        r = y - self.center
        return self.scale * np.exp(-0.5 * np.sum(r * r, axis=-1) / self.width**2)

    def gradient(self, y):
        y = _as_points(y)
        if self.tag == "cos":
            return -self.scale * np.sin(self._trig(y))[..., None] * self.wavevector
        if self.tag == "sin":
            return self.scale * np.cos(self._trig(y))[..., None] * self.wavevector
        r = y - self.center
        return self.value(y)[..., None] * (-r / self.width**2)

    def hessian(self, y):
        y = _as_points(y)
        kk = np.outer(self.wavevector, self.wavevector)
        if self.tag == "cos":
            return -self.scale * np.cos(self._trig(y))[..., None, None] * kk
        if self.tag == "sin":
            return -self.scale * np.sin(self._trig(y))[..., None, None] * kk
        r = (y - self.center) / self.width**2
        eye = np.eye(self.dim) / self.width**2
        outer = r[..., :, None] * r[..., None, :]
        return self.value(y)[..., None, None] * (outer - eye)


class TransformedEndowment(Endowment):
    """g~(y) = g(M (shift + y)); chain-rule gradient M^T grad, Hessian M^T H M."""

    def __init__(self, inner: Endowment, matrix, shift):
        self.inner = inner
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.shift = np.atleast_1d(np.asarray(shift, dtype=float))
        self.g0 = inner.g0

    def _map(self, y):
        return (y + self.shift) @ self.matrix.T

    def value(self, y):
        return self.inner.value(self._map(_as_points(y)))

    def gradient(self, y):
        return self.inner.gradient(self._map(_as_points(y))) @ self.matrix

    def hessian(self, y):
        h = self.inner.hessian(self._map(_as_points(y)))
        return self.matrix.T @ h @ self.matrix
