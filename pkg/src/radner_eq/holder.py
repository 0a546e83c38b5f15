"""Discrete Holder-norm diagnostics on bounded boxes.

The solvability scale of the fixed-point solver degrades with the size of
the endowments measured in the 1+alpha norm, so these estimates double as
a cheap "how large a maturity can I hope for" report.  All (semi-)norms
are max-based over a tensor grid; refining a grid by nesting (resolution
r -> 2r - 1) can only grow them.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .endowments import Endowment
from .errors import ConfigError

__all__ = [
    "tensor_grid",
    "discrete_sup",
    "discrete_alpha_seminorm",
    "holder_norm_estimate",
    "t0_scaling_report",
    "discrete_parabolic_alpha_norm",
]


def tensor_grid(box, resolution: int) -> np.ndarray:
    """All grid points of an axis-aligned box, shape (n_total, D)."""
    box = np.atleast_2d(np.asarray(box, dtype=float))
    if box.shape[1] != 2 or np.any(box[:, 0] >= box[:, 1]):
        raise ConfigError("box must be rows of (lo, hi) with lo < hi")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def discrete_sup(values: np.ndarray) -> float:
    return float(np.max(np.abs(values)))


def discrete_alpha_seminorm(values: np.ndarray, points: np.ndarray,
                            alpha: float) -> float:
    """max over point pairs of |v_p - v_q| / |x_p - x_q|^alpha."""
    values = np.asarray(values, dtype=float).ravel()
    n = values.size
    if n < 2:
        return 0.0
    iu, ju = np.triu_indices(n, k=1)
    dv = np.abs(values[iu] - values[ju])
    dx = np.linalg.norm(points[iu] - points[ju], axis=-1)
    return float(np.max(dv / dx**alpha))


def _grid_fd_gradient(values_grid: np.ndarray, spacings) -> list[np.ndarray]:
    return [np.gradient(values_grid, h, axis=d, edge_order=2)
            for d, h in enumerate(spacings)]


def holder_norm_estimate(g, order: str, box, resolution: int = 17,
                         alpha: float = 0.5) -> float:
    """Discrete |g|_order over the box, order in {"0","alpha","1+alpha","2+alpha"}.

    Exact derivative evaluators are used when ``g`` is an endowment spec;
    a bare callable falls back to second-order finite differences on the
    grid.  Vector and matrix norms follow the sum-over-components
    convention.
    """
    if order not in ("0", "alpha", "1+alpha", "2+alpha"):
        raise ConfigError(f"unknown Holder order {order!r}")
    if resolution < 8:
        raise ConfigError("holder norm: resolution must be at least 8 points per axis")
    if not 0.0 < alpha < 1.0:
        raise ConfigError("holder norm: alpha must lie in (0, 1)")

    box = np.atleast_2d(np.asarray(box, dtype=float))
    D = box.shape[0]
    points = tensor_grid(box, resolution)
    grid_shape = (resolution,) * D
    spacings = [(hi - lo) / (resolution - 1) for lo, hi in box]

    is_spec = isinstance(g, Endowment)
    values = g.value(points) if is_spec else np.asarray(g(points), dtype=float)
    values = values.reshape(-1)

    total = discrete_sup(values)
    if order == "0":
        return total
    if order == "alpha":
        return total + discrete_alpha_seminorm(values, points, alpha)

    if is_spec:
        grads = g.gradient(points)                     # (n, D)
        grad_comps = [grads[:, d] for d in range(D)]
    else:
        vg = values.reshape(grid_shape)
        grad_comps = [c.ravel() for c in _grid_fd_gradient(vg, spacings)]

    total += sum(discrete_sup(c) for c in grad_comps)
    if order == "1+alpha":
        return total + sum(discrete_alpha_seminorm(c, points, alpha)
                           for c in grad_comps)

    # order == "2+alpha"
    if is_spec and g.has_hessian:
        hess = g.hessian(points)                       # (n, D, D)
        hess_comps = [hess[:, d, e] for d in range(D) for e in range(D)]
    else:
        if resolution < 9:
            raise ConfigError(
                "holder norm: order 2+alpha without an exact Hessian needs "
                "resolution >= 9 for second differences"
            )
        hess_comps = []
        for d in range(D):
            gd = np.asarray(grad_comps[d]).reshape(grid_shape)
            hess_comps.extend(c.ravel() for c in _grid_fd_gradient(gd, spacings))
    total += sum(discrete_sup(c) for c in hess_comps)
    return total + sum(discrete_alpha_seminorm(c, points, alpha)
                       for c in hess_comps)


def default_diagnostic_box(market) -> np.ndarray:
    """Half-width 4 sqrt(delta_upper T) around the origin, per axis."""
    half = 4.0 * math.sqrt(market.delta_upper * market.maturity)
    return np.array([[-half, half]] * market.dim_factor)


def t0_scaling_report(endowments: Sequence[Endowment], market, box=None,
                      resolution: int = 17) -> float:
    """Relative maturity-scale indicator 1 / max_i |g_i|_{1+alpha}^2.

    Constant-free: the guaranteed-existence horizon scales like this
    quantity but the proportionality constant is not computable, so the
    report only supports comparisons between endowment profiles.
    """
    if box is None:
        box = default_diagnostic_box(market)
    worst = max(
        holder_norm_estimate(g, "1+alpha", box, resolution, market.holder_alpha)
        for g in endowments
    )
    if worst == 0.0:
        return math.inf
    return 1.0 / worst**2


def discrete_parabolic_alpha_norm(values: np.ndarray, times: np.ndarray,
                                  points: np.ndarray, alpha: float) -> float:
    """Discrete parabolic |h|_alpha on a (time, space) grid.

    Pair distance is (sqrt|t-s| + |x-y|)^alpha; values has shape
    (n_times, n_points).
    """
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if values.shape != (times.size, points.shape[0]):
        raise ConfigError("parabolic norm: values must be (n_times, n_points)")
    flat = values.ravel()
    tt = np.repeat(times, points.shape[0])
    xx = np.tile(points, (times.size, 1))
    n = flat.size
    iu, ju = np.triu_indices(n, k=1)
    dv = np.abs(flat[iu] - flat[ju])
    rho = np.sqrt(np.abs(tt[iu] - tt[ju])) + np.linalg.norm(xx[iu] - xx[ju], axis=-1)
    return float(np.max(np.abs(flat))) + float(np.max(dv / rho**alpha))
