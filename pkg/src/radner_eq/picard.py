"""Fixed-point solver for the coupled semilinear value-function system.

Each investor's value function solves a heat equation carrying a source
built from everybody's gradients,

    d_t u_i + (1/2) tr(u_i_yy C C^T) + f_i(grad u_1..grad u_I) = 0,
    u_i(T, .) = g_i,

    f_i = (1/(2 a_i)) |lam|^2 - lam . Cbar^T grad u_i
          + (a_i/2)(|Cbar^T grad u_i|^2 - |C^T grad u_i|^2),
    lam = (1/tau) Cbar^T sum_j grad u_j.

One sweep of the map applies the kernel representation to the previous
iterate's gradient field (Jacobi style: all reads come from the previous
sweep, so scheduling cannot change the result).  For small maturities the
map is a contraction and the iteration converges geometrically.

Off-grid gradients are multilinear in (t, y) inside the box and clamped
to the boundary value along each axis outside; values are extended
linearly using the clamped gradient.  The box is sized so the Gaussian
mass escaping it from the comparison region is negligible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_point_batch
from .endowments import Endowment
from .equilibrium import Equilibrium, assemble_equilibrium
from .errors import ConfigError, ConvergenceError
from .kernels import (GaussHermiteRule, default_hermite_nodes,
                      default_time_nodes, sigma_window, time_quadrature)
from .market import MarketConfig

__all__ = [
    "SolutionField",
    "coupling_lambda",
    "nonlinearity_f",
    "apply_pi",
    "picard_solve",
    "PicardEquilibriumSolver",
]


def coupling_lambda(grad_u_all, market: MarketConfig, t: float,
                    cbar: Optional[np.ndarray] = None) -> np.ndarray:
    """Market price of risk from the stacked gradients.

    ``grad_u_all`` has shape (I, D) or (I, n, D); returns (N,) or (n, N).
    """
    grads = np.asarray(grad_u_all, dtype=float)
    if cbar is None:
        cbar = market.cbar(t)
    total = grads.sum(axis=0)
    return (total @ cbar) / market.tau_sigma


def nonlinearity_f(i: int, grad_u_all, market: MarketConfig, t: float,
                   cbar: Optional[np.ndarray] = None,
                   cfull: Optional[np.ndarray] = None) -> np.ndarray:
    """Source term of investor i's heat equation, from all gradients."""
    grads = np.asarray(grad_u_all, dtype=float)
    if cfull is None:
        cfull = market.vol(t)
    if cbar is None:
        cbar = cfull[:, : market.dim_assets]
    lam = coupling_lambda(grads, market, t, cbar=cbar)
    a_i = float(market.risk_aversions[i])
    proj_bar = grads[i] @ cbar
    proj_full = grads[i] @ cfull
    lam_sq = np.sum(lam * lam, axis=-1)
    cross = np.sum(lam * proj_bar, axis=-1)
    return (lam_sq / (2.0 * a_i) - cross
            + 0.5 * a_i * (np.sum(proj_bar * proj_bar, axis=-1)
                           - np.sum(proj_full * proj_full, axis=-1)))


class _BoxInterp:
    """Multilinear interpolation on a uniform tensor grid with clamping."""

    def __init__(self, axes: Sequence[np.ndarray]):
        self.axes = [np.asarray(a, dtype=float) for a in axes]
        self.dim = len(self.axes)
        self.lo = np.array([a[0] for a in self.axes])
        self.hi = np.array([a[-1] for a in self.axes])
        self.h = np.array([a[1] - a[0] for a in self.axes])
        self.sizes = np.array([a.size for a in self.axes])
        strides = np.ones(self.dim, dtype=np.int64)
        for d in range(self.dim - 2, -1, -1):
            strides[d] = strides[d + 1] * self.sizes[d + 1]
        self.strides = strides
        self.num_points = int(np.prod(self.sizes))

    def grid_points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def locate(self, pts: np.ndarray):
        """Corner indices/weights plus the outside-box overshoot.

        Returns (corners (n, 2^D) int64, weights (n, 2^D), delta (n, D)).
        """
        pts = np.asarray(pts, dtype=float)
        clipped = np.clip(pts, self.lo, self.hi)
        delta = pts - clipped
        c = (clipped - self.lo) / self.h
        i0 = np.minimum(c.astype(np.int64), self.sizes - 2)
        i0 = np.maximum(i0, 0)
        w = c - i0
        n = pts.shape[0]
        num_corners = 1 << self.dim
        corners = np.empty((n, num_corners), dtype=np.int64)
        weights = np.empty((n, num_corners))
        for corner in range(num_corners):
            flat = np.zeros(n, dtype=np.int64)
            wt = np.ones(n)
            for d in range(self.dim):
                bit = (corner >> d) & 1
                flat += (i0[:, d] + bit) * self.strides[d]
                wt *= w[:, d] if bit else (1.0 - w[:, d])
            corners[:, corner] = flat
            weights[:, corner] = wt
        return corners, weights, delta


@dataclass
class SolutionField:
    """Gridded value functions and gradients over [0, T] x box."""

    market: MarketConfig
    maturity: float
    time_grid: np.ndarray            # (M+1,)
    interp: _BoxInterp
    u: np.ndarray                    # (I, M+1, P)
    grad: np.ndarray                 # (I, M+1, P, D)
    iteration_count: int = 0
    residual: float = math.inf
    consistency_tol: float = math.nan
    residual_history: list = field(default_factory=list)

    @property
    def num_investors(self) -> int:
        return self.u.shape[0]

    @property
    def points(self) -> np.ndarray:
        return self.interp.grid_points()

    def _time_bracket(self, t: float):
        tg = self.time_grid
        if t <= tg[0]:
            return 0, 0.0
        if t >= tg[-1]:
            return tg.size - 2, 1.0
        k0 = int(np.searchsorted(tg, t, side="right")) - 1
        k0 = min(k0, tg.size - 2)
        theta = (t - tg[k0]) / (tg[k0 + 1] - tg[k0])
        return k0, float(theta)

    def gradients_at(self, t: float, pts: np.ndarray) -> np.ndarray:
        """All investors' gradients at (t, pts); shape (I, n, D)."""
        corners, weights, _ = self.interp.locate(pts)
        k0, theta = self._time_bracket(t)
        out = self._gather_grad(k0, theta, corners, weights)
        return out

    def _gather_grad(self, k0: int, theta: float, corners, weights) -> np.ndarray:
        g0 = self.grad[:, k0]          # (I, P, D)
        g1 = self.grad[:, k0 + 1] if theta > 0.0 else g0
        n, num_corners = corners.shape
        out = np.zeros((self.u.shape[0], n, self.grad.shape[-1]))
        for corner in range(num_corners):
            idx = corners[:, corner]
            wt = weights[:, corner][None, :, None]
            blended = (1.0 - theta) * g0[:, idx, :] + theta * g1[:, idx, :] \
                if theta > 0.0 else g0[:, idx, :]
            out += wt * blended
        return out

    def values_at(self, t: float, pts: np.ndarray) -> np.ndarray:
        """All investors' values at (t, pts), linearly extended outside
        the box; shape (I, n)."""
        corners, weights, delta = self.interp.locate(pts)
        k0, theta = self._time_bracket(t)
        u0 = self.u[:, k0]
        u1 = self.u[:, k0 + 1] if theta > 0.0 else u0
        n = pts.shape[0]
        vals = np.zeros((self.u.shape[0], n))
        for corner in range(corners.shape[1]):
            idx = corners[:, corner]
            wt = weights[:, corner][None, :]
            blended = (1.0 - theta) * u0[:, idx] + theta * u1[:, idx] \
                if theta > 0.0 else u0[:, idx]
            vals += wt * blended
        if np.any(delta):
            grads = self._gather_grad(k0, theta, corners, weights)
            vals += np.einsum("ind,nd->in", grads, delta)
        return vals

    def value(self, i: int, t: float, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        scalar = y.ndim <= 1
        pts = y.reshape(-1, self.interp.dim)
        out = self.values_at(t, pts)[i]
        return float(out[0]) if scalar else out.reshape(y.shape[:-1])

    def gradient(self, i: int, t: float, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        scalar = y.ndim <= 1
        pts = y.reshape(-1, self.interp.dim)
        out = self.gradients_at(t, pts)[i]
        return out[0] if scalar else out.reshape(y.shape)

    def measure_consistency(self) -> float:
        """Sup distance between central differences of u and grad."""
        shape = tuple(self.interp.sizes)
        worst = 0.0
        for i in range(self.num_investors):
            for k in range(self.time_grid.size):
                ug = self.u[i, k].reshape(shape)
                for d in range(self.interp.dim):
                    fd = np.gradient(ug, self.interp.h[d], axis=d)
                    gd = self.grad[i, k, :, d].reshape(shape)
                    # interior points only: edge stencils are one-sided
                    sl = [slice(None)] * self.interp.dim
                    sl[d] = slice(1, -1)
                    diff = np.abs(fd[tuple(sl)] - gd[tuple(sl)])
                    if diff.size:
                        worst = max(worst, float(diff.max()))
        return worst


class _SweepGeometry:
    """Per-solve cache: windows, displacements and inverse weights for
    every (time index, time quadrature node) pair."""

    def __init__(self, market: MarketConfig, time_grid: np.ndarray,
                 rule: GaussHermiteRule, time_nodes: int):
        self.rule = rule
        self.time_grid = time_grid
        T = float(time_grid[-1])
        self.terminal_disp = []
        self.source_nodes = []
        for k in range(time_grid.size - 1):
            t_k = float(time_grid[k])
            win_T = sigma_window(market, t_k, T)
            self.terminal_disp.append(rule.displacements(win_T.chol_lower))
            s_nodes, s_weights, _ = time_quadrature(t_k, T, time_nodes)
            per_q = []
            for s_q, w_q in zip(s_nodes, s_weights):
                win_q = sigma_window(market, t_k, s_q)
                per_q.append((
                    float(s_q), float(w_q),
                    rule.displacements(win_q.chol_lower),
                    rule.inverse_weights(win_q),
                    market.vol(s_q),
                ))
            self.source_nodes.append(per_q)


def _terminal_projection(endowments, interp: _BoxInterp, geometry: _SweepGeometry,
                         rule: GaussHermiteRule):
    """Gaussian smoothing of g and grad g at every (t_k, grid point)."""
    points = interp.grid_points()
    I = len(endowments)
    M = geometry.time_grid.size - 1
    P = points.shape[0]
    D = interp.dim
    u_g = np.empty((I, M, P))
    grad_g = np.empty((I, M, P, D))
    for k in range(M):
        disp = geometry.terminal_disp[k]                     # (K, D)
        x = (points[:, None, :] - disp[None, :, :]).reshape(-1, D)
        for i, g in enumerate(endowments):
            vals = g.value(x).reshape(P, -1)
            u_g[i, k] = vals @ rule.weights
            grads = g.gradient(x).reshape(P, -1, D)
            grad_g[i, k] = np.einsum("pkd,k->pd", grads, rule.weights)
    return u_g, grad_g


def _sweep(field: SolutionField, market: MarketConfig, geometry: _SweepGeometry,
           u_g: np.ndarray, grad_g: np.ndarray) -> SolutionField:
    """One application of the fixed-point map (Jacobi: reads only the
    previous iterate)."""
    rule = geometry.rule
    interp = field.interp
    points = interp.grid_points()
    I = field.num_investors
    M = field.time_grid.size - 1
    P, D = points.shape
    K = rule.nodes.shape[0]
    a = market.risk_aversions
    tau = market.tau_sigma
    N = market.dim_assets

    u_new = np.empty_like(field.u)
    grad_new = np.empty_like(field.grad)
    u_new[:, M] = field.u[:, M]
    grad_new[:, M] = field.grad[:, M]

    for k in range(M):
        u_acc = u_g[:, k].copy()                  # (I, P)
        grad_acc = grad_g[:, k].copy()            # (I, P, D)
        for s_q, w_q, disp, inv_w, C_q in geometry.source_nodes[k]:
            x = (points[:, None, :] - disp[None, :, :]).reshape(-1, D)
            corners, weights, _ = interp.locate(x)
            k0, theta = field._time_bracket(s_q)
            grads = field._gather_grad(k0, theta, corners, weights)  # (I, PK, D)

            cbar = C_q[:, :N]
            lam = (grads.sum(axis=0) @ cbar) / tau                   # (PK, N)
            lam_sq = np.einsum("pn,pn->p", lam, lam)
            wz = rule.weights
            for i in range(I):
                proj_bar = grads[i] @ cbar
                proj_full = grads[i] @ C_q
                f_i = (lam_sq / (2.0 * a[i])
                       - np.einsum("pn,pn->p", lam, proj_bar)
                       + 0.5 * a[i] * (np.einsum("pn,pn->p", proj_bar, proj_bar)
                                       - np.einsum("pd,pd->p", proj_full, proj_full)))
                f_i = f_i.reshape(P, K)
                u_acc[i] += w_q * (f_i @ wz)
                grad_acc[i] -= w_q * np.einsum("pk,k,kd->pd", f_i, wz, inv_w)
        u_new[:, k] = u_acc
        grad_new[:, k] = grad_acc

    out = SolutionField(
        market=field.market, maturity=field.maturity, time_grid=field.time_grid,
        interp=interp, u=u_new, grad=grad_new,
        iteration_count=field.iteration_count + 1,
        residual=field.residual, consistency_tol=field.consistency_tol,
    )
    return out


def _build_field(market: MarketConfig, endowments, T: float, time_points: int,
                 space_points: Optional[int], box_halfwidth: Optional[float]):
    D = market.dim_factor
    if space_points is None:
        space_points = 33 if D <= 2 else 17
    if box_halfwidth is None:
        box_halfwidth = 5.0 * math.sqrt(market.delta_upper * T)
    axes = [np.linspace(-box_halfwidth, box_halfwidth, space_points)
            for _ in range(D)]
    interp = _BoxInterp(axes)
    points = interp.grid_points()
    time_grid = np.linspace(0.0, T, time_points)
    I = len(endowments)
    u = np.empty((I, time_points, points.shape[0]))
    grad = np.empty((I, time_points, points.shape[0], D))
    for i, g in enumerate(endowments):
        vals = g.value(points)
        grads = g.gradient(points)
        u[i, :] = vals[None, :]
        grad[i, :] = grads[None, :, :]
    return SolutionField(market=market, maturity=float(T), time_grid=time_grid,
                         interp=interp, u=u, grad=grad)


def apply_pi(field: SolutionField, market: MarketConfig,
             endowments: Sequence[Endowment],
             hermite_nodes: Optional[int] = None,
             time_nodes: Optional[int] = None) -> SolutionField:
    """Public single application of the fixed-point map."""
    endowments = market.check_endowments(endowments)
    D = market.dim_factor
    rule = GaussHermiteRule.tensor(D, hermite_nodes)
    geometry = _SweepGeometry(market, field.time_grid, rule,
                              time_nodes or default_time_nodes(D))
    u_g, grad_g = _terminal_projection(endowments, field.interp, geometry, rule)
    new = _sweep(field, market, geometry, u_g, grad_g)
    if not (np.all(np.isfinite(new.u)) and np.all(np.isfinite(new.grad))):
        raise ConvergenceError("fixed-point sweep produced non-finite values")
    new.residual = float(max(np.max(np.abs(new.u - field.u)),
                             np.max(np.abs(new.grad - field.grad))))
    return new


def picard_solve(market: MarketConfig, endowments: Sequence[Endowment],
                 T: Optional[float] = None, time_points: int = 33,
                 space_points: Optional[int] = None,
                 box_halfwidth: Optional[float] = None,
                 hermite_nodes: Optional[int] = None,
                 time_nodes: Optional[int] = None,
                 tol: float = 1e-7, max_iter: int = 50):
    """Iterate the map to its fixed point and assemble the equilibrium.

    Returns (SolutionField, Equilibrium).  Raises ``ConvergenceError``
    with the residual history when the sweep distance fails to reach
    ``tol`` in ``max_iter`` sweeps, which typically signals a maturity
    too large for the endowment scale.
    """
    endowments = market.check_endowments(endowments)
    if T is None:
        T = market.maturity
    if not 0.0 < T <= market.maturity + 1e-12:
        raise ConfigError(
            f"picard: maturity T={T} must lie in (0, market maturity "
            f"{market.maturity}]"
        )
    if tol <= 0:
        raise ConfigError("picard: tol must be positive")
    D = market.dim_factor
    rule = GaussHermiteRule.tensor(D, hermite_nodes)

    field = _build_field(market, endowments, T, time_points, space_points,
                         box_halfwidth)
    geometry = _SweepGeometry(market, field.time_grid, rule,
                              time_nodes or default_time_nodes(D))
    u_g, grad_g = _terminal_projection(endowments, field.interp, geometry, rule)

    history = []
    for _ in range(max_iter):
        new = _sweep(field, market, geometry, u_g, grad_g)
        if not (np.all(np.isfinite(new.u)) and np.all(np.isfinite(new.grad))):
            raise ConvergenceError(
                "picard: sweep produced non-finite values", history)
        residual = float(max(np.max(np.abs(new.u - field.u)),
                             np.max(np.abs(new.grad - field.grad))))
        new.residual = residual
        history.append(residual)
        field = new
        if residual <= tol:
            break
    else:
        raise ConvergenceError(
            f"picard: no convergence after {max_iter} sweeps "
            f"(last residual {history[-1]:.3e}); the maturity is likely too "
            "large for the endowment scale -- compare the maturity-scale "
            "report of the model module",
            history,
        )

    field.consistency_tol = field.measure_consistency()
    field.residual_history = history
    equilibrium = _field_equilibrium(field, market, endowments, T)
    return field, equilibrium


def _field_equilibrium(field: SolutionField, market: MarketConfig,
                       endowments, T: float) -> Equilibrium:
    origin = np.zeros((1, market.dim_factor))
    u0 = np.array([field.value(i, 0.0, origin[0]) for i in range(len(endowments))])

    def lambda_fn(t, pts):
        grads = field.gradients_at(t, pts)
        return coupling_lambda(grads, market, t)

    def grad_fn(i):
        return lambda t, pts: field.gradients_at(t, pts)[i]

    return assemble_equilibrium(
        market, T, u0, [g.g0 for g in endowments], lambda_fn,
        [grad_fn(i) for i in range(len(endowments))], provenance="picard",
    )


class PicardEquilibriumSolver(BaseEstimator):
    """Estimator wrapper around ``picard_solve``.

    After ``fit(market, endowments)`` the converged field and the
    equilibrium are available as ``field_`` and ``equilibrium_``;
    ``predict`` evaluates the market price of risk on (t, y) rows.
    """

    def __init__(self, maturity: Optional[float] = None, time_points: int = 33,
                 space_points: Optional[int] = None,
                 box_halfwidth: Optional[float] = None,
                 hermite_nodes: Optional[int] = None,
                 time_nodes: Optional[int] = None,
                 tol: float = 1e-7, max_iter: int = 50):
        self.maturity = maturity
        self.time_points = time_points
        self.space_points = space_points
        self.box_halfwidth = box_halfwidth
        self.hermite_nodes = hermite_nodes
        self.time_nodes = time_nodes
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, market: MarketConfig, endowments: Sequence[Endowment]):
        T = self.maturity if self.maturity is not None else market.maturity
        self.market_ = market
        self.maturity_ = float(T)
        self.field_, self.equilibrium_ = picard_solve(
            market, endowments, T, time_points=self.time_points,
            space_points=self.space_points, box_halfwidth=self.box_halfwidth,
            hermite_nodes=self.hermite_nodes, time_nodes=self.time_nodes,
            tol=self.tol, max_iter=self.max_iter,
        )
        self.residual_history_ = list(self.field_.residual_history)
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "equilibrium_"):
            raise ConfigError("picard solver: call fit before predict")
        X = check_point_batch(X, self.market_.dim_factor)
        return self.equilibrium_.predict_lambda(X)
