"""Coupled Riccati system for exponential-quadratic equilibria.

With every terminal endowment of the form g_i(y) = f_i + h_i.y + y^T j_i y
the value functions stay quadratic,

    u_i(t, y) = alpha_i(T-t) + beta_i(T-t).y + y^T gamma_i(T-t) y,

and the coefficient paths solve a coupled matrix Riccati system in
time-to-maturity s with initial data (j_i, h_i, f_i).  Writing
G_i = gamma_i + gamma_i^T, S_g = sum_j G_j, S_b = sum_j beta_j,
Mb = Cbar Cbar^T, M = C C^T (both at calendar time T - s) and
tau = sum_j 1/a_j:

    gamma_i' = (a_i/2) G_i (Mb - M) G_i - (1/tau) G_i Mb S_g
               + (1/(2 a_i tau^2)) S_g Mb S_g
    beta_i'  = a_i G_i (Mb - M) beta_i + (1/(a_i tau^2)) S_g Mb S_b
               - (1/tau) S_g Mb beta_i - (1/tau) G_i Mb S_b
    alpha_i' = (1/2) tr(G_i M) + (1/(2 a_i tau^2)) S_b.Mb.S_b
               - (1/tau) S_b.Mb.beta_i - (a_i/2)(beta_i.M.beta_i - beta_i.Mb.beta_i)

The system is locally Lipschitz, so a unique solution exists up to an
explosion time; the integrator detects the explosion through a Frobenius
cap on gamma and reports the last safe time-to-maturity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from sklearn.base import BaseEstimator

from ._validation import check_point_batch
from .endowments import QuadraticEndowment
from .equilibrium import Equilibrium, assemble_equilibrium
from .errors import BlowUpError, ConfigError
from .market import MarketConfig

__all__ = [
    "RiccatiPath",
    "riccati_rhs",
    "riccati_integrate",
    "quadratic_value",
    "quadratic_gradient",
    "quadratic_lambda",
    "riccati_equilibrium",
    "RiccatiEquilibriumSolver",
]

BLOWUP_CAP = 1.0e6


def _pack(gammas, betas, alphas) -> np.ndarray:
    parts = []
    for g, b, a in zip(gammas, betas, alphas):
        parts.append(np.asarray(g, dtype=float).ravel())
        parts.append(np.asarray(b, dtype=float).ravel())
        parts.append(np.atleast_1d(float(a)))
    return np.concatenate(parts)


def _unpack(state: np.ndarray, num_investors: int, dim: int):
    block = dim * dim + dim + 1
    gammas, betas, alphas = [], [], []
    for i in range(num_investors):
        chunk = state[i * block:(i + 1) * block]
        gammas.append(chunk[: dim * dim].reshape(dim, dim))
        betas.append(chunk[dim * dim: dim * dim + dim])
        alphas.append(float(chunk[-1]))
    return gammas, betas, alphas


def riccati_rhs(gammas, betas, alphas, s: float, market: MarketConfig,
                T: Optional[float] = None):
    """Right-hand sides at time-to-maturity s (calendar time T - s)."""
    if T is None:
        T = market.maturity
    I = market.num_investors
    a = market.risk_aversions
    tau = market.tau_sigma
    C = market.vol(max(T - s, 0.0))
    N = market.dim_assets
    Cb = C[:, :N]
    M = C @ C.T
    Mb = Cb @ Cb.T
    diff = Mb - M

    G = [g + g.T for g in gammas]
    Sg = sum(G)
    Sb = sum(betas)

    d_gammas, d_betas, d_alphas = [], [], []
    for i in range(I):
        ai = a[i]
        d_gammas.append(
            0.5 * ai * G[i] @ diff @ G[i]
            - (1.0 / tau) * G[i] @ Mb @ Sg
            + (0.5 / (ai * tau * tau)) * Sg @ Mb @ Sg
        )
        d_betas.append(
            ai * G[i] @ diff @ betas[i]
            + (1.0 / (ai * tau * tau)) * Sg @ Mb @ Sb
            - (1.0 / tau) * Sg @ Mb @ betas[i]
            - (1.0 / tau) * G[i] @ Mb @ Sb
        )
        d_alphas.append(
            0.5 * np.trace(G[i] @ M)
            + (0.5 / (ai * tau * tau)) * Sb @ Mb @ Sb
            - (1.0 / tau) * Sb @ Mb @ betas[i]
            - 0.5 * ai * (betas[i] @ M @ betas[i] - betas[i] @ Mb @ betas[i])
        )
    return d_gammas, d_betas, d_alphas


@dataclass
class RiccatiPath:
    """Sampled coefficient paths in time-to-maturity, with blow-up metadata."""

    time_grid: np.ndarray                  # (M,), increasing, starts at 0
    alpha: np.ndarray                      # (I, M)
    beta: np.ndarray                       # (I, M, D)
    gamma: np.ndarray                      # (I, M, D, D)
    blow_up: Optional[float] = None
    step_stats: dict = field(default_factory=dict)
    _spline: CubicSpline = field(default=None, repr=False)  # type: ignore[assignment]

    @property
    def num_investors(self) -> int:
        return self.alpha.shape[0]

    @property
    def dim(self) -> int:
        return self.beta.shape[2]

    @property
    def horizon(self) -> float:
        return float(self.time_grid[-1])

    def _ensure_spline(self):
        if self._spline is None:
            I, M = self.alpha.shape
            D = self.dim
            flat = np.empty((M, I * (D * D + D + 1)))
            for m in range(M):
                flat[m] = _pack(self.gamma[:, m], self.beta[:, m], self.alpha[:, m])
            self._spline = CubicSpline(self.time_grid, flat, axis=0)

    def at(self, s: float):
        """(gammas, betas, alphas) at time-to-maturity s, cubic in s."""
        if not 0.0 <= s <= self.horizon + 1e-12:
            raise BlowUpError(
                f"riccati path: time-to-maturity {s:.6g} outside the solved "
                f"horizon [0, {self.horizon:.6g}]"
                + (f" (blow-up at {self.blow_up:.6g})" if self.blow_up else ""),
                path=self,
            )
        self._ensure_spline()
        state = self._spline(min(s, self.horizon))
        return _unpack(state, self.num_investors, self.dim)


def riccati_integrate(market: MarketConfig, endowments: Sequence[QuadraticEndowment],
                      T: float, rtol: float = 1e-8, atol: float = 1e-10,
                      blowup_cap: float = BLOWUP_CAP,
                      num_samples: int = 257) -> RiccatiPath:
    """Integrate the coupled system from time-to-maturity 0 to T.

    Raises ``BlowUpError`` (carrying the partial path) if the Frobenius
    norm of any gamma crosses the cap before T.
    """
    endowments = market.check_endowments(endowments)
    for g in endowments:
        if not isinstance(g, QuadraticEndowment):
            raise ConfigError(
                "riccati: every endowment must be quadratic; use taylor2/taylor1 "
                "to project smooth endowments first"
            )
    if not 0.0 < T <= 1.0:
        raise ConfigError(f"riccati: maturity must lie in (0, 1], got {T}")
    I, D = market.num_investors, market.dim_factor

    y0 = _pack([g.j for g in endowments], [g.h for g in endowments],
               [g.f for g in endowments])

    def rhs(s, state):
        gammas, betas, alphas = _unpack(state, I, D)
        dg, db, da = riccati_rhs(gammas, betas, alphas, s, market, T)
        return _pack(dg, db, da)

    def explosion(s, state):
        gammas, _, _ = _unpack(state, I, D)
        return max(np.linalg.norm(g) for g in gammas) - blowup_cap

    explosion.terminal = True
    explosion.direction = 1.0

    t_eval = np.linspace(0.0, T, num_samples)
    sol = solve_ivp(rhs, (0.0, T), y0, method="RK45", rtol=rtol, atol=atol,
                    t_eval=t_eval, events=explosion, dense_output=True)

    stats = {"nfev": sol.nfev, "status": sol.status, "message": sol.message}

    blown = sol.status == 1 and sol.t_events[0].size > 0
    failed = sol.status < 0
    if blown or failed:
        safe = float(sol.t_events[0][0]) if blown else (float(sol.t[-1]) if sol.t.size else 0.0)
        grid = sol.t[sol.t <= safe]
        if grid.size == 0 or grid[-1] < safe:
            grid = np.append(grid, safe)
        if sol.sol is not None:
            states = sol.sol(grid).T
        else:
            grid = sol.t if sol.t.size else np.array([0.0])
            states = sol.y.T if sol.t.size else y0[None, :]
        path = _path_from_states(grid, states, I, D, blow_up=safe, stats=stats)
        raise BlowUpError(
            f"riccati: coefficient blow-up at time-to-maturity {safe:.6g} "
            f"before the requested maturity {T:.6g}",
            path=path,
        )
    return _path_from_states(sol.t, sol.y.T, I, D, blow_up=None, stats=stats)


def _path_from_states(grid, states, I, D, blow_up, stats) -> RiccatiPath:
    M = len(grid)
    alpha = np.empty((I, M))
    beta = np.empty((I, M, D))
    gamma = np.empty((I, M, D, D))
    for m in range(M):
        gs, bs, as_ = _unpack(states[m], I, D)
        for i in range(I):
            gamma[i, m] = gs[i]
            beta[i, m] = bs[i]
            alpha[i, m] = as_[i]
    return RiccatiPath(time_grid=np.asarray(grid, dtype=float), alpha=alpha,
                       beta=beta, gamma=gamma, blow_up=blow_up, step_stats=stats)


def quadratic_value(path: RiccatiPath, t: float, y, i: int, T: float) -> np.ndarray:
    """u_i(t, y) from the interpolated coefficient path."""
    _check_window(path, t, T)
    gammas, betas, alphas = path.at(T - t)
    y = np.asarray(y, dtype=float)
    scalar = y.ndim <= 1
    pts = y.reshape(-1, path.dim)
    out = (alphas[i] + pts @ betas[i]
           + np.einsum("nd,de,ne->n", pts, gammas[i], pts))
    return float(out[0]) if scalar else out.reshape(y.shape[:-1])


def quadratic_gradient(path: RiccatiPath, t: float, y, i: int, T: float) -> np.ndarray:
    """grad_y u_i(t, y) = beta_i(T-t) + (gamma_i + gamma_i^T)(T-t) y."""
    _check_window(path, t, T)
    gammas, betas, _ = path.at(T - t)
    G = gammas[i] + gammas[i].T
    y = np.asarray(y, dtype=float)
    scalar = y.ndim <= 1
    pts = y.reshape(-1, path.dim)
    out = betas[i] + pts @ G.T
    return out[0] if scalar else out.reshape(y.shape)


def quadratic_lambda(path: RiccatiPath, market: MarketConfig, t: float, y,
                     T: float) -> np.ndarray:
    """Affine market price of risk of the quadratic model.

    (1/tau) Cbar(t)^T sum_i (beta_i(T-t) + (gamma_i + gamma_i^T)(T-t) y);
    the symmetrization is taken at the single argument T-t, matching the
    gradient of the quadratic value function.
    """
    _check_window(path, t, T)
    gammas, betas, _ = path.at(T - t)
    y = np.asarray(y, dtype=float)
    scalar = y.ndim <= 1
    pts = y.reshape(-1, path.dim)
    total = sum(
        betas[i] + pts @ (gammas[i] + gammas[i].T).T
        for i in range(path.num_investors)
    )
    out = (total @ market.cbar(t)) / market.tau_sigma
    return out[0] if scalar else out.reshape(y.shape[:-1] + (market.dim_assets,))


def _check_window(path: RiccatiPath, t: float, T: float):
    if not 0.0 <= t <= T:
        raise ConfigError(f"riccati evaluation: need 0 <= t <= T, got t={t}, T={T}")
    if T > path.horizon + 1e-12:
        raise BlowUpError(
            f"riccati evaluation: maturity {T:.6g} beyond solved horizon "
            f"{path.horizon:.6g}"
            + (f" (blow-up at {path.blow_up:.6g})" if path.blow_up else ""),
            path=path,
        )


def riccati_equilibrium(path: RiccatiPath, market: MarketConfig, g0,
                        T: float) -> Equilibrium:
    """Assemble the equilibrium from a solved path."""
    _check_window(path, 0.0, T)
    u0 = np.array([quadratic_value(path, 0.0, np.zeros(path.dim), i, T)
                   for i in range(path.num_investors)])

    def lambda_fn(t, pts):
        return quadratic_lambda(path, market, t, pts, T)

    def grad_fn(i):
        return lambda t, pts: quadratic_gradient(path, t, pts, i, T)

    return assemble_equilibrium(
        market, T, u0, g0, lambda_fn,
        [grad_fn(i) for i in range(path.num_investors)],
        provenance="riccati",
    )


class RiccatiEquilibriumSolver(BaseEstimator):
    """Estimator wrapper: fit integrates the system, predict evaluates lambda.

    Parameters mirror the integrator; after ``fit`` the solved path and
    equilibrium live in ``path_`` and ``equilibrium_``.
    """

    def __init__(self, maturity: Optional[float] = None, rtol: float = 1e-8,
                 atol: float = 1e-10, blowup_cap: float = BLOWUP_CAP,
                 num_samples: int = 257):
        self.maturity = maturity
        self.rtol = rtol
        self.atol = atol
        self.blowup_cap = blowup_cap
        self.num_samples = num_samples

    def fit(self, market: MarketConfig, endowments: Sequence[QuadraticEndowment]):
        T = self.maturity if self.maturity is not None else market.maturity
        self.market_ = market
        self.maturity_ = float(T)
        self.path_ = riccati_integrate(
            market, endowments, T, rtol=self.rtol, atol=self.atol,
            blowup_cap=self.blowup_cap, num_samples=self.num_samples,
        )
        self.equilibrium_ = riccati_equilibrium(
            self.path_, market, [g.g0 for g in endowments], T,
        )
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "equilibrium_"):
            raise ConfigError("riccati solver: call fit before predict")
        X = check_point_batch(X, self.market_.dim_factor)
        return self.equilibrium_.predict_lambda(X)
