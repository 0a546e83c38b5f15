"""Monte Carlo validation of the equilibrium properties.

Paths of the driftless factor are simulated with exact Gaussian
increments (no Euler bias): per step the Brownian increment and the
factor increment are drawn jointly from their exact covariance, so the
wealth recursion sees consistent noise.  The checks mirror what the
verification arguments rely on: the indirect-utility process

    V_i(t, x, y) = -exp(-a_i (e^{r(T-t)} x + u_i(t, y)))

is a martingale along the optimal strategy, markets clear pathwise, and
no bounded deterministic strategy perturbation improves expected utility
beyond noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .endowments import Endowment
from .equilibrium import Equilibrium
from .errors import ConfigError
from .market import MarketConfig

__all__ = [
    "PathBundle",
    "simulate_paths",
    "martingale_check",
    "MartingaleReport",
    "clearing_check",
    "optimality_probe",
]


@dataclass
class PathBundle:
    """Exact-increment sample paths of the factor and its driving noise."""

    market: MarketConfig
    times: np.ndarray                 # (num_steps + 1,)
    paths: np.ndarray                 # (num_paths, num_steps + 1, D)
    dw: np.ndarray                    # (num_paths, num_steps, D)
    seed: int
    antithetic: bool = False

    @property
    def num_paths(self) -> int:
        return self.paths.shape[0]

    @property
    def num_steps(self) -> int:
        return self.paths.shape[1] - 1


def _psd_factor(matrix: np.ndarray) -> np.ndarray:
    """Factor R with R R^T = matrix for PSD (possibly singular) input."""
    vals, vecs = np.linalg.eigh(0.5 * (matrix + matrix.T))
    vals = np.clip(vals, 0.0, None)
    return vecs * np.sqrt(vals)


def _step_rng(seed: int, step: int) -> np.random.Generator:
    key = np.array([np.uint64(seed), np.uint64(step)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate_paths(market: MarketConfig, T: float, num_paths: int,
                   num_steps: int, seed: int,
                   antithetic: bool = False) -> PathBundle:
    """Counter-based exact simulation; bitwise reproducible given the seed.

    The per-step draw is keyed by (seed, step), so the result does not
    depend on scheduling or on how many steps follow.
    """
    if num_paths < 1 or num_steps < 1:
        raise ConfigError("simulate: need num_paths >= 1 and num_steps >= 1")
    if antithetic and num_paths % 2:
        raise ConfigError("simulate: antithetic pairing needs an even path count")
    D = market.dim_factor
    times = np.linspace(0.0, T, num_steps + 1)
    paths = np.zeros((num_paths, num_steps + 1, D))
    dw = np.empty((num_paths, num_steps, D))
    schedule = market.vol_schedule

    for k in range(num_steps):
        t0, t1 = float(times[k]), float(times[k + 1])
        delta = t1 - t0
        sigma = schedule.gram_integral(t0, t1)
        cross = schedule.integral(t0, t1)          # E[dY dW^T]
        resid = sigma - cross @ cross.T / delta
        factor = _psd_factor(resid)

        rng = _step_rng(seed, k)
        if antithetic:
            half = num_paths // 2
            z = rng.standard_normal((half, 2 * D))
            z = np.concatenate([z, -z], axis=0)
        else:
            z = rng.standard_normal((num_paths, 2 * D))
        dw_k = math.sqrt(delta) * z[:, :D]
        dy_k = dw_k @ (cross.T / delta) + z[:, D:] @ factor.T
        dw[:, k] = dw_k
        paths[:, k + 1] = paths[:, k] + dy_k
    return PathBundle(market=market, times=times, paths=paths, dw=dw,
                      seed=int(seed), antithetic=antithetic)


def _wealth_paths(equilibrium: Equilibrium, i: int, bundle: PathBundle,
                  offset: Optional[Callable[[float], np.ndarray]] = None,
                  keep_all: bool = False):
    """Integrate the self-financing wealth along each path.

    Left-point strategy evaluation with exact e^{r dt} compounding per
    step; ``offset`` adds a deterministic holding perturbation.
    """
    r = equilibrium.r
    N = bundle.market.dim_assets
    num_paths = bundle.num_paths
    X = np.zeros(num_paths)
    trail = [X.copy()] if keep_all else None
    for k in range(bundle.num_steps):
        t0 = float(bundle.times[k])
        dt = float(bundle.times[k + 1] - bundle.times[k])
        y_k = bundle.paths[:, k]
        H = equilibrium.strategy(i, t0, y_k)
        if offset is not None:
            H = H + offset(t0)[None, :]
        lam = equilibrium.lambda_at(t0, y_k)
        gain = np.einsum("pn,pn->p", H, lam * dt + bundle.dw[:, k, :N])
        X = X * math.exp(r * dt) + gain
        if keep_all:
            trail.append(X.copy())
    if keep_all:
        return np.stack(trail, axis=1)
    return X


@dataclass
class MartingaleReport:
    investor: int
    horizons: np.ndarray
    mean_increments: np.ndarray
    se_final: float
    t_stat: float
    num_paths: int
    num_excluded: int

    @property
    def passed(self) -> bool:
        return abs(self.t_stat) < 3.0


def martingale_check(equilibrium: Equilibrium, value_fn, i: int,
                     bundle: PathBundle) -> MartingaleReport:
    """t-statistic of E[V_T - V_0] along simulated optimal paths.

    ``value_fn`` maps (t, points(n, D)) -> (n,) values of u_i; the wealth
    path is integrated on the bundle's grid.  Paths hitting non-finite
    values are excluded and counted.
    """
    a_i = float(equilibrium.market.risk_aversions[i])
    r = equilibrium.r
    T = equilibrium.maturity
    X = _wealth_paths(equilibrium, i, bundle, keep_all=True)  # (P, K+1)
    K = bundle.num_steps
    V = np.empty((bundle.num_paths, K + 1))
    for k in range(K + 1):
        t_k = float(bundle.times[k])
        u_vals = np.asarray(value_fn(t_k, bundle.paths[:, k]), dtype=float)
        V[:, k] = -np.exp(-a_i * (math.exp(r * (T - t_k)) * X[:, k] + u_vals))
    good = np.all(np.isfinite(V), axis=1)
    num_excluded = int(np.count_nonzero(~good))
    V = V[good]
    if V.shape[0] < 2:
        raise ConfigError("martingale check: fewer than 2 finite paths")
    increments = V - V[:, :1]
    mean_inc = increments.mean(axis=0)
    final = increments[:, -1]
    se = float(final.std(ddof=1) / math.sqrt(final.size))
    t_stat = float(mean_inc[-1] / se) if se > 0 else 0.0
    return MartingaleReport(
        investor=i, horizons=bundle.times.copy(), mean_increments=mean_inc,
        se_final=se, t_stat=t_stat, num_paths=int(V.shape[0]),
        num_excluded=num_excluded,
    )


def clearing_check(equilibrium: Equilibrium, bundle: PathBundle) -> tuple[float, float]:
    """(max |sum_i H_i| over sampled points, |sum_i c0_i|)."""
    worst = 0.0
    for k in range(bundle.num_steps + 1):
        t_k = float(bundle.times[k])
        total = equilibrium.total_strategy(t_k, bundle.paths[:, k])
        worst = max(worst, float(np.max(np.abs(total))))
    return worst, abs(float(equilibrium.c0.sum()))


def optimality_probe(equilibrium: Equilibrium, i: int, bundle: PathBundle,
                     perturbations: Sequence, endowment: Endowment,
                     epsilons: Sequence[float] = (-0.1, -0.05, 0.05, 0.1)):
    """Utility deltas of perturbed strategies against the optimum.

    Each perturbation is a constant N-vector (or callable of time); for
    each epsilon the same paths price H + eps*eta, so the delta is a
    paired comparison.  No delta may exceed +2 standard errors if H is
    optimal.
    """
    a_i = float(equilibrium.market.risk_aversions[i])
    N = equilibrium.market.dim_assets
    g_T = np.asarray(endowment.value(bundle.paths[:, -1]), dtype=float)
    base_X = _wealth_paths(equilibrium, i, bundle)
    base_u = -np.exp(-a_i * (base_X + g_T))
    records = []
    for label, eta in enumerate(perturbations):
        if callable(eta):
            eta_fn = lambda t, _e=eta: np.atleast_1d(np.asarray(_e(t), dtype=float))
        else:
            eta_arr = np.broadcast_to(np.atleast_1d(np.asarray(eta, dtype=float)), (N,))
            eta_fn = lambda t, _e=eta_arr: _e
        for eps in epsilons:
            if eps == 0.0:
                records.append({"perturbation": label, "eps": 0.0,
                                "delta": 0.0, "se": 0.0, "t_stat": 0.0})
                continue
            off = lambda t, _f=eta_fn, _e=eps: _e * _f(t)
            X = _wealth_paths(equilibrium, i, bundle, offset=off)
            pert_u = -np.exp(-a_i * (X + g_T))
            diff = pert_u - base_u
            delta = float(diff.mean())
            se = float(diff.std(ddof=1) / math.sqrt(diff.size))
            records.append({
                "perturbation": label, "eps": float(eps), "delta": delta,
                "se": se, "t_stat": delta / se if se > 0 else 0.0,
            })
    return records
