"""Taylor-approximation pipeline and convergence-rate experiments.

Replacing every endowment by its second-order Taylor polynomial at the
origin drops the model into the quadratic class, whose equilibrium comes
from the Riccati path.  The distance between the original and the
approximate market price of risk, averaged under the exact law of Y_t,
shrinks like T^((1+alpha)/2) as the horizon T vanishes; the first-order
truncation gives T^(1/2) but never explodes.  This module builds the
approximations, measures the distances, and fits the empirical exponent.

A one-dimensional single-agent instance with terminal data assembled
from a compactly supported C^(1+alpha) bump admits a closed-form price
of risk (a ratio of two Gaussian-weighted integrals), which both serves
as an oracle for the grid solver and certifies that the exponent
(1+alpha)/2 is attained.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .endowments import (AnalyticEndowment, Endowment, ExampleEndowment,
                         QuadraticEndowment, example_F, example_f)
from .equilibrium import Equilibrium
from .errors import BlowUpError, ConfigError, ConvergenceError
from .kernels import GaussHermiteRule, sigma_window
from .market import MarketConfig
from .picard import picard_solve
from .riccati import quadratic_lambda, riccati_integrate

__all__ = [
    "RateExperiment",
    "taylor2",
    "taylor1",
    "l1_error",
    "rate_fit",
    "example_f",
    "example_F",
    "example_closed_lambda",
    "compare_pipeline",
    "default_maturity_schedule",
]


def taylor2(g: Endowment) -> QuadraticEndowment:
    """Second-order expansion of g at the origin, as a quadratic spec.

    The quadratic-form matrix is half the Hessian, matching the package
    convention g(y) = f + h.y + y^T j y; quadratics are fixed points.
    """
    origin = np.zeros((1, getattr(g, "dim", 1)))
    if not g.has_hessian:
        raise ConfigError("taylor2: endowment does not expose a Hessian")
    return QuadraticEndowment(
        f=float(g.value(origin)[0]),
        h=g.gradient(origin)[0],
        j=0.5 * g.hessian(origin)[0],
        g0=g.g0,
    )


def taylor1(g: Endowment) -> QuadraticEndowment:
    """First-order expansion: affine data, deterministic price of risk,
    and an equilibrium that exists on the whole horizon."""
    origin = np.zeros((1, getattr(g, "dim", 1)))
    h = g.gradient(origin)[0]
    return QuadraticEndowment(
        f=float(g.value(origin)[0]),
        h=h,
        j=np.zeros((h.size, h.size)),
        g0=g.g0,
    )


def _as_lambda_fn(evaluator) -> Callable[[float, np.ndarray], np.ndarray]:
    if isinstance(evaluator, Equilibrium):
        return evaluator.lambda_fn
    return evaluator


def l1_error(lambda_a, lambda_b, market: MarketConfig, t: float, T: float,
             rule: Optional[GaussHermiteRule] = None) -> float:
    """E |lambda_a(t, Y_t) - lambda_b(t, Y_t)| under the exact law of Y_t.

    At t = 0 the law is a point mass at the origin.
    """
    if not 0.0 <= t <= T:
        raise ConfigError(f"l1 error: need 0 <= t <= T, got t={t}, T={T}")
    fa, fb = _as_lambda_fn(lambda_a), _as_lambda_fn(lambda_b)
    D = market.dim_factor

    def diff_norm(pts):
        va = np.atleast_2d(np.asarray(fa(t, pts), dtype=float).reshape(pts.shape[0], -1))
        vb = np.atleast_2d(np.asarray(fb(t, pts), dtype=float).reshape(pts.shape[0], -1))
        return np.linalg.norm(va - vb, axis=1)

    if t == 0.0:
        return float(diff_norm(np.zeros((1, D)))[0])
    if rule is None:
        rule = GaussHermiteRule.tensor(D)
    win = sigma_window(market, 0.0, t)
    pts = rule.displacements(win.chol_lower)
    return float(diff_norm(pts) @ rule.weights)


def rate_fit(maturities, errors) -> tuple[float, float]:
    """Least-squares slope/intercept of log(error) against log(T).

    Zero or negative errors are dropped; fewer than three surviving
    points is an error.
    """
    maturities = np.asarray(maturities, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if maturities.size != errors.size:
        raise ConfigError("rate fit: maturities and errors must align")
    if maturities.size < 4:
        raise ConfigError("rate fit: need at least 4 maturities")
    if maturities.max() / maturities.min() < 30.0:
        raise ConfigError("rate fit: maturity schedule must span a wide range "
                          "(max/min >= 30)")
    keep = errors > 0.0
    if np.count_nonzero(keep) < 3:
        raise ConfigError("rate fit: fewer than 3 positive errors survive")
    x = np.log(maturities[keep])
    y = np.log(errors[keep])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def _running_slope(maturities, errors) -> float:
    m = np.asarray(maturities, dtype=float)
    e = np.asarray(errors, dtype=float)
    keep = e > 0.0
    if np.count_nonzero(keep) < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(m[keep]), np.log(e[keep]), 1)
    return float(slope)


def example_closed_lambda(t: float, y: float, T: float, alpha: float,
                          epsrel: float = 1e-12, terminal: str = "example") -> float:
    """Closed-form market price of risk of the single-agent instance.

    Ratio of two adaptive Gaussian-weighted integrals of exp(-F(y-x))F'(y-x)
    and exp(-F(y-x)) against the N(0, T-t) kernel, after normalizing the
    kernel variance away.  ``terminal="affine"`` swaps F for its affine
    expansion 2 + 2y, for which the ratio is identically 2.
    """
    if not t < T:
        raise ConfigError(f"closed-form lambda: need t < T, got t={t}, T={T}")
    sig = math.sqrt(T - t)

    if terminal == "affine":
        Fv = lambda x: 2.0 + 2.0 * x
        fv = lambda x: 2.0 * np.ones_like(np.asarray(x, dtype=float))
        kinks = []
    elif terminal == "example":
        Fv = lambda x: example_F(x, alpha)
        fv = lambda x: example_f(x, alpha)
        kinks = [(y - v) / sig for v in (-2.0, -1.0, 0.0, 1.0, 2.0)]
    else:
        raise ConfigError(f"closed-form lambda: unknown terminal {terminal!r}")

    lim = 12.0
    pts = sorted(w for w in kinks if -lim < w < lim)

    def den_ig(w):
        return math.exp(-0.5 * w * w) * math.exp(-float(Fv(np.array(y - sig * w))))

    def num_ig(w):
        x = np.array(y - sig * w)
        return math.exp(-0.5 * w * w) * math.exp(-float(Fv(x))) * float(fv(x))

    num, _ = quad(num_ig, -lim, lim, points=pts or None, epsabs=1e-14,
                  epsrel=epsrel, limit=200)
    den, _ = quad(den_ig, -lim, lim, points=pts or None, epsabs=1e-14,
                  epsrel=epsrel, limit=200)
    return num / den


def is_example_config(market: MarketConfig, endowments: Sequence[Endowment]) -> bool:
    """True for the closed-form instance: single unit-risk-aversion agent,
    D = N = 1, unit constant volatility, bump terminal data."""
    if not (market.num_investors == 1 and market.dim_factor == 1
            and market.dim_assets == 1):
        return False
    if abs(float(market.risk_aversions[0]) - 1.0) > 0.0:
        return False
    if len(endowments) != 1 or not isinstance(endowments[0], ExampleEndowment):
        return False
    ts = np.linspace(0.0, 1.0, 17)
    return bool(np.all(np.abs(market.vol(ts)[:, 0, 0] - 1.0) < 1e-15))


@dataclass
class RateExperiment:
    """Errors against maturity with the fitted power law."""

    maturities: np.ndarray
    errors: np.ndarray
    fitted_slope: float
    fitted_intercept: float
    t_eval_policy: str
    running_slopes: np.ndarray = field(default=None)  # type: ignore[assignment]
    warnings: list = field(default_factory=list)

    def rows(self):
        """CSV rows (T, t_policy, l1_error, slope_running)."""
        out = []
        for k in range(self.maturities.size):
            out.append({
                "T": float(self.maturities[k]),
                "t_policy": self.t_eval_policy,
                "l1_error": float(self.errors[k]),
                "slope_running": float(self.running_slopes[k]),
            })
        return out


def default_maturity_schedule(k_min: int = 4, k_max: int = 10) -> np.ndarray:
    """Dyadic maturities 2^-k, largest first."""
    return np.array([2.0 ** (-k) for k in range(k_min, k_max + 1)])


def _eval_times(policy: str, T: float):
    if policy == "at_zero":
        return [0.0]
    if policy == "sup_over_t":
        return [0.0, T / 4.0, T / 2.0, 3.0 * T / 4.0]
    raise ConfigError(f"unknown t_eval_policy {policy!r}")


def compare_pipeline(market: MarketConfig, endowments: Sequence[Endowment],
                     alpha: Optional[float] = None,
                     maturities: Optional[Sequence[float]] = None,
                     t_eval_policy: str = "at_zero",
                     taylor_order: int = 2,
                     lambda_source: str = "auto",
                     picard_options: Optional[dict] = None,
                     riccati_options: Optional[dict] = None,
                     max_workers: Optional[int] = None) -> RateExperiment:
    """Run the full approximation experiment over a maturity schedule.

    For every maturity: solve the original model for lambda (closed form
    on the oracle instance, grid solver otherwise), solve the Taylor
    projection through the Riccati path for lambda~, record their L1
    distance under the law of Y_t per the evaluation policy, then fit
    log-error against log-maturity.  Maturities where either solver fails
    are dropped with a warning record.
    """
    endowments = market.check_endowments(endowments)
    if alpha is None:
        alpha = market.holder_alpha
    if maturities is None:
        maturities = default_maturity_schedule()
    maturities = np.asarray(sorted(maturities, reverse=True), dtype=float)
    if taylor_order == 2:
        approx = [taylor2(g) for g in endowments]
    elif taylor_order == 1:
        approx = [taylor1(g) for g in endowments]
    else:
        raise ConfigError("taylor_order must be 1 or 2")

    if lambda_source == "auto":
        lambda_source = "closed_form" if is_example_config(market, endowments) \
            else "picard"
    if lambda_source == "closed_form" and not is_example_config(market, endowments):
        raise ConfigError(
            "closed-form lambda is only available for the single-agent "
            "unit-volatility instance with the bump endowment"
        )
    picard_options = dict(picard_options or {})
    riccati_options = dict(riccati_options or {})

    def solve_one(T_k: float):
        path = riccati_integrate(market, approx, T_k, **riccati_options)

        def lam_tilde(t, pts):
            return quadratic_lambda(path, market, t, pts, T_k)

        if lambda_source == "closed_form":
            def lam(t, pts):
                return np.array([
                    example_closed_lambda(t, float(p[0]), T_k, alpha)
                    for p in np.atleast_2d(pts)
                ])[:, None]
        else:
            _, eq = picard_solve(market, endowments, T_k, **picard_options)
            lam = eq.lambda_fn
        return float(max(
            l1_error(lam, lam_tilde, market, t, T_k)
            for t in _eval_times(t_eval_policy, T_k)
        ))

    errors = np.full(maturities.size, math.nan)
    warnings: list = []
    if max_workers is None:
        max_workers = int(os.environ.get("RADNER_EQ_THREADS", "1"))
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {k: pool.submit(solve_one, float(T_k))
                       for k, T_k in enumerate(maturities)}
            for k in range(maturities.size):
                try:
                    errors[k] = futures[k].result()
                except (ConvergenceError, BlowUpError) as exc:
                    warnings.append(f"T={maturities[k]:g} dropped: {exc}")
    else:
        for k, T_k in enumerate(maturities):
            try:
                errors[k] = solve_one(float(T_k))
            except (ConvergenceError, BlowUpError) as exc:
                warnings.append(f"T={T_k:g} dropped: {exc}")

    keep = np.isfinite(errors)
    if np.count_nonzero(keep) < 3:
        raise ConfigError(
            "rate experiment: fewer than 3 maturities survived "
            f"({len(warnings)} dropped)"
        )
    kept_T = maturities[keep]
    kept_e = errors[keep]
    try:
        slope, intercept = rate_fit(kept_T, kept_e)
    except ConfigError as exc:
        slope, intercept = math.nan, math.nan
        warnings.append(f"rate fit skipped: {exc}")
    running = np.array([
        _running_slope(kept_T[: k + 1], kept_e[: k + 1])
        for k in range(kept_T.size)
    ])
    return RateExperiment(
        maturities=kept_T, errors=kept_e, fitted_slope=slope,
        fitted_intercept=intercept, t_eval_policy=t_eval_policy,
        running_slopes=running, warnings=warnings,
    )
