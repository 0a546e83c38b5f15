"""Incomplete Radner equilibria for heterogeneous exponential investors.

Two solver pipelines compute the equilibrium interest rate and market
price of risk driven by a multi-dimensional Gaussian factor: a Picard
fixed-point iteration on the coupled semilinear value-function system
(general endowments, short maturities) and a coupled Riccati ODE system
(quadratic endowments, closed-form value functions).  A comparison
harness measures how fast the Taylor-projected equilibrium approaches
the general one as the horizon shrinks, and a Monte Carlo harness
validates martingality, clearing, and strategy optimality.
"""

from ._version import __version__
from .endowments import (AnalyticEndowment, Endowment, ExampleEndowment,
                         QuadraticEndowment, TransformedEndowment, example_F,
                         example_f)
from .equilibrium import (Equilibrium, equilibrium_rate, initial_consumption)
from .errors import BlowUpError, ConfigError, ConvergenceError, RadnerEqError
from .holder import holder_norm_estimate, t0_scaling_report
from .kernels import (CovarianceWindow, GaussHermiteRule, covariance_property_suite,
                      feynman_kac_eval, feynman_kac_grad, gaussian_kernel,
                      sigma_window)
from .market import (MarketConfig, RawFactorSpec, ReducedCoordinates,
                     reduce_coordinates, single_factor_market)
from .montecarlo import (PathBundle, clearing_check, martingale_check,
                         optimality_probe, simulate_paths)
from .picard import (PicardEquilibriumSolver, SolutionField, apply_pi,
                     coupling_lambda, nonlinearity_f, picard_solve)
from .riccati import (RiccatiEquilibriumSolver, RiccatiPath, quadratic_lambda,
                      quadratic_value, riccati_equilibrium, riccati_integrate,
                      riccati_rhs)
from .compare import (RateExperiment, compare_pipeline, default_maturity_schedule,
                      example_closed_lambda, l1_error, rate_fit, taylor1, taylor2)
from .schedules import VolSchedule, constant_schedule, linear_schedule

__all__ = [
    "__version__",
    "AnalyticEndowment", "Endowment", "ExampleEndowment", "QuadraticEndowment",
    "TransformedEndowment", "example_F", "example_f",
    "Equilibrium", "equilibrium_rate", "initial_consumption",
    "BlowUpError", "ConfigError", "ConvergenceError", "RadnerEqError",
    "holder_norm_estimate", "t0_scaling_report",
    "CovarianceWindow", "GaussHermiteRule", "covariance_property_suite",
    "feynman_kac_eval", "feynman_kac_grad", "gaussian_kernel", "sigma_window",
    "MarketConfig", "RawFactorSpec", "ReducedCoordinates", "reduce_coordinates",
    "single_factor_market",
    "PathBundle", "clearing_check", "martingale_check", "optimality_probe",
    "simulate_paths",
    "PicardEquilibriumSolver", "SolutionField", "apply_pi", "coupling_lambda",
    "nonlinearity_f", "picard_solve",
    "RiccatiEquilibriumSolver", "RiccatiPath", "quadratic_lambda",
    "quadratic_value", "riccati_equilibrium", "riccati_integrate", "riccati_rhs",
    "RateExperiment", "compare_pipeline", "default_maturity_schedule",
    "example_closed_lambda", "l1_error", "rate_fit", "taylor1", "taylor2",
    "VolSchedule", "constant_schedule", "linear_schedule",
]
