"""Configuration ingestion, orchestration, and bit-stable CSV emission.

One JSON config file drives every command; unknown keys are rejected,
defaults are resolved up front, and the fully resolved config is written
back as ``manifest.json`` so any run can be reproduced byte-for-byte by
pointing the same command at its manifest.

Exit codes: 0 success, 1 configuration error, 2 solver non-convergence
or Riccati blow-up.
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

from ._version import __version__
from .compare import (compare_pipeline, default_maturity_schedule,
                      is_example_config)
from .endowments import (AnalyticEndowment, Endowment, ExampleEndowment,
                         QuadraticEndowment)
from .errors import BlowUpError, ConfigError, ConvergenceError
from .holder import discrete_parabolic_alpha_norm, tensor_grid
from .kernels import covariance_property_suite
from .market import MarketConfig
from .montecarlo import (clearing_check, martingale_check, optimality_probe,
                         simulate_paths)
from .picard import picard_solve
from .riccati import (quadratic_lambda, quadratic_value, riccati_equilibrium,
                      riccati_integrate)
from .schedules import VolSchedule, constant_schedule, linear_schedule

__all__ = ["main", "run", "emit_csv", "load_config", "CSV_SCHEMAS"]

COMMANDS = ("solve-general", "solve-quadratic", "compare-taylor", "example",
            "validate", "lemma-suite")

_NUMBER = {"type": "number"}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _NUMBER}}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["market", "endowments"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "_meta": {"type": "object"},
        "market": {
            "type": "object",
            "additionalProperties": False,
            "required": ["dim_factor", "dim_assets", "num_investors",
                         "risk_aversions", "vol_schedule"],
            "properties": {
                "dim_factor": {"type": "integer", "minimum": 1},
                "dim_assets": {"type": "integer", "minimum": 1},
                "num_investors": {"type": "integer", "minimum": 1},
                "risk_aversions": {"type": "array", "items": _NUMBER},
                "maturity": _NUMBER,
                "holder_alpha": _NUMBER,
                "delta_lower": _NUMBER,
                "delta_upper": _NUMBER,
                "vol_schedule": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["constant", "linear"]},
                        "matrix": _MATRIX,
                        "base": _MATRIX,
                        "slope": _MATRIX,
                    },
                },
            },
        },
        "endowments": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["kind"],
                "properties": {
                    "kind": {"enum": ["quadratic", "example", "analytic"]},
                    "f": _NUMBER,
                    "h": {"type": "array", "items": _NUMBER},
                    "j": _MATRIX,
                    "alpha": _NUMBER,
                    "tag": {"enum": ["cos", "sin", "gauss"]},
                    "scale": _NUMBER,
                    "wavevector": {"type": "array", "items": _NUMBER},
                    "phase": _NUMBER,
                    "center": {"type": "array", "items": _NUMBER},
                    "width": _NUMBER,
                    "initial_endowment": _NUMBER,
                },
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol": _NUMBER,
                "max_iter": {"type": "integer", "minimum": 1},
                "time_points": {"type": "integer", "minimum": 2},
                "space_points": {"type": ["integer", "null"], "minimum": 3},
                "box_halfwidth": {"type": ["number", "null"]},
                "hermite_nodes": {"type": ["integer", "null"], "minimum": 2},
                "time_nodes": {"type": ["integer", "null"], "minimum": 2},
                "rtol": _NUMBER,
                "atol": _NUMBER,
                "blowup_cap": _NUMBER,
                "riccati_samples": {"type": "integer", "minimum": 2},
                "maturities": {
                    "oneOf": [
                        {"type": "array", "items": _NUMBER, "minItems": 1},
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "properties": {
                                "k_min": {"type": "integer"},
                                "k_max": {"type": "integer"},
                            },
                        },
                    ],
                },
                "t_eval_policy": {"enum": ["at_zero", "sup_over_t"]},
                "taylor_order": {"enum": [1, 2]},
                "lambda_source": {"enum": ["auto", "picard", "closed_form"]},
                "num_paths": {"type": "integer", "minimum": 1},
                "num_steps": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "num_draws": {"type": "integer", "minimum": 10},
                "num_seeds": {"type": "integer", "minimum": 1},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "precision": {"type": "integer", "minimum": 2, "maximum": 17},
            },
        },
    },
}

SOLVER_DEFAULTS = {
    "tol": 1e-7,
    "max_iter": 50,
    "time_points": 33,
    "space_points": None,
    "box_halfwidth": None,
    "hermite_nodes": None,
    "time_nodes": None,
    "rtol": 1e-8,
    "atol": 1e-10,
    "blowup_cap": 1.0e6,
    "riccati_samples": 257,
    "maturities": {"k_min": 4, "k_max": 10},
    "t_eval_policy": "at_zero",
    "taylor_order": 2,
    "lambda_source": "auto",
    "num_paths": 10000,
    "num_steps": 64,
    "seed": 20240901,
    "num_draws": 1000,
    "num_seeds": 5,
}

MARKET_DEFAULTS = {"maturity": 1.0, "holder_alpha": 0.5}
OUTPUT_DEFAULTS = {"directory": "out", "precision": 12}


def _surface_columns(D: int, N: int) -> list[str]:
    return (["t"] + [f"y{d + 1}" for d in range(D)]
            + [f"lambda_{n + 1}" for n in range(N)] + ["r"])


def _riccati_columns(D: int) -> list[str]:
    cols = ["s", "investor", "alpha"]
    cols += [f"beta_{d + 1}" for d in range(D)]
    cols += [f"gamma_{d + 1}{e + 1}" for d in range(D) for e in range(D)]
    cols += ["blow_up"]
    return cols


CSV_SCHEMAS = {
    "convergence": lambda **kw: ["T", "t_policy", "l1_error", "slope_running"],
    "surface": lambda D, N, **kw: _surface_columns(D, N),
    "validation": lambda **kw: ["check", "investor", "statistic", "value",
                                "threshold", "passed"],
    "riccati": lambda D, **kw: _riccati_columns(D),
}


def _format_value(value, precision: int) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    if value is None:
        return ""
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, f".{precision}g")


def emit_csv(rows: Sequence[dict], schema: str, path, precision: int = 12,
             **schema_args) -> Path:
    """Write rows under a registered schema; byte-identical for equal input."""
    if schema not in CSV_SCHEMAS:
        raise ConfigError(f"csv: unknown schema {schema!r}")
    columns = CSV_SCHEMAS[schema](**schema_args)
    path = Path(path)
    lines = [",".join(columns)]
    for k, row in enumerate(rows):
        missing = set(columns) - set(row)
        extra = set(row) - set(columns)
        if missing or extra:
            raise ConfigError(
                f"csv: row {k} does not match schema {schema!r} "
                f"(missing {sorted(missing)}, extra {sorted(extra)})"
            )
        lines.append(",".join(_format_value(row[c], precision) for c in columns))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ConfigError(f"csv: cannot write {path}: {exc}") from exc
    return path


def _merge_defaults(config: dict) -> dict:
    out = copy.deepcopy(config)
    out.setdefault("solver", {})
    out.setdefault("output", {})
    for key, val in SOLVER_DEFAULTS.items():
        out["solver"].setdefault(key, copy.deepcopy(val))
    for key, val in MARKET_DEFAULTS.items():
        out["market"].setdefault(key, val)
    for key, val in OUTPUT_DEFAULTS.items():
        out["output"].setdefault(key, val)
    return out


def _set_path(config: dict, dotted: str, raw: str):
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    parts = dotted.split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value


def load_config(path, overrides: Sequence[str] = ()) -> dict:
    """Parse, override, validate, and default-resolve a config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config: cannot parse {path}: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"config: override {item!r} must be key=value")
        key, raw = item.split("=", 1)
        _set_path(config, key, raw)
    if jsonschema is not None:
        try:
            jsonschema.validate(config, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config: {exc.message} at {list(exc.absolute_path)}") from exc
    return _merge_defaults(config)


def build_market(section: dict) -> MarketConfig:
    vs = section["vol_schedule"]
    if vs["kind"] == "constant":
        if "matrix" not in vs:
            raise ConfigError("market: constant vol_schedule needs 'matrix'")
        schedule = constant_schedule(vs["matrix"])
    else:
        if "base" not in vs or "slope" not in vs:
            raise ConfigError("market: linear vol_schedule needs 'base' and 'slope'")
        schedule = linear_schedule(vs["base"], vs["slope"])
    return MarketConfig(
        dim_factor=int(section["dim_factor"]),
        dim_assets=int(section["dim_assets"]),
        num_investors=int(section["num_investors"]),
        risk_aversions=np.asarray(section["risk_aversions"], dtype=float),
        vol_schedule=schedule,
        maturity=float(section["maturity"]),
        holder_alpha=float(section["holder_alpha"]),
        delta_lower=section.get("delta_lower"),
        delta_upper=section.get("delta_upper"),
    )


def build_endowment(section: dict, dim: int) -> Endowment:
    kind = section["kind"]
    g0 = float(section.get("initial_endowment", 0.0))
    if kind == "quadratic":
        h = section.get("h", [0.0] * dim)
        j = section.get("j", [[0.0] * dim for _ in range(dim)])
        return QuadraticEndowment(section.get("f", 0.0), h, j, g0=g0)
    if kind == "example":
        if dim != 1:
            raise ConfigError("endowments: the bump endowment is one-dimensional")
        return ExampleEndowment(alpha=float(section.get("alpha", 0.5)), g0=g0)
    return AnalyticEndowment(
        section.get("tag", "cos"),
        scale=float(section.get("scale", 1.0)),
        wavevector=section.get("wavevector"),
        phase=float(section.get("phase", 0.0)),
        center=section.get("center"),
        width=float(section.get("width", 1.0)),
        dim=dim,
        g0=g0,
    )


def _maturity_schedule(spec) -> np.ndarray:
    if isinstance(spec, dict):
        return default_maturity_schedule(int(spec.get("k_min", 4)),
                                         int(spec.get("k_max", 10)))
    return np.asarray(sorted((float(x) for x in spec), reverse=True))


def _surface_rows(time_grid, points, lambda_fn, r: float) -> list[dict]:
    rows = []
    D = points.shape[1]
    for t in time_grid:
        lam = np.atleast_2d(lambda_fn(float(t), points))
        for p in range(points.shape[0]):
            row = {"t": float(t), "r": r}
            for d in range(D):
                row[f"y{d + 1}"] = float(points[p, d])
            for n in range(lam.shape[1]):
                row[f"lambda_{n + 1}"] = float(lam[p, n])
            rows.append(row)
    return rows


def _default_grid(market: MarketConfig, T: float, solver: dict):
    space_points = solver["space_points"] or (33 if market.dim_factor <= 2 else 17)
    half = solver["box_halfwidth"] or 5.0 * math.sqrt(market.delta_upper * T)
    box = np.array([[-half, half]] * market.dim_factor)
    points = tensor_grid(box, space_points)
    time_grid = np.linspace(0.0, T, solver["time_points"])
    return time_grid, points


def _write_manifest(config: dict, out_dir: Path):
    manifest = copy.deepcopy(config)
    manifest["_meta"] = {"package": "radner-eq", "version": __version__}
    text = json.dumps(manifest, indent=2, sort_keys=True)
    (out_dir / "manifest.json").write_text(text + "\n", encoding="utf-8")


def _write_summary(lines: Sequence[str], out_dir: Path):
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cmd_solve_general(config, market, endowments, out_dir, precision) -> int:
    solver = config["solver"]
    T = market.maturity
    try:
        field, eq = picard_solve(
            market, endowments, T,
            time_points=solver["time_points"], space_points=solver["space_points"],
            box_halfwidth=solver["box_halfwidth"],
            hermite_nodes=solver["hermite_nodes"], time_nodes=solver["time_nodes"],
            tol=solver["tol"], max_iter=solver["max_iter"],
        )
    except ConvergenceError as exc:
        _write_summary([
            "command: solve-general",
            "status: non-convergence",
            f"residual_history: {','.join(f'{r:.6e}' for r in exc.residual_history)}",
            f"error: {exc}",
        ], out_dir)
        print(f"solve-general failed: {exc}", file=sys.stderr)
        return 2
    rows = _surface_rows(field.time_grid, field.points, eq.lambda_fn, eq.r)
    emit_csv(rows, "surface", out_dir / "lambda_surface.csv", precision,
             D=market.dim_factor, N=market.dim_assets)
    origin = np.zeros((1, market.dim_factor))
    lam0 = eq.lambda_fn(0.0, origin)[0]
    _write_summary([
        "command: solve-general",
        "status: converged",
        f"iterations: {field.iteration_count}",
        f"residual: {field.residual:.6e}",
        f"consistency_tol: {field.consistency_tol:.6e}",
        f"r: {eq.r:.12g}",
        f"lambda_at_origin: {' '.join(f'{v:.12g}' for v in lam0)}",
        f"c0: {' '.join(f'{v:.12g}' for v in eq.c0)}",
    ], out_dir)
    return 0


def _cmd_solve_quadratic(config, market, endowments, out_dir, precision) -> int:
    solver = config["solver"]
    T = market.maturity
    for g in endowments:
        if not isinstance(g, QuadraticEndowment):
            raise ConfigError("solve-quadratic: every endowment must be quadratic")
    blow_up = None
    code = 0
    try:
        path = riccati_integrate(
            market, endowments, T, rtol=solver["rtol"], atol=solver["atol"],
            blowup_cap=solver["blowup_cap"], num_samples=solver["riccati_samples"],
        )
    except BlowUpError as exc:
        path = exc.path
        blow_up = path.blow_up
        code = 2
        print(f"solve-quadratic: {exc}", file=sys.stderr)

    rows = []
    D = market.dim_factor
    for m, s in enumerate(path.time_grid):
        for i in range(path.num_investors):
            row = {"s": float(s), "investor": i,
                   "alpha": float(path.alpha[i, m]), "blow_up": blow_up}
            for d in range(D):
                row[f"beta_{d + 1}"] = float(path.beta[i, m, d])
            for d in range(D):
                for e in range(D):
                    row[f"gamma_{d + 1}{e + 1}"] = float(path.gamma[i, m, d, e])
            rows.append(row)
    emit_csv(rows, "riccati", out_dir / "riccati_path.csv", precision, D=D)

    lines = ["command: solve-quadratic"]
    if code == 0:
        eq = riccati_equilibrium(path, market, [g.g0 for g in endowments], T)
        time_grid, points = _default_grid(market, T, solver)
        srows = _surface_rows(time_grid, points,
                              lambda t, pts: quadratic_lambda(path, market, t, pts, T),
                              eq.r)
        emit_csv(srows, "surface", out_dir / "lambda_surface.csv", precision,
                 D=D, N=market.dim_assets)
        lines += [
            "status: solved",
            f"r: {eq.r:.12g}",
            f"c0: {' '.join(f'{v:.12g}' for v in eq.c0)}",
            f"u_at_origin: {' '.join(f'{v:.12g}' for v in eq.u_at_origin)}",
        ]
    else:
        lines += ["status: blow-up", f"blow_up: {blow_up:.12g}"]
    _write_summary(lines, out_dir)
    return code


def _cmd_compare(config, market, endowments, out_dir, precision,
                 force_example: bool) -> int:
    solver = config["solver"]
    if force_example and not is_example_config(market, endowments):
        raise ConfigError(
            "example: config must be the single-agent unit-volatility bump "
            "instance (I=1, a=1, D=N=1, constant C=1, example endowment)"
        )
    picard_options = {
        "time_points": solver["time_points"], "space_points": solver["space_points"],
        "box_halfwidth": solver["box_halfwidth"],
        "hermite_nodes": solver["hermite_nodes"], "time_nodes": solver["time_nodes"],
        "tol": solver["tol"], "max_iter": solver["max_iter"],
    }
    riccati_options = {"rtol": solver["rtol"], "atol": solver["atol"],
                       "blowup_cap": solver["blowup_cap"],
                       "num_samples": solver["riccati_samples"]}
    experiment = compare_pipeline(
        market, endowments, alpha=market.holder_alpha,
        maturities=_maturity_schedule(solver["maturities"]),
        t_eval_policy=solver["t_eval_policy"],
        taylor_order=int(solver["taylor_order"]),
        lambda_source="closed_form" if force_example else solver["lambda_source"],
        picard_options=picard_options, riccati_options=riccati_options,
    )
    emit_csv(experiment.rows(), "convergence", out_dir / "convergence.csv", precision)
    _write_summary([
        f"command: {'example' if force_example else 'compare-taylor'}",
        "status: done",
        f"fitted_slope: {experiment.fitted_slope:.12g}",
        f"fitted_intercept: {experiment.fitted_intercept:.12g}",
        f"points: {experiment.maturities.size}",
        f"t_eval_policy: {experiment.t_eval_policy}",
    ] + [f"warning: {w}" for w in experiment.warnings], out_dir)
    return 0


def _cmd_validate(config, market, endowments, out_dir, precision) -> int:
    solver = config["solver"]
    T = market.maturity
    all_quadratic = all(isinstance(g, QuadraticEndowment) for g in endowments)
    if all_quadratic:
        path = riccati_integrate(market, endowments, T, rtol=solver["rtol"],
                                 atol=solver["atol"],
                                 blowup_cap=solver["blowup_cap"],
                                 num_samples=solver["riccati_samples"])
        eq = riccati_equilibrium(path, market, [g.g0 for g in endowments], T)

        def value_fn(i):
            return lambda t, pts: quadratic_value(path, t, pts, i, T)
    else:
        field, eq = picard_solve(
            market, endowments, T,
            time_points=solver["time_points"], space_points=solver["space_points"],
            box_halfwidth=solver["box_halfwidth"],
            hermite_nodes=solver["hermite_nodes"], time_nodes=solver["time_nodes"],
            tol=solver["tol"], max_iter=solver["max_iter"],
        )

        def value_fn(i):
            return lambda t, pts: field.values_at(t, pts)[i]

    bundle = simulate_paths(market, T, solver["num_paths"], solver["num_steps"],
                            solver["seed"])
    rows = []
    for i in range(market.num_investors):
        rep = martingale_check(eq, value_fn(i), i, bundle)
        rows.append({"check": "martingale", "investor": i, "statistic": "t_stat",
                     "value": rep.t_stat, "threshold": 3.0,
                     "passed": rep.passed})
    h_max, c_sum = clearing_check(eq, bundle)
    rows.append({"check": "clearing_strategies", "investor": -1,
                 "statistic": "max_abs", "value": h_max, "threshold": 1e-10,
                 "passed": h_max < 1e-10})
    rows.append({"check": "clearing_consumption", "investor": -1,
                 "statistic": "abs_sum", "value": c_sum, "threshold": 1e-10,
                 "passed": c_sum < 1e-10})
    eta = np.ones(market.dim_assets)
    for i in range(market.num_investors):
        records = optimality_probe(eq, i, bundle, [eta], endowments[i])
        worst = max(r["t_stat"] for r in records)
        rows.append({"check": "optimality", "investor": i,
                     "statistic": "max_t_stat", "value": worst, "threshold": 2.0,
                     "passed": worst <= 2.0})
    emit_csv(rows, "validation", out_dir / "validation.csv", precision)
    _write_summary(["command: validate", "status: done",
                    f"pipeline: {'riccati' if all_quadratic else 'picard'}",
                    f"checks: {len(rows)}",
                    f"passed: {sum(1 for r in rows if r['passed'])}"], out_dir)
    return 0


def _cmd_lemma_suite(config, market, endowments, out_dir, precision) -> int:
    solver = config["solver"]
    num_draws = solver["num_draws"]
    num_seeds = solver["num_seeds"]
    base_seed = solver["seed"]
    rows = []
    suites = [covariance_property_suite(num_draws, base_seed + k)
              for k in range(num_seeds)]
    first = suites[0]
    for part in ("part1", "part2", "part3"):
        total = sum(s["violations"][part] for s in suites)
        rows.append({"check": f"covariance_{part}", "investor": -1,
                     "statistic": "violations", "value": total,
                     "threshold": 0, "passed": total == 0})
    for part in ("part4", "part5"):
        for stat in ("max", "p90"):
            vals = np.array([s[f"{part}_{stat}"] for s in suites])
            spread = float(vals.max() / vals.min() - 1.0) if vals.min() > 0 else math.inf
            rows.append({"check": f"covariance_{part}", "investor": -1,
                         "statistic": f"{stat}_ratio", "value": first[f"{part}_{stat}"],
                         "threshold": math.inf,
                         "passed": bool(np.all(np.isfinite(vals)))})
            rows.append({"check": f"covariance_{part}_stability", "investor": -1,
                         "statistic": f"{stat}_seed_spread", "value": spread,
                         "threshold": 0.1, "passed": spread <= 0.1})

    # Discrete product inequality on random smooth quadruples.
    rng = np.random.default_rng(base_seed)
    times = np.linspace(0.0, 1.0, 5)
    points = np.linspace(-1.0, 1.0, 9)[:, None]
    alpha = market.holder_alpha
    worst_gap = -math.inf
    for _ in range(50):
        funcs = []
        for _ in range(4):
            a, b, c = rng.uniform(-1, 1, 3)
            w = rng.uniform(0.5, 2.0)
            funcs.append(np.array([
                [a * math.sin(w * (x + t)) + b * x + c for x in points[:, 0]]
                for t in times
            ]))
        h1, h2, h1t, h2t = funcs
        norm = lambda v: discrete_parabolic_alpha_norm(v, times, points, alpha)
        lhs = norm(h1 * h2 - h1t * h2t)
        rhs = 0.5 * (norm(h1 - h1t) * norm(h2 + h2t)
                     + norm(h1 + h1t) * norm(h2 - h2t))
        worst_gap = max(worst_gap, lhs - rhs)
    rows.append({"check": "product_inequality", "investor": -1,
                 "statistic": "worst_lhs_minus_rhs", "value": worst_gap,
                 "threshold": 1e-9, "passed": worst_gap <= 1e-9})

    emit_csv(rows, "validation", out_dir / "validation.csv", precision)
    _write_summary(["command: lemma-suite", "status: done",
                    f"draws_per_seed: {num_draws}", f"seeds: {num_seeds}",
                    f"part4_p90: {first['part4_p90']:.12g}",
                    f"part5_p90: {first['part5_p90']:.12g}",
                    f"checks: {len(rows)}",
                    f"passed: {sum(1 for r in rows if r['passed'])}"], out_dir)
    return 0


def run(config_path, overrides: Sequence[str] = (), out_dir=None,
        seed: Optional[int] = None, command: Optional[str] = None) -> int:
    """Execute a command from a config file; returns the process exit code."""
    try:
        config = load_config(config_path, overrides)
        if seed is not None:
            config["solver"]["seed"] = int(seed)
        cfg_command = config.get("command")
        if command is None:
            command = cfg_command
        if command is None:
            raise ConfigError("config: no command given (config key or CLI argument)")
        if cfg_command is not None and command != cfg_command:
            raise ConfigError(
                f"config: CLI command {command!r} conflicts with config command "
                f"{cfg_command!r}"
            )
        if command not in COMMANDS:
            raise ConfigError(f"config: unknown command {command!r}")
        config["command"] = command

        market = build_market(config["market"])
        endowments = [build_endowment(e, market.dim_factor)
                      for e in config["endowments"]]
        market.check_endowments(endowments)

        out = Path(out_dir) if out_dir is not None else Path(config["output"]["directory"])
        if out_dir is not None:
            config["output"]["directory"] = str(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        precision = int(config["output"]["precision"])
        _write_manifest(config, out)

        if command == "solve-general":
            return _cmd_solve_general(config, market, endowments, out, precision)
        if command == "solve-quadratic":
            return _cmd_solve_quadratic(config, market, endowments, out, precision)
        if command == "compare-taylor":
            return _cmd_compare(config, market, endowments, out, precision, False)
        if command == "example":
            return _cmd_compare(config, market, endowments, out, precision, True)
        if command == "validate":
            return _cmd_validate(config, market, endowments, out, precision)
        return _cmd_lemma_suite(config, market, endowments, out, precision)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, BlowUpError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="radner-eq",
        description="Incomplete-market equilibrium solvers and harnesses",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="dotted-path config override")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed override")
    args = parser.parse_args(argv)
    return run(args.config, args.overrides, args.out, args.seed, args.command)


if __name__ == "__main__":
    sys.exit(main())
