import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import radner_eq as rq
from radner_eq.holder import (default_diagnostic_box,
                              discrete_parabolic_alpha_norm,
                              holder_norm_estimate, t0_scaling_report,
                              tensor_grid)


def make_market(**kw):
    defaults = dict(
        dim_factor=1, dim_assets=1, num_investors=1,
        risk_aversions=np.array([1.0]),
        vol_schedule=rq.constant_schedule([[1.0]]),
        maturity=0.5,
    )
    defaults.update(kw)
    return rq.MarketConfig(**defaults)


class TestMarketConfig:
    def test_dimension_rule(self):
        with pytest.raises(rq.ConfigError, match="N <= D"):
            make_market(dim_assets=2)

    def test_positive_risk_aversion(self):
        with pytest.raises(rq.ConfigError):
            make_market(risk_aversions=np.array([-1.0]))

    def test_maturity_range(self):
        with pytest.raises(rq.ConfigError):
            make_market(maturity=1.5)
        with pytest.raises(rq.ConfigError):
            make_market(maturity=0.0)

    def test_tau_sigma(self):
        m = make_market(num_investors=3, risk_aversions=np.array([1.0, 2.0, 4.0]))
        assert m.tau_sigma == pytest.approx(1.0 + 0.5 + 0.25, abs=1e-15)
        assert m.tau_sigma > 0

    def test_ellipticity_band_violation(self):
        with pytest.raises(rq.ConfigError, match="ellipticity"):
            make_market(delta_lower=2.0, delta_upper=3.0)

    def test_ellipticity_sampled_defaults(self):
        m = make_market(vol_schedule=rq.constant_schedule([[2.0]]))
        assert m.delta_lower <= 4.0 <= m.delta_upper


class TestQuadraticSymmetrization:
    def test_symmetrized_on_ingestion(self):
        j = np.array([[1.0, 2.0], [0.0, 3.0]])
        g = rq.QuadraticEndowment(0.0, [0.0, 0.0], j)
        assert np.array_equal(g.j, g.j.T)

    @given(st.lists(st.floats(-10, 10), min_size=4, max_size=4))
    @settings(max_examples=50, deadline=None)
    def test_idempotent(self, entries):
        j = np.array(entries).reshape(2, 2)
        g1 = rq.QuadraticEndowment(0.0, [0.0, 0.0], j)
        g2 = rq.QuadraticEndowment(0.0, [0.0, 0.0], g1.j)
        assert np.array_equal(g1.j, g2.j)

    def test_quadratic_form_sees_symmetric_part(self):
        j = np.array([[1.0, 5.0], [-5.0, 2.0]])
        g = rq.QuadraticEndowment(0.0, [0.0, 0.0], j)
        y = np.array([[0.7, -0.4]])
        expected = y[0] @ (0.5 * (j + j.T)) @ y[0]
        assert g.value(y)[0] == pytest.approx(expected, rel=1e-14)


class TestReduceCoordinates:
    def test_identity(self):
        sched = rq.constant_schedule([[1.0, 0.2], [0.0, 0.9]])
        raw = rq.RawFactorSpec(
            A=lambda t: np.zeros(2), B=lambda t: np.zeros((2, 2)),
            C=sched, Y0=np.zeros(2),
        )
        g = rq.QuadraticEndowment(1.0, [1.0, -1.0], np.eye(2))
        red = rq.reduce_coordinates(raw, [g], T=0.5)
        assert red.vol_schedule is sched
        assert red.endowments[0] is g
        ys = np.random.default_rng(0).normal(size=(16, 2))
        assert np.array_equal(red.endowments[0].value(ys), g.value(ys))

    def test_scalar_autoregression(self):
        # B constant b: Phi(t) = e^{bt}, C~(t) = e^{-bt} C(t), g~(y) = g(e^{bT} y)
        b, T = 0.7, 0.5
        sched = rq.constant_schedule([[1.0]])
        raw = rq.RawFactorSpec(
            A=lambda t: np.zeros(1), B=lambda t: np.array([[b]]),
            C=sched, Y0=np.zeros(1),
        )
        g = rq.QuadraticEndowment(0.0, [1.0], [[0.3]])
        red = rq.reduce_coordinates(raw, [g], T=T)
        assert red.fundamental_terminal[0, 0] == pytest.approx(math.exp(b * T), rel=1e-12)
        for t in np.linspace(0.0, T, 9):
            assert red.vol_schedule(t)[0, 0] == pytest.approx(
                math.exp(-b * t), rel=1e-7)
        ys = np.linspace(-1, 1, 7)[:, None]
        expected = g.value(math.exp(b * T) * ys)
        assert np.allclose(red.endowments[0].value(ys), expected, rtol=1e-12)

    def test_constant_drift_shift(self):
        # B = 0, A = a0, Y0 = y0: g~(y) = g(y0 + a0 T + y)
        a0, y0, T = 0.8, -0.3, 0.25
        raw = rq.RawFactorSpec(
            A=lambda t: np.array([a0]), B=lambda t: np.zeros((1, 1)),
            C=rq.constant_schedule([[1.2]]), Y0=np.array([y0]),
        )
        g = rq.QuadraticEndowment(0.5, [2.0], [[0.1]])
        red = rq.reduce_coordinates(raw, [g], T=T)
        ys = np.linspace(-2, 2, 9)[:, None]
        assert np.allclose(red.endowments[0].value(ys),
                           g.value(ys + y0 + a0 * T), rtol=1e-10, atol=1e-12)
        for t in np.linspace(0.0, T, 5):
            assert red.vol_schedule(t)[0, 0] == pytest.approx(1.2, rel=1e-9)

    def test_fundamental_matrix_nonsingular_on_shipped_configs(self):
        raw = rq.RawFactorSpec(
            A=lambda t: np.zeros(2),
            B=lambda t: np.array([[0.0, 1.0], [-1.0, 0.0]]),
            C=rq.constant_schedule(np.eye(2)), Y0=np.zeros(2),
        )
        red = rq.reduce_coordinates(raw, [rq.QuadraticEndowment(0, [0, 0], np.zeros((2, 2)))], T=1.0)
        assert abs(np.linalg.det(red.fundamental_terminal)) > 0.5


class TestHolderNorms:
    def test_constant(self):
        g = rq.QuadraticEndowment(5.0, [0.0], [[0.0]])
        val = holder_norm_estimate(g, "1+alpha", [[-2.0, 2.0]], 17, alpha=0.5)
        assert val == pytest.approx(5.0, abs=1e-12)

    def test_linear(self):
        g = rq.QuadraticEndowment(0.0, [1.0], [[0.0]])
        val = holder_norm_estimate(g, "1+alpha", [[-1.0, 1.0]], 17, alpha=0.5)
        assert val == pytest.approx(2.0, abs=1e-12)

    def test_order_zero_is_grid_max(self):
        g = rq.AnalyticEndowment("cos", wavevector=[1.3])
        box = [[-2.0, 2.0]]
        points = tensor_grid(box, 21)
        assert holder_norm_estimate(g, "0", box, 21) == np.max(np.abs(g.value(points)))

    def test_example_2alpha_against_dense_oracle(self):
        g = rq.ExampleEndowment(alpha=0.5)
        coarse = holder_norm_estimate(g, "2+alpha", [[-3.0, 3.0]], 33, alpha=0.5)
        dense = holder_norm_estimate(g, "2+alpha", [[-3.0, 3.0]], 330, alpha=0.5)
        assert math.isfinite(coarse)
        assert abs(coarse - dense) / dense < 0.05

    def test_monotone_under_nested_refinement(self):
        g = rq.AnalyticEndowment("gauss", center=[0.3], width=0.8)
        box = [[-2.0, 2.0]]
        vals = [holder_norm_estimate(g, "1+alpha", box, res, alpha=0.5)
                for res in (9, 17, 33)]
        assert vals[0] <= vals[1] + 1e-12 and vals[1] <= vals[2] + 1e-12

    def test_callable_fallback(self):
        fn = lambda pts: np.cos(pts[:, 0])
        val = holder_norm_estimate(fn, "1+alpha", [[-1.0, 1.0]], 65, alpha=0.5)
        exact = holder_norm_estimate(rq.AnalyticEndowment("cos", dim=1),
                                     "1+alpha", [[-1.0, 1.0]], 65, alpha=0.5)
        assert val == pytest.approx(exact, rel=1e-3)

    def test_coarse_resolution_rejected(self):
        g = rq.QuadraticEndowment(0.0, [1.0], [[0.0]])
        with pytest.raises(rq.ConfigError):
            holder_norm_estimate(g, "0", [[-1.0, 1.0]], 4)


class TestMaturityScaleReport:
    def test_zero_endowments(self):
        m = make_market()
        g = rq.QuadraticEndowment(0.0, [0.0], [[0.0]])
        assert t0_scaling_report([g], m) == math.inf

    def test_linear_quarter(self):
        m = make_market()
        g = rq.QuadraticEndowment(0.0, [1.0], [[0.0]])
        val = t0_scaling_report([g], m, box=[[-1.0, 1.0]])
        assert val == pytest.approx(0.25, abs=1e-12)

    def test_doubling_quarters(self):
        m = make_market()
        g1 = rq.QuadraticEndowment(0.0, [1.0], [[0.0]])
        g2 = rq.QuadraticEndowment(0.0, [2.0], [[0.0]])
        box = [[-1.0, 1.0]]
        assert t0_scaling_report([g2], m, box=box) == pytest.approx(
            t0_scaling_report([g1], m, box=box) / 4.0, rel=1e-12)

    def test_default_box(self):
        m = make_market()
        box = default_diagnostic_box(m)
        half = 4.0 * math.sqrt(m.delta_upper * m.maturity)
        assert box[0][1] == pytest.approx(half)


class TestDiscreteProductInequality:
    """Discrete sup-based norms over a shared point set satisfy the
    polarization product bound exactly, up to float noise."""

    @pytest.mark.parametrize("seed", range(8))
    def test_random_quadruples(self, seed):
        rng = np.random.default_rng(seed)
        times = np.linspace(0.0, 1.0, 5)
        points = np.linspace(-1.0, 1.0, 9)[:, None]
        alpha = 0.5

        def sample():
            a, b, c = rng.uniform(-1, 1, 3)
            w = rng.uniform(0.5, 2.0)
            return np.array([[a * math.sin(w * (x + t)) + b * x + c
                              for x in points[:, 0]] for t in times])

        h1, h2, h1t, h2t = sample(), sample(), sample(), sample()
        norm = lambda v: discrete_parabolic_alpha_norm(v, times, points, alpha)
        lhs = norm(h1 * h2 - h1t * h2t)
        rhs = 0.5 * (norm(h1 - h1t) * norm(h2 + h2t)
                     + norm(h1 + h1t) * norm(h2 - h2t))
        assert lhs <= rhs + 1e-9
