import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

import radner_eq as rq
from radner_eq.compare import is_example_config


def scalar_market(maturity=0.1):
    return rq.single_factor_market(c=1.0, a=1.0, maturity=maturity)


class TestTaylor2:
    def test_quadratic_fixed_point(self):
        g = rq.QuadraticEndowment(1.2, [0.5, -0.3], [[0.4, 0.1], [0.1, -0.2]], g0=0.7)
        t = rq.taylor2(g)
        assert t.f == pytest.approx(g.f, abs=1e-14)
        assert np.allclose(t.h, g.h, atol=1e-14)
        assert np.allclose(t.j, g.j, atol=1e-14)
        assert t.g0 == g.g0

    @given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
    @settings(max_examples=40, deadline=None)
    def test_idempotence(self, vals):
        f, h1, h2, j11, j12, j22 = vals
        g = rq.QuadraticEndowment(f, [h1, h2], [[j11, j12], [j12, j22]])
        once = rq.taylor2(g)
        twice = rq.taylor2(once)
        assert np.allclose(once.j, twice.j, atol=1e-13)
        assert np.allclose(once.h, twice.h, atol=1e-13)

    def test_bump_projects_to_affine(self):
        g = rq.ExampleEndowment(alpha=0.5)
        t = rq.taylor2(g)
        assert t.f == pytest.approx(2.0, abs=1e-14)
        assert t.h[0] == pytest.approx(2.0, abs=1e-14)
        assert np.allclose(t.j, 0.0, atol=1e-14)

    def test_cosine(self):
        g = rq.AnalyticEndowment("cos", dim=1)
        t = rq.taylor2(g)
        # 1 - y^2/2 in the y^T j y convention: j = -1/2
        assert t.f == pytest.approx(1.0)
        assert t.h[0] == pytest.approx(0.0, abs=1e-15)
        assert t.j[0, 0] == pytest.approx(-0.5)
        ys = np.linspace(-0.3, 0.3, 5)[:, None]
        assert np.allclose(t.value(ys), 1.0 - ys[:, 0] ** 2 / 2.0, atol=1e-12)

    def test_half_factor_round_trip_through_lambda(self):
        """Quadratic -> taylor2 must reproduce the same price of risk."""
        m = scalar_market(maturity=0.3)
        g = rq.QuadraticEndowment(0.2, [0.8], [[0.3]])
        p1 = rq.riccati_integrate(m, [g], 0.3)
        p2 = rq.riccati_integrate(m, [rq.taylor2(g)], 0.3)
        pts = np.linspace(-1, 1, 9)[:, None]
        for t in (0.0, 0.1, 0.25):
            l1 = rq.quadratic_lambda(p1, m, t, pts, 0.3)
            l2 = rq.quadratic_lambda(p2, m, t, pts, 0.3)
            assert np.allclose(l1, l2, atol=1e-13)

    def test_requires_hessian(self):
        from radner_eq.kernels import _CallableTerminal
        bare = _CallableTerminal(lambda pts: np.cos(pts[:, 0]))
        with pytest.raises(rq.ConfigError):
            rq.taylor2(bare)


class TestTaylor1:
    def test_affine_fixed_point(self):
        g = rq.QuadraticEndowment(0.4, [1.5], [[0.0]])
        t = rq.taylor1(g)
        assert t.f == g.f and np.allclose(t.h, g.h) and np.all(t.j == 0.0)

    def test_bump(self):
        t = rq.taylor1(rq.ExampleEndowment(alpha=0.5))
        assert (t.f, t.h[0]) == (2.0, 2.0)
        assert np.all(t.j == 0.0)

    def test_cosine_constant(self):
        t = rq.taylor1(rq.AnalyticEndowment("cos", dim=1))
        assert t.f == 1.0 and np.all(t.j == 0.0)
        assert t.h[0] == pytest.approx(0.0, abs=1e-15)

    def test_full_horizon_existence(self):
        # gamma stays 0, so the path never blows up on (0, 1]
        m = scalar_market(maturity=1.0)
        t = rq.taylor1(rq.AnalyticEndowment("cos", dim=1))
        path = rq.riccati_integrate(m, [t], 1.0)
        assert path.blow_up is None
        lam = rq.quadratic_lambda(path, m, 0.5, np.array([[0.0], [2.0]]), 1.0)
        assert np.ptp(lam, axis=0) == pytest.approx(0.0, abs=1e-14)


class TestL1Error:
    m = scalar_market(maturity=0.5)

    def test_identical_evaluators(self):
        lam = lambda t, pts: np.full((pts.shape[0], 1), 1.3)
        assert rq.l1_error(lam, lam, self.m, 0.2, 0.5) == 0.0

    def test_constant_offset(self):
        la = lambda t, pts: np.full((pts.shape[0], 1), 1.0)
        lb = lambda t, pts: np.full((pts.shape[0], 1), -0.5)
        for t in (0.0, 0.1, 0.4):
            assert rq.l1_error(la, lb, self.m, t, 0.5) == pytest.approx(1.5, abs=1e-12)

    def test_point_mass_at_zero(self):
        la = lambda t, pts: pts[:, :1] + 2.0
        lb = lambda t, pts: np.zeros((pts.shape[0], 1))
        assert rq.l1_error(la, lb, self.m, 0.0, 0.5) == pytest.approx(2.0)

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(2)
        mk = lambda c0, c1: (lambda t, pts: c0 + c1 * pts[:, :1])
        for _ in range(5):
            fa = mk(*rng.normal(size=2))
            fb = mk(*rng.normal(size=2))
            fc = mk(*rng.normal(size=2))
            t = rng.uniform(0.05, 0.45)
            ab = rq.l1_error(fa, fb, self.m, t, 0.5)
            ba = rq.l1_error(fb, fa, self.m, t, 0.5)
            ac = rq.l1_error(fa, fc, self.m, t, 0.5)
            cb = rq.l1_error(fc, fb, self.m, t, 0.5)
            assert ab == pytest.approx(ba, rel=1e-12)
            assert ab <= ac + cb + 1e-12


class TestRateFit:
    def test_exact_linear_power(self):
        T = rq.default_maturity_schedule()
        slope, _ = rq.rate_fit(T, T.copy())
        assert slope == pytest.approx(1.0, abs=1e-12)

    def test_exact_power_with_constant(self):
        T = rq.default_maturity_schedule()
        slope, intercept = rq.rate_fit(T, 3.0 * T**0.75)
        assert slope == pytest.approx(0.75, abs=1e-12)
        assert intercept == pytest.approx(math.log(3.0), abs=1e-12)

    def test_zero_errors_dropped(self):
        T = rq.default_maturity_schedule()
        errors = 2.0 * T.copy()
        errors[1] = 0.0
        slope, _ = rq.rate_fit(T, errors)
        assert slope == pytest.approx(1.0, abs=1e-12)

    def test_too_few_survivors(self):
        T = rq.default_maturity_schedule()
        errors = np.zeros_like(T)
        errors[0] = 1.0
        with pytest.raises(rq.ConfigError):
            rq.rate_fit(T, errors)

    def test_narrow_schedule_rejected(self):
        with pytest.raises(rq.ConfigError):
            rq.rate_fit([0.5, 0.4, 0.3, 0.2], [1, 1, 1, 1])


class TestExampleFunctions:
    def test_bump_values(self):
        f = lambda x: float(rq.example_f(np.array(x), 0.5))
        assert f(0.0) == 2.0
        assert f(2.0) == 0.0 and f(-2.0) == 0.0
        assert f(1.0) == 1.0 and f(-1.0) == 1.0
        assert f(3.0) == 0.0

    def test_antiderivative_values(self):
        F = lambda x: float(rq.example_F(np.array(x), 0.5))
        assert F(-2.0) == 0.0 and F(-3.0) == 0.0
        assert F(0.0) == 2.0
        assert F(2.0) == pytest.approx(4.0)
        assert F(5.0) == pytest.approx(4.0)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
    def test_antiderivative_against_adaptive_quadrature(self, alpha):
        for x in (-1.5, -0.7, 0.0, 0.4, 1.1, 1.9):
            val, _ = quad(lambda u: float(rq.example_f(np.array(u), alpha)),
                          -2.0, x, points=[-1.0, 0.0, 1.0], limit=200)
            assert float(rq.example_F(np.array(x), alpha)) == pytest.approx(
                val, abs=1e-10)

    def test_derivative_consistency(self):
        h = 1e-7
        for x in (-1.5, -0.5, 0.3, 1.2):
            fd = (rq.example_F(np.array(x + h), 0.5)
                  - rq.example_F(np.array(x - h), 0.5)) / (2 * h)
            assert float(rq.example_f(np.array(x), 0.5)) == pytest.approx(
                float(fd), abs=1e-6)


class TestClosedFormLambda:
    def test_affine_oracle_mode(self):
        for t, y, T in [(0.0, 0.0, 0.1), (0.05, 0.8, 0.1), (0.0, -1.2, 0.02)]:
            assert rq.example_closed_lambda(t, y, T, 0.5, terminal="affine") \
                == pytest.approx(2.0, rel=1e-12)

    def test_bounded_by_two(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            t = rng.uniform(0.0, 0.09)
            y = rng.uniform(-3, 3)
            val = rq.example_closed_lambda(t, y, 0.1, 0.5)
            assert val <= 2.0 + 1e-12

    def test_terminal_limit_is_bump(self):
        for y in (0.0, 1.0, -0.6, 1.8):
            lam = rq.example_closed_lambda(0.0, y, 1e-6, 0.5)
            assert lam == pytest.approx(float(rq.example_f(np.array(y), 0.5)),
                                        abs=1e-3)

    def test_error_monotone_in_maturity(self):
        errors = [abs(rq.example_closed_lambda(0.0, 0.0, T, 0.5) - 2.0)
                  for T in rq.default_maturity_schedule()]
        assert all(e1 >= e2 for e1, e2 in zip(errors, errors[1:]))


class TestComparePipeline:
    def test_example_detection(self, example_setup):
        market, endowment = example_setup
        assert is_example_config(market, [endowment])
        assert not is_example_config(market, [rq.QuadraticEndowment(0, [0], [[0]])])

    def test_quadratic_endowments_error_at_solver_floor(self):
        m = rq.MarketConfig(
            dim_factor=1, dim_assets=1, num_investors=2,
            risk_aversions=np.array([1.0, 2.0]),
            vol_schedule=rq.constant_schedule([[1.0]]), maturity=0.1,
        )
        gs = [rq.QuadraticEndowment(0.1, [0.4], [[0.1]]),
              rq.QuadraticEndowment(-0.1, [-0.2], [[0.05]])]
        exp = rq.compare_pipeline(
            m, gs, maturities=[0.05, 0.025, 0.0125, 0.00625],
            picard_options={"time_points": 9, "space_points": 17,
                            "hermite_nodes": 12, "time_nodes": 16},
        )
        assert np.all(exp.errors < 1e-4)
        assert math.isnan(exp.fitted_slope) or exp.fitted_slope != 0.0

    def test_example_rate(self, example_setup):
        market, endowment = example_setup
        exp = rq.compare_pipeline(market, [endowment], alpha=0.5)
        assert 0.67 <= exp.fitted_slope <= 0.83
        assert np.all(np.isfinite(exp.errors))
        assert exp.rows()[0]["t_policy"] == "at_zero"
        assert exp.rows()[-1]["slope_running"] == pytest.approx(exp.fitted_slope)
