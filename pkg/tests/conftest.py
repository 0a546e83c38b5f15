import time

import numpy as np
import pytest

import radner_eq as rq

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  [{detail}]")


@pytest.fixture(scope="session")
def example_setup():
    """Single-agent unit-volatility market with the bump endowment."""
    market = rq.single_factor_market(c=1.0, a=1.0, maturity=0.1, holder_alpha=0.5)
    endowment = rq.ExampleEndowment(alpha=0.5)
    return market, endowment


@pytest.fixture(scope="session")
def example_picard(example_setup):
    """Converged fixed point of the bump instance at default grids.

    Shared by the oracle comparison, the martingale check, and the
    clearing checks; also records the wall time for the runtime budget.
    """
    market, endowment = example_setup
    start = time.perf_counter()
    field, equilibrium = rq.picard_solve(market, [endowment], T=0.1)
    elapsed = time.perf_counter() - start
    return field, equilibrium, elapsed


@pytest.fixture(scope="session")
def quad2d_setup():
    """Two-investor incomplete (D=2, N=1) market with small quadratics."""
    market = rq.MarketConfig(
        dim_factor=2, dim_assets=1, num_investors=2,
        risk_aversions=np.array([1.0, 2.0]),
        vol_schedule=rq.constant_schedule([[1.0, 0.1], [0.0, 0.8]]),
        maturity=0.1,
    )
    endowments = [
        rq.QuadraticEndowment(0.3, [0.5, -0.3], [[0.10, 0.02], [0.02, 0.08]], g0=0.1),
        rq.QuadraticEndowment(-0.2, [-0.4, 0.2], [[-0.05, 0.01], [0.01, 0.06]], g0=-0.1),
    ]
    return market, endowments


@pytest.fixture(scope="session")
def quad2d_riccati(quad2d_setup):
    market, endowments = quad2d_setup
    path = rq.riccati_integrate(market, endowments, 0.1)
    equilibrium = rq.riccati_equilibrium(path, market, [g.g0 for g in endowments], 0.1)
    return path, equilibrium


@pytest.fixture(scope="session")
def quad2d_picard(quad2d_setup):
    """Grid solution of the quadratic instance.

    Quadratic data keeps every quadrature integrand polynomial, so modest
    node counts are exact and the run stays fast.
    """
    market, endowments = quad2d_setup
    field, equilibrium = rq.picard_solve(
        market, endowments, T=0.1, time_points=13, hermite_nodes=8, time_nodes=16,
    )
    return field, equilibrium
