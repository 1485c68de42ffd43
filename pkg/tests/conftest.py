import os

import pytest
from hypothesis import HealthCheck, settings

from src.eigen import compute_lambda1
from src.models.fucik_models import Domain, Exponent, MinimaxConfig
from src.oracle_utils import OracleUtils

settings.register_profile("default", max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

# s-grid of the oracle spectrum, wide enough for |a - b| up to 100
ORACLE_S_GRID = [0.0, 1.0, 2.5, 5.0, 10.0, 15.0, 25.0, 40.0, 60.0, 80.0, 100.0]


@pytest.fixture(scope="session")
def oracle() -> OracleUtils:
    return OracleUtils()


@pytest.fixture(scope="session")
def p2() -> Exponent:
    return Exponent.of(2.0)


@pytest.fixture(scope="session")
def domain50() -> Domain:
    return Domain(n_interior=50)


@pytest.fixture(scope="session")
def domain200() -> Domain:
    return Domain(n_interior=200)


@pytest.fixture(scope="session")
def eig50(domain50, p2):
    return compute_lambda1(domain50, p2)


@pytest.fixture(scope="session")
def eig200(domain200, p2):
    return compute_lambda1(domain200, p2)


@pytest.fixture(scope="session")
def small_minimax() -> MinimaxConfig:
    return MinimaxConfig(beads=21, grad_tol=1e-6)


@pytest.fixture(scope="session")
def oracle_spectrum(oracle):
    return oracle.spectrum_data(2.0, ORACLE_S_GRID)
