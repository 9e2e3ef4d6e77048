import pytest

from shadow_merton.free_boundary import solve_free_boundary
from shadow_merton.model import Endowment, ModelParams
from shadow_merton.value import solve_w

# reference market: mu = 0.08, sigma = 0.4, delta = 0.1 (theta = 1/2, rho = 5/8)
REF = dict(mu=0.08, sigma=0.4, delta=0.1)


@pytest.fixture(scope="session")
def ref_params():
    return ModelParams(lam=0.01, **REF)


@pytest.fixture(scope="session")
def ref_solution(ref_params):
    return solve_free_boundary(ref_params)


@pytest.fixture(scope="session")
def ref_value(ref_solution):
    return solve_w(ref_solution)


@pytest.fixture(scope="session")
def merton_endowment(ref_params):
    return Endowment.on_merton_line(ref_params)
