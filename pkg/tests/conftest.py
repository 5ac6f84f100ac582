import pytest

from halfline_ie import (
    build_grid,
    make_gaussian_kernel,
    make_omega,
    make_power_q,
    make_quartic_kernel,
)


@pytest.fixture(scope="session")
def gaussian_kernel():
    return make_gaussian_kernel()


@pytest.fixture(scope="session")
def quartic_kernel():
    return make_quartic_kernel()


@pytest.fixture(scope="session")
def small_grid():
    """Fast grid for unit tests; acceptance tests use the catalog defaults."""
    return build_grid(8.0, 401)


@pytest.fixture(scope="session")
def power_q2():
    return make_power_q(2.0)


@pytest.fixture(scope="session")
def omega_o1():
    return make_omega("O1")


@pytest.fixture(scope="session")
def omega_o3():
    return make_omega("O3")
