import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kwtorus.lattice import AdjointForm, TangentPair, TorusGrid, random_configuration

settings.register_profile(
    "kw", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("kw")


def random_form(grid, degree, rng, complex_=False, scale=1.0):
    shape = (grid.ncomp(degree), *grid.shape, 3)
    data = rng.standard_normal(shape)
    if complex_:
        data = data + 1j * rng.standard_normal(shape)
    return AdjointForm(grid, degree, scale * data)


def random_tangent(grid, rng, scale=1.0):
    return TangentPair(random_form(grid, 1, rng, scale=scale), random_form(grid, 1, rng, scale=scale))


def five_point(f, eps):
    """Central 5-point derivative at 0; exact for polynomials of degree <= 4."""
    return (8 * (f(eps) - f(-eps)) - (f(2 * eps) - f(-2 * eps))) / (12 * eps)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def grid4():
    return TorusGrid(4, 8)


@pytest.fixture(scope="session")
def grid3():
    return TorusGrid(3, 8)


@pytest.fixture(scope="session")
def cfg4(grid4):
    return random_configuration(grid4, seed=7, amplitude=0.5)


@pytest.fixture(scope="session")
def cfg3(grid3):
    return random_configuration(grid3, seed=7, amplitude=0.5)


# one PASS/FAIL line per acceptance criterion, shown at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
