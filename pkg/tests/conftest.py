import math

import numpy as np
import pytest

from wsi.comparison import CurvatureBound, closed_form_profile
from wsi.geometry import WeightedAmbient, disc


@pytest.fixture(scope="session")
def euclid():
    return WeightedAmbient.euclidean(3, "zero")


@pytest.fixture(scope="session")
def flat_profile():
    return closed_form_profile(CurvatureBound.zero(), 20.0)


@pytest.fixture(scope="session")
def unit_disc():
    return disc(1.0, 32, 64)


def paraboloid_bump(mesh, rho=1.0):
    """phi = 1 - |x|^2 / rho^2, clipped at zero, zero on the boundary."""
    phi = np.maximum(1.0 - np.sum(mesh.vertices**2, axis=1) / rho**2, 0.0)
    phi[mesh.boundary_vertices] = 0.0
    return phi


@pytest.fixture(scope="session")
def unit_disc_bump(unit_disc):
    return paraboloid_bump(unit_disc)


# closed-form values for phi = 1 - |x|^2 on the unit disc at kappa = 2/3
S0_M2 = 4.0 * 3.0**1.5 / math.sqrt(math.pi)


_ACCEPTANCE_LOG: list[str] = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LOG


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LOG, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
