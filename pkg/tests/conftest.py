import numpy as np
import pytest

from keplersym import ExtendedState, KeplerSystem, PhaseState


@pytest.fixture(scope="session")
def ksys():
    return KeplerSystem(kappa=1.0)


@pytest.fixture(scope="session")
def circ():
    return PhaseState((1, 0, 0), (0, 1.0, 0))


@pytest.fixture(scope="session")
def ell():
    return PhaseState((1, 0, 0), (0, 1.2, 0))


@pytest.fixture(scope="session")
def par():
    return PhaseState((1, 0, 0), (0, np.sqrt(2.0), 0))


@pytest.fixture(scope="session")
def hyp():
    return PhaseState((1, 0, 0), (0, 2.0, 0))


@pytest.fixture(scope="session")
def ell_x(ell):
    return ExtendedState(0.0, ell)


@pytest.fixture(scope="session")
def par_x(par):
    return ExtendedState(0.0, par)
