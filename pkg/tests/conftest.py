import numpy as np
import pytest

from quarticbath.model import SystemParams
from quarticbath.upo import find_brake_orbit


@pytest.fixture(scope="session")
def p_cpl():
    # bistable regime, moderate coupling; the workhorse configuration
    return SystemParams(1.0, 1.0, 1.0, 0.5)


@pytest.fixture(scope="session")
def orbit_cpl_small(p_cpl):
    return find_brake_orbit(p_cpl, 0.01)


@pytest.fixture(scope="session")
def orbit_cpl_big(p_cpl):
    return find_brake_orbit(p_cpl, 0.1)


@pytest.fixture(scope="session")
def p_twosaddle():
    # inverted quartic: two index-1 saddles at x = +-1, energy 0.25 + eps part
    return SystemParams(-1.0, -1.0, 1.0, 0.4)


@pytest.fixture(scope="session")
def orbit_minus(p_twosaddle):
    return find_brake_orbit(p_twosaddle, 0.05, saddle="minus")
