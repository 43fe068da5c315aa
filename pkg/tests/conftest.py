"""Shared fixtures: one physical operating point used throughout.

The reference cavity has a weakly transmitting input mirror
(kappa1 = 0.0011), a strong output mirror (kappa2 = 0.8264) and pump
gain chi = 0.0414; controllers are synthesized at attenuation level
gamma = 0.05 with unit uncertainty scaling.  Synthesis results are
session-scoped because many tests reuse them.
"""

import pytest

from qsyn import Decomposition, OpoParams, build_plant, synthesize, synthesize_nominal

GAMMA = 0.05
EPSILON = 1.0


@pytest.fixture(scope="session")
def cavity_params():
    return OpoParams(kappa1=0.0011, kappa2=0.8264, chi=0.0414)


@pytest.fixture(scope="session")
def passive_plant(cavity_params):
    return build_plant(cavity_params, Decomposition.PASSIVE)


@pytest.fixture(scope="session")
def active_plant(cavity_params):
    return build_plant(cavity_params, Decomposition.ACTIVE)


@pytest.fixture(scope="session")
def nominal_plant(cavity_params):
    return build_plant(cavity_params, Decomposition.NOMINAL)


@pytest.fixture(scope="session")
def passive_controller(passive_plant):
    return synthesize(passive_plant, GAMMA, EPSILON)


@pytest.fixture(scope="session")
def active_controller(active_plant):
    return synthesize(active_plant, GAMMA, EPSILON)


@pytest.fixture(scope="session")
def nominal_controller(nominal_plant):
    return synthesize_nominal(nominal_plant, GAMMA)
