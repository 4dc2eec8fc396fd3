import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from decohere.emission import EmissionModel, ParticleModel
from decohere.presets import AEROSOL_AREA, AEROSOL_HEAT_CAPACITY_KB, AEROSOL_MASS, double_slit

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def aerosol():
    return ParticleModel.from_kb(AEROSOL_AREA, AEROSOL_HEAT_CAPACITY_KB, AEROSOL_MASS, 2500.0)


@pytest.fixture
def aerosol_model(aerosol):
    return EmissionModel.greybody(aerosol)


@pytest.fixture
def rigid_model():
    # same particle with infinite heat capacity: constant temperature
    return EmissionModel.greybody(ParticleModel.from_kb(AEROSOL_AREA, math.inf, AEROSOL_MASS, 1500.0))


@pytest.fixture
def geometry_50nm(aerosol):
    return double_slit(aerosol, 50e-9, 3e-6)


def relerr(a, b):
    return np.max(np.abs(np.asarray(a, float) / np.asarray(b, float) - 1.0))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
