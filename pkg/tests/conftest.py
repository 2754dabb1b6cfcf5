import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dualshear.system import DualizableSystem

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def sys64():
    return DualizableSystem.build(64)


@pytest.fixture(scope="session")
def sys128():
    return DualizableSystem.build(128)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
