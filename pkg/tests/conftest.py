import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from isacsim.scenario import reference_scenario

settings.register_profile(
    "ci", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def ref_scenario():
    return reference_scenario()


@pytest.fixture(scope="session")
def ref_waveform(ref_scenario):
    return ref_scenario.waveform


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
