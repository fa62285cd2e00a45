import pytest

from rarewave import GasParams, WaveProfile
from rarewave.rarefaction import FarFieldSetup


@pytest.fixture(scope="session")
def gas():
    return GasParams()


@pytest.fixture(scope="session")
def setup(gas):
    return FarFieldSetup.build(1.0, 2.0, 1.0, gas)


@pytest.fixture(scope="session")
def prof(gas):
    return WaveProfile.from_params(gas)
