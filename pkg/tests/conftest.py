import pytest

from czpulse import operating_map, presets


@pytest.fixture(scope="session")
def fig2_spec6():
    return presets.standard_circuit(6)


@pytest.fixture(scope="session")
def fig2_spec5():
    return presets.standard_circuit(5)


@pytest.fixture(scope="session")
def omap6(fig2_spec6):
    return operating_map(fig2_spec6, presets.FIG2_IDLE)


@pytest.fixture(scope="session")
def omap5(fig2_spec5):
    return operating_map(fig2_spec5, presets.FIG2_IDLE)
