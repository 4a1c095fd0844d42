import numpy as np
import pytest

from rofso_alloc.capacity import SystemParams
from rofso_alloc.channel import ChannelParams, default_wavelengths

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sys_params():
    return SystemParams()


@pytest.fixture
def fog_channel():
    return ChannelParams(wavelengths=default_wavelengths(8), alpha=0.012)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
