"""Shared fixtures for the wiretap workbench tests."""

import numpy as np
import pytest

from wiretap_workbench.config import get_settings
from wiretap_workbench.probability_core import (
    BINARY,
    JointPmf,
    Pmf,
    binary_symmetric_channel,
    identity_channel,
    joint_from_channel,
)


@pytest.fixture
def uniform_binary():
    return Pmf.uniform(BINARY)


@pytest.fixture
def bsc01():
    return binary_symmetric_channel(0.1)


@pytest.fixture
def bsc02_joint(uniform_binary):
    """Ber(0.5) through BSC(0.2)."""
    return joint_from_channel(uniform_binary, binary_symmetric_channel(0.2))


@pytest.fixture
def identity_joint():
    return JointPmf(BINARY, BINARY, np.diag([0.5, 0.5]))


@pytest.fixture
def independent_joint():
    return JointPmf(BINARY, BINARY, np.full((2, 2), 0.25))


@pytest.fixture
def noiseless_binary():
    return identity_channel(BINARY)


@pytest.fixture
def settings(tmp_path):
    return get_settings(out_dir=str(tmp_path / "runs"), run_log=False, log_level="WARNING")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
