"""Shared fixtures: canonical formation constants and cached scenario runs."""

import numpy as np
import pytest

from flockadapt.cli import bundled_scenario_path
from flockadapt.dynamics import AgentParams
from flockadapt.engine import run_scenario
from flockadapt.scenario_io import load_scenario
from flockadapt.topology import DesiredCopies, build_chain_topology

# canonical desired shifts of the 4-agent chain
D1 = 2.0 * np.pi / 3.0
D2 = 9.0 * np.pi / 13.0
D3 = 18.0 * np.pi / 29.0
CANONICAL_SHIFTS = np.array([D1, D2, D3])

# balanced coupling argument after losing the middle agent 3:
# survivors' stale targets sum to D2 - D3, so each of the 3 residuals
# settles at (D3 - D2) / 3
DELTA_CANONICAL = (D3 - D2) / 3.0


@pytest.fixture(scope="session")
def default_params():
    return AgentParams.default()


@pytest.fixture(scope="session")
def chain4():
    return build_chain_topology([1, 2, 3, 4])


@pytest.fixture(scope="session")
def copies4():
    return DesiredCopies.from_pattern(CANONICAL_SHIFTS)


def _run_bundled(name):
    scenario = load_scenario(bundled_scenario_path(name))
    return scenario, run_scenario(scenario)


@pytest.fixture(scope="session")
def canonical_run():
    return _run_bundled("canonical_4uav")


@pytest.fixture(scope="session")
def loss_noadapt_run():
    return _run_bundled("canonical_loss3_noadapt")


@pytest.fixture(scope="session")
def loss_adapt_run():
    return _run_bundled("canonical_loss3_adapt")


@pytest.fixture(scope="session")
def endloss_run():
    return _run_bundled("endloss_benign")


@pytest.fixture(scope="session")
def vehicle_run():
    return _run_bundled("vehicle_4uav")
