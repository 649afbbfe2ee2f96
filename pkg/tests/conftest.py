"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from mimo_power.application.services.centralized_service import CentralizedPowerControlService
from mimo_power.application.services.dual_decomposition_service import DualDecompositionService
from mimo_power.domain.entities.drop_config import DropConfig
from mimo_power.domain.entities.scenario import NetworkScenario, PrecodingScheme, ScenarioConfig
from mimo_power.domain.system_model import compute_effective_gains
from mimo_power.infrastructure.conic.interior_point import InteriorPointSolver


def make_scenario(beta, M=11, tau_c=200, pilot_power=1.0, sigma_ul_sq=1.0, sigma_dl_sq=1.0,
                  p_max=100.0, qos_se=0.5) -> NetworkScenario:
    """Scenario with uniform pilot powers, budgets and QoS targets."""
    beta = np.asarray(beta, dtype=float)
    L, _, K = beta.shape
    return NetworkScenario(
        config=ScenarioConfig(L=L, K=K, M=M, tau_c=tau_c),
        beta=beta,
        pilot_power=np.full((L, K), pilot_power),
        sigma_ul_sq=sigma_ul_sq,
        sigma_dl_sq=sigma_dl_sq,
        p_max=np.full(L, p_max),
        qos_se=np.full((L, K), qos_se),
    )


@pytest.fixture
def single_cell_scenario():
    """L=1, K=1 with unit fading and noise; gamma = 0.5."""
    return make_scenario(np.ones((1, 1, 1)), M=11)


@pytest.fixture
def symmetric_scenario():
    """L=2, K=1 symmetric scenario whose SINR target is exactly 1."""
    beta = np.array([[[1.0], [0.1]], [[0.1], [1.0]]])
    return make_scenario(beta, M=11, sigma_ul_sq=0.1, sigma_dl_sq=1.0, p_max=10.0, qos_se=0.995)


@pytest.fixture
def two_cell_scenario():
    """L=2, K=2 asymmetric scenario with moderate coupling."""
    beta = np.array([
        [[1.0, 0.8], [0.05, 0.12]],
        [[0.07, 0.03], [0.9, 1.2]],
    ])
    return make_scenario(beta, M=16, sigma_ul_sq=0.2, sigma_dl_sq=1.0, p_max=20.0, qos_se=1.0)


@pytest.fixture
def zf_gains(symmetric_scenario):
    """ZF gains of the symmetric scenario."""
    return compute_effective_gains(symmetric_scenario, PrecodingScheme.ZF)


@pytest.fixture
def small_drop_config():
    """Two-cell desk configuration with few users and drops."""
    return DropConfig(grid_rows=1, grid_cols=2, users_per_cell=2, antennas=32, num_drops=3,
                      master_seed=7, validation_antennas=16, validation_draws=200)


@pytest.fixture
def solver():
    """Interior-point solver with default settings."""
    return InteriorPointSolver()


@pytest.fixture
def centralized_service(solver):
    """Centralized power control service."""
    return CentralizedPowerControlService(solver)


@pytest.fixture
def dual_service(solver):
    """Dual decomposition service."""
    return DualDecompositionService(solver)


@pytest.fixture
def scenario_factory():
    """Builder of uniform scenarios from a beta tensor."""
    return make_scenario
