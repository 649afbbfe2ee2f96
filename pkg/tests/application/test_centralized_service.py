"""Tests for the centralized power control service."""

from dataclasses import replace

import numpy as np
import pytest
from scipy.optimize import linprog

from mimo_power.application.services.centralized_service import (
    CentralizedPowerControlService,
    build_centralized_lp,
    solve_centralized,
)
from mimo_power.domain.entities.cone_program import SolveStatus
from mimo_power.domain.entities.drop_config import DropConfig
from mimo_power.domain.entities.scenario import PrecodingScheme
from mimo_power.domain.system_model import compute_effective_gains, qos_to_sinr_target, sinr_matrix
from mimo_power.infrastructure.scenario.drop_generator import drop_seed, generate_drop


def _symmetric_optimum(scenario, gains, xi):
    """Closed-form optimum of the symmetric two-cell, one-user problem."""
    own_gamma, cross_gamma = gains.gamma[0, 0, 0], gains.gamma[1, 0, 0]
    own_z, cross_z = gains.z_gain[0, 0, 0], gains.z_gain[1, 0, 0]
    a = gains.G * own_gamma - xi * own_z
    b = xi * (gains.G * cross_gamma + cross_z)
    return np.linalg.solve([[a, -b], [-b, a]], xi * scenario.sigma_dl_sq * np.ones(2))


class TestCentralizedProgram:
    """Test suite for the LP construction."""

    def test_layout(self, two_cell_scenario):
        """Test row blocks, cone size and the objective."""
        gains = compute_effective_gains(two_cell_scenario)
        program = build_centralized_lp(two_cell_scenario, gains, qos_to_sinr_target(two_cell_scenario))
        assert program.n == 4
        assert program.block("sinr") == slice(0, 4)
        assert program.block("budget") == slice(4, 6)
        assert program.block("nonneg") == slice(6, 10)
        assert program.dims.nonneg == 10
        assert program.dims.is_orthant_only
        assert np.all(program.c == 1.0)

    def test_sinr_row_reproduces_constraint(self, two_cell_scenario):
        """Test a SINR row is the target constraint divided by the desired gain."""
        scenario = two_cell_scenario
        gains = compute_effective_gains(scenario)
        targets = qos_to_sinr_target(scenario)
        program = build_centralized_lp(scenario, gains, targets, power_unit=1.0)
        rho = np.random.default_rng(0).uniform(0.1, 2.0, size=(2, 2))
        slack = program.slack(rho.ravel())[program.block("sinr")]
        sinr = sinr_matrix(rho, gains, scenario)
        # slack_lk = (G gamma rho_lk - xi * denominator) / (G gamma)
        desired = gains.G * gains.own_gamma
        denominator = desired * rho / sinr
        expected = (desired * rho - targets.xi_hat * denominator) / desired
        assert np.allclose(slack, expected.ravel())


class TestCentralizedSolve:
    """Test suite for solving the centralized LP."""

    def test_symmetric_closed_form(self, centralized_service, symmetric_scenario, zf_gains):
        """Test the symmetric two-cell optimum (both constraints tight)."""
        targets = qos_to_sinr_target(symmetric_scenario)
        assert targets.xi_hat[0, 0] == pytest.approx(1.0)
        solution = centralized_service.solve(symmetric_scenario, zf_gains, targets)
        expected = _symmetric_optimum(symmetric_scenario, zf_gains, 1.0)
        assert solution.feasible
        assert np.allclose(solution.allocation.rho.ravel(), expected, rtol=1e-6)
        assert solution.allocation.rho[0, 0] == pytest.approx(0.12513, abs=1e-5)

    def test_single_cell_closed_form(self, centralized_service, single_cell_scenario):
        """Test rho* = xi sigma^2 / (G gamma - xi (beta - gamma)) for one user."""
        gains = compute_effective_gains(single_cell_scenario, PrecodingScheme.ZF)
        targets = qos_to_sinr_target(single_cell_scenario)
        xi = targets.xi_hat[0, 0]
        expected = xi / (10 * 0.5 - xi * 0.5)
        solution = centralized_service.solve(single_cell_scenario, gains, targets)
        assert solution.total_power == pytest.approx(expected, rel=1e-6)

    @pytest.mark.parametrize("scheme", [PrecodingScheme.MR, PrecodingScheme.ZF])
    def test_matches_linprog(self, centralized_service, two_cell_scenario, scheme):
        """Test the optimum against scipy's HiGHS solver on the same LP."""
        gains = compute_effective_gains(two_cell_scenario, scheme)
        targets = qos_to_sinr_target(two_cell_scenario)
        solution = centralized_service.solve(two_cell_scenario, gains, targets)
        program = centralized_service.build_program(two_cell_scenario, gains, targets, solution.power_unit)
        reference = linprog(program.c, A_ub=program.G, b_ub=program.h, bounds=[(None, None)] * program.n,
                            method="highs")
        assert reference.status == 0
        assert solution.total_power == pytest.approx(reference.fun * solution.power_unit, rel=1e-6)

    def test_targets_met_and_budgets_respected(self, centralized_service, two_cell_scenario):
        """Test every active SINR target is met within tolerance."""
        gains = compute_effective_gains(two_cell_scenario)
        targets = qos_to_sinr_target(two_cell_scenario)
        solution = centralized_service.solve(two_cell_scenario, gains, targets)
        sinr = sinr_matrix(solution.allocation, gains, two_cell_scenario)
        assert np.all(sinr >= targets.xi_hat * (1 - 1e-6))
        assert np.all(solution.allocation.per_bs_power <= two_cell_scenario.p_max * (1 + 1e-6))

    def test_fixed_point_agrees(self, centralized_service, two_cell_scenario):
        """Test the interference fixed point reaches the LP optimum when budgets are slack."""
        gains = compute_effective_gains(two_cell_scenario)
        targets = qos_to_sinr_target(two_cell_scenario)
        solution = centralized_service.solve(two_cell_scenario, gains, targets)
        fixed_point = centralized_service.solve_fixed_point(two_cell_scenario, gains, targets)
        assert fixed_point.converged
        assert np.allclose(fixed_point.allocation.rho, solution.allocation.rho, rtol=1e-6)

    def test_noise_scaling(self, centralized_service, two_cell_scenario):
        """Test scaling the DL noise and budgets scales the optimal powers."""
        scaled = replace(two_cell_scenario, sigma_dl_sq=4.0, p_max=two_cell_scenario.p_max * 4.0)
        gains = compute_effective_gains(two_cell_scenario)
        targets = qos_to_sinr_target(two_cell_scenario)
        base = centralized_service.solve(two_cell_scenario, gains, targets)
        larger = centralized_service.solve(scaled, gains, targets)
        assert larger.total_power == pytest.approx(4.0 * base.total_power, rel=1e-6)

    def test_unreachable_sinr_is_infeasible(self, centralized_service, scenario_factory):
        """Test a target above G gamma / z is infeasible at any power."""
        scenario = scenario_factory(np.ones((1, 1, 1)), qos_se=3.5, p_max=1e4)
        gains = compute_effective_gains(scenario)
        targets = qos_to_sinr_target(scenario)
        assert targets.xi_hat[0, 0] > 10.0
        solution = centralized_service.solve(scenario, gains, targets)
        assert solution.status is SolveStatus.INFEASIBLE
        assert solution.allocation is None
        assert np.isnan(solution.total_power)

    def test_budget_infeasible(self, centralized_service, scenario_factory):
        """Test a reachable target that needs more than the budget."""
        scenario = scenario_factory(np.ones((1, 1, 1)), qos_se=0.5, p_max=0.01)
        gains = compute_effective_gains(scenario)
        solution = centralized_service.solve(scenario, gains, qos_to_sinr_target(scenario))
        assert not solution.feasible

    def test_no_targets(self, centralized_service, scenario_factory):
        """Test zero QoS gives the zero allocation without solving."""
        scenario = scenario_factory(np.ones((2, 2, 1)), qos_se=0.0)
        gains = compute_effective_gains(scenario)
        solution = centralized_service.solve(scenario, gains, qos_to_sinr_target(scenario))
        assert solution.feasible
        assert solution.total_power == 0.0
        assert solution.result is None

    def test_basic_distributed_matches(self, centralized_service, two_cell_scenario):
        """Test every BS solving the full LP reproduces the centralized powers."""
        gains = compute_effective_gains(two_cell_scenario)
        targets = qos_to_sinr_target(two_cell_scenario)
        central = centralized_service.solve(two_cell_scenario, gains, targets)
        basic = centralized_service.solve_basic_distributed(two_cell_scenario, gains, targets)
        assert np.allclose(basic.allocation.rho, central.allocation.rho)

    def test_module_function(self, two_cell_scenario):
        """Test the functional entry point with the default solver."""
        gains = compute_effective_gains(two_cell_scenario)
        assert solve_centralized(two_cell_scenario, gains, qos_to_sinr_target(two_cell_scenario)).feasible

    def test_custom_solver_is_used(self, mocker, two_cell_scenario):
        """Test the injected solver receives the LP."""
        solver = mocker.Mock()
        solver.solve.return_value = mocker.Mock(status=SolveStatus.INFEASIBLE)
        service = CentralizedPowerControlService(solver)
        gains = compute_effective_gains(two_cell_scenario)
        solution = service.solve(two_cell_scenario, gains, qos_to_sinr_target(two_cell_scenario))
        solver.solve.assert_called_once()
        assert solution.status is SolveStatus.INFEASIBLE

    def test_status_flips_once_as_targets_grow(self, centralized_service, symmetric_scenario, zf_gains):
        """Test raising every SINR target turns the verdict from optimal to infeasible exactly once."""
        base = qos_to_sinr_target(symmetric_scenario)
        feasible = [
            centralized_service.solve(symmetric_scenario, zf_gains, base.scaled(factor)).feasible
            for factor in np.geomspace(0.25, 64.0, 9)
        ]
        assert feasible[0] and not feasible[-1]
        flips = sum(a != b for a, b in zip(feasible, feasible[1:]))
        assert flips == 1


class TestDefaultDrops:
    """Test suite for drops drawn with the default network settings."""

    def test_most_drops_feasible(self, centralized_service):
        """Test the default QoS is achievable in most default drops."""
        cfg = DropConfig(num_drops=10, master_seed=1)
        feasible = 0
        for index in range(cfg.num_drops):
            scenario = generate_drop(cfg, drop_seed(cfg, index))
            gains = compute_effective_gains(scenario, cfg.scheme)
            feasible += centralized_service.solve(scenario, gains, qos_to_sinr_target(scenario)).feasible
        assert feasible >= 6


@pytest.mark.slow
class TestFixedPointOracle:
    """Test suite for the LP against the interference fixed point on random drops."""

    @pytest.mark.parametrize("seed", range(50))
    def test_random_two_cell_drops(self, centralized_service, scenario_factory, seed):
        """Test per-user powers agree when no budget is active."""
        rng = np.random.default_rng(seed)
        beta = rng.uniform(0.01, 0.1, size=(2, 2, 2))
        beta[[0, 1], [0, 1], :] = rng.uniform(0.5, 1.5, size=(2, 2))
        scenario = scenario_factory(beta, M=16, sigma_ul_sq=0.2, p_max=100.0, qos_se=1.0)
        gains = compute_effective_gains(scenario)
        targets = qos_to_sinr_target(scenario)
        solution = centralized_service.solve(scenario, gains, targets)
        fixed_point = centralized_service.solve_fixed_point(scenario, gains, targets)
        assert fixed_point.converged
        assert np.all(solution.allocation.per_bs_power < scenario.p_max)
        assert np.allclose(solution.allocation.rho, fixed_point.allocation.rho, rtol=1e-6)
