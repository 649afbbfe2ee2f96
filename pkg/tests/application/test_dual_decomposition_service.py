"""Tests for the dual-decomposition service."""

from dataclasses import replace

import numpy as np
import pytest

from mimo_power.application.services.centralized_service import solve_centralized
from mimo_power.application.services.dual_decomposition_service import (
    BELIEF_CURVATURE,
    ConvergenceStatus,
    DualDecompositionOptions,
    DualDecompositionService,
    StepSchedule,
    StoppingRule,
    amplitude_units,
    build_subproblem_socp,
    complexity_estimate,
    consistency_mask,
    run_dual_decomposition,
    subgradient_update,
    subproblem_variable_count,
)
from mimo_power.domain.entities.cone_program import SolveStatus
from mimo_power.domain.entities.consistency import ConsistencyState
from mimo_power.domain.entities.drop_config import DropConfig
from mimo_power.domain.errors import ConfigurationError, SolverBreakdownError, SubproblemInfeasibleError
from mimo_power.domain.system_model import compute_effective_gains, qos_to_sinr_target, reference_power
from mimo_power.infrastructure.scenario.drop_generator import drop_seeds, generate_drop


@pytest.fixture
def tight_options():
    """Default step with tolerances tight enough to pin the symmetric optimum."""
    return DualDecompositionOptions(residual_tolerance=1e-6, qos_tolerance=1e-5, max_iterations=200)


class TestSubproblemStructure:
    """Test suite for the per-BS SOCP."""

    def test_sizes(self, two_cell_scenario):
        """Test variable count, cone layout and row blocks."""
        gains = compute_effective_gains(two_cell_scenario)
        targets = qos_to_sinr_target(two_cell_scenario)
        program = build_subproblem_socp(0, two_cell_scenario, gains, targets, np.zeros((2, 1, 2)))
        L, K = 2, 2
        assert program.n == subproblem_variable_count(L, K) == 7
        assert program.dims.nonneg == (L - 1) * K
        assert program.dims.soc == (K + L + 1,) * K + (K + 2,) + (K + 2,) * ((L - 1) * K) + (K + 1,)
        assert [name for name, _ in program.row_blocks] == [
            "believed_nonneg", "qos", "epigraph", "interference", "budget",
        ]
        assert program.p == 0

    def test_inactive_users_pinned(self, scenario_factory):
        """Test believed variables of users without a target are fixed to zero."""
        scenario = scenario_factory(np.full((2, 2, 2), 0.5) + np.eye(2)[:, :, np.newaxis], M=8)
        scenario = scenario.with_qos(np.array([[0.5, 0.0], [0.5, 0.5]]))
        gains = compute_effective_gains(scenario)
        program = build_subproblem_socp(0, scenario, gains, qos_to_sinr_target(scenario), np.zeros((2, 1, 2)))
        assert program.p == 1
        assert program.dims.nonneg == 1

    def test_objective(self, symmetric_scenario, zf_gains):
        """Test the objective is s plus a small weight on the exact variables."""
        program = build_subproblem_socp(
            0, symmetric_scenario, zf_gains, qos_to_sinr_target(symmetric_scenario),
            np.zeros((2, 1, 1)), exact_weight=1e-6,
        )
        # x = [rho_tilde, theta, theta_tilde, s]
        assert program.c.tolist() == [0.0, 1e-6, 0.0, 1.0]

    def test_epigraph_cone_encodes_difference(self, symmetric_scenario, zf_gains):
        """Test the epigraph cone's outer entries square to s - y at any point."""
        rng = np.random.default_rng(5)
        lam = rng.uniform(0.0, 2.0, size=(2, 1, 1))
        program = build_subproblem_socp(
            0, symmetric_scenario, zf_gains, qos_to_sinr_target(symmetric_scenario), lam,
        )
        for _ in range(20):
            x = rng.uniform(-3.0, 3.0, size=program.n)
            rho_tilde, theta, theta_tilde, s = x
            y = lam[1, 0, 0] * theta - lam[0, 0, 0] * theta_tilde
            slack = program.slack(x)[program.block("epigraph")]
            assert slack[1] == pytest.approx(rho_tilde)
            assert abs(slack[0] ** 2 - slack[-1] ** 2 - (s - y)) <= 1e-9

    def test_amplitude_units(self, two_cell_scenario):
        """Test every active user's believed amplitude costs the same power per unit squared."""
        gains = compute_effective_gains(two_cell_scenario)
        targets = qos_to_sinr_target(two_cell_scenario)
        unit = reference_power(gains, targets, two_cell_scenario)
        amplitude_sq = amplitude_units(gains, targets, two_cell_scenario, unit)
        cost = targets.xi_hat * amplitude_sq / (gains.G * gains.own_gamma * unit)
        assert amplitude_sq.shape == (2, 2)
        assert np.allclose(cost, BELIEF_CURVATURE)

    def test_amplitude_units_without_target(self, scenario_factory):
        """Test users without a target fall back to the DL noise power."""
        scenario = scenario_factory(np.ones((2, 2, 1)), sigma_dl_sq=3.0).with_qos(np.array([[0.5], [0.0]]))
        gains = compute_effective_gains(scenario)
        amplitude_sq = amplitude_units(gains, qos_to_sinr_target(scenario), scenario)
        assert amplitude_sq[1, 0] == 3.0
        assert amplitude_sq[0, 0] > 0

    def test_invalid_inputs(self, symmetric_scenario, zf_gains):
        """Test bad BS indices, negative multipliers and zero noise are rejected."""
        targets = qos_to_sinr_target(symmetric_scenario)
        with pytest.raises(IndexError):
            build_subproblem_socp(2, symmetric_scenario, zf_gains, targets, np.zeros((2, 1, 1)))
        with pytest.raises(ConfigurationError):
            build_subproblem_socp(0, symmetric_scenario, zf_gains, targets, -np.ones((2, 1, 1)))
        with pytest.raises(ConfigurationError):
            build_subproblem_socp(0, symmetric_scenario.with_noise(0.0), zf_gains, targets, np.zeros((2, 1, 1)))


class TestSubproblemSolve:
    """Test suite for solving one BS's subproblem."""

    def test_zero_multipliers_lower_bound(self, dual_service, two_cell_scenario):
        """Test the dual value at zero multipliers lower-bounds the optimum."""
        gains = compute_effective_gains(two_cell_scenario)
        targets = qos_to_sinr_target(two_cell_scenario)
        optimum = solve_centralized(two_cell_scenario, gains, targets).total_power
        lam = np.zeros((2, 1, 2))
        dual = sum(
            dual_service.solve_subproblem(l, two_cell_scenario, gains, targets, lam).dual_value
            for l in range(2)
        )
        assert dual <= optimum + 1e-6

    def test_single_cell_matches_closed_form(self, dual_service, single_cell_scenario):
        """Test L=1 reduces to the single-user closed form."""
        gains = compute_effective_gains(single_cell_scenario)
        targets = qos_to_sinr_target(single_cell_scenario)
        xi = targets.xi_hat[0, 0]
        solution = dual_service.solve_subproblem(0, single_cell_scenario, gains, targets, np.zeros((1, 0, 1)))
        expected = xi / (10 * 0.5 - xi * 0.5)
        assert solution.rho[0] == pytest.approx(expected, rel=1e-5)
        assert solution.dual_value == pytest.approx(expected, rel=1e-5)
        assert solution.theta_out.shape == (0, 1)

    def test_dual_value_grows_with_noise(self, dual_service, two_cell_scenario):
        """Test the local dual value is nondecreasing in the DL noise."""
        gains = compute_effective_gains(two_cell_scenario)
        targets = qos_to_sinr_target(two_cell_scenario)
        unit = reference_power(gains, targets, two_cell_scenario)
        lam = np.zeros((2, 1, 2))
        low = dual_service.solve_subproblem(0, two_cell_scenario, gains, targets, lam, power_unit=unit)
        high = dual_service.solve_subproblem(
            0, two_cell_scenario.with_noise(2.0), gains, targets, lam, power_unit=unit
        )
        assert high.dual_value >= low.dual_value - 1e-9

    def test_believed_interference_zero_without_multipliers(self, dual_service, symmetric_scenario, zf_gains):
        """Test a BS believes in no interference when believing is free."""
        targets = qos_to_sinr_target(symmetric_scenario)
        solution = dual_service.solve_subproblem(0, symmetric_scenario, zf_gains, targets, np.zeros((2, 1, 1)))
        assert solution.theta_tilde_out[0, 0] == pytest.approx(0.0, abs=1e-6)
        assert solution.theta_out[0, 0] > 0

    def test_default_step_moves_belief_onto_observation(self, dual_service, symmetric_scenario, zf_gains):
        """Test one default step from zero multipliers makes the belief track the observed interference."""
        targets = qos_to_sinr_target(symmetric_scenario)
        zero = np.zeros((2, 1, 1))
        observed = dual_service.solve_subproblem(1, symmetric_scenario, zf_gains, targets, zero).theta_out[0, 0]
        lam = np.zeros((2, 1, 1))
        lam[0, 0, 0] = DualDecompositionOptions().step_size * observed
        believed = dual_service.solve_subproblem(0, symmetric_scenario, zf_gains, targets, lam)
        # intra-cell interference makes a belief slightly dearer than BELIEF_CURVATURE
        local = targets.xi_hat[0, 0] * zf_gains.z_gain[0, 0, 0] / (zf_gains.G * zf_gains.gamma[0, 0, 0])
        assert observed > 0
        assert believed.theta_tilde_out[0, 0] == pytest.approx(observed * (1.0 - local), rel=1e-3)

    def test_budget_overshoot_rounded(self, mocker, single_cell_scenario):
        """Test a point a hair over the budget is scaled back onto it."""
        gains = compute_effective_gains(single_cell_scenario)
        targets = qos_to_sinr_target(single_cell_scenario)
        unit = reference_power(gains, targets, single_cell_scenario)
        over = np.sqrt(single_cell_scenario.p_max[0] / unit) * (1 + 1e-9)
        solver = mocker.Mock()
        solver.solve.return_value = mocker.Mock(status=SolveStatus.OPTIMAL, x=np.array([over, 1.0]), iterations=4)
        solution = DualDecompositionService(solver).solve_subproblem(
            0, single_cell_scenario, gains, targets, np.zeros((1, 0, 1)), power_unit=unit,
        )
        assert solution.rho[0] == pytest.approx(single_cell_scenario.p_max[0], rel=1e-12)
        assert solution.rho[0] <= single_cell_scenario.p_max[0]

    def test_budget_overshoot_rejected(self, mocker, single_cell_scenario):
        """Test a point clearly over the budget is a solver breakdown."""
        gains = compute_effective_gains(single_cell_scenario)
        targets = qos_to_sinr_target(single_cell_scenario)
        unit = reference_power(gains, targets, single_cell_scenario)
        over = np.sqrt(single_cell_scenario.p_max[0] / unit) * 1.001
        solver = mocker.Mock()
        solver.solve.return_value = mocker.Mock(status=SolveStatus.OPTIMAL, x=np.array([over, 1.0]), iterations=4)
        with pytest.raises(SolverBreakdownError, match="budget"):
            DualDecompositionService(solver).solve_subproblem(
                0, single_cell_scenario, gains, targets, np.zeros((1, 0, 1)), power_unit=unit,
            )

    def test_local_infeasibility(self, dual_service, scenario_factory):
        """Test an unreachable local target raises with a diagnosis."""
        scenario = scenario_factory(np.ones((1, 1, 1)), qos_se=3.5, p_max=1e4)
        gains = compute_effective_gains(scenario)
        with pytest.raises(SubproblemInfeasibleError) as info:
            dual_service.solve_subproblem(0, scenario, gains, qos_to_sinr_target(scenario), np.zeros((1, 0, 1)))
        assert info.value.cell == 0
        assert "cannot reach" in info.value.diagnosis


class TestMasterUpdate:
    """Test suite for the multiplier update and helpers."""

    def test_subgradient_step(self):
        """Test lam <- max(0, lam - step (theta_tilde - theta))."""
        state = ConsistencyState(
            theta=np.array([[[1.0]], [[0.0]]]),
            theta_tilde=np.array([[[0.5]], [[2.0]]]),
            lam=np.array([[[0.2]], [[0.3]]]),
        )
        updated = subgradient_update(state, 0.1)
        assert updated.lam.ravel() == pytest.approx([0.25, 0.1])
        assert subgradient_update(state, 1.0).lam.ravel() == pytest.approx([0.7, 0.0])

    def test_nonpositive_step(self):
        """Test a nonpositive step raises ValueError."""
        with pytest.raises(ValueError):
            subgradient_update(ConsistencyState.initial(2, 1), 0.0)

    def test_consistency_mask(self, scenario_factory):
        """Test only users with a target carry consistency constraints."""
        scenario = scenario_factory(np.ones((3, 3, 2)), M=8).with_qos(np.array([[1, 0], [0, 0], [1, 1]]))
        mask = consistency_mask(qos_to_sinr_target(scenario))
        assert mask.shape == (3, 2, 2)
        assert mask[0].tolist() == [[True, False], [True, False]]
        assert not mask[1].any()

    def test_complexity(self):
        """Test the complexity estimate grows with K and rejects bad epsilon."""
        assert complexity_estimate(4, 10, 1e-3) > complexity_estimate(4, 5, 1e-3) > 0
        with pytest.raises(ValueError):
            complexity_estimate(4, 10, 1.5)

    def test_complexity_smallest_network(self):
        """Test m = 4 and delta = sqrt(8) for two cells with one user at epsilon = 1/e."""
        assert subproblem_variable_count(2, 1) == 4
        per_iteration = 2 + 12 + 4 + 12 + 3 + 5 + 16
        assert complexity_estimate(2, 1, np.exp(-1.0)) == pytest.approx(np.sqrt(8.0) * per_iteration * 4)

    def test_complexity_matches_direct_evaluation(self):
        """Test the estimate on random sizes against a term-by-term evaluation."""
        rng = np.random.default_rng(9)
        for _ in range(10):
            L, K = (int(v) for v in rng.integers(1, 12, size=2))
            epsilon = float(rng.uniform(1e-6, 0.9))
            m = K * (2 * L - 1) + 1
            terms = [L * K**3, 6 * L * K**2, K * L**2, 6 * L * K, 3 * K, 5, m**2]
            expected = np.log(1 / epsilon) * np.sqrt(2 * L * K + 4) * sum(terms) * m
            assert complexity_estimate(L, K, epsilon) == pytest.approx(expected, rel=1e-12)

    def test_step_schedule(self):
        """Test constant and diminishing steps."""
        assert DualDecompositionOptions(step_size=0.2).step_at(4) == 0.2
        assert DualDecompositionOptions(step_size=0.2, schedule="diminishing").step_at(4) == pytest.approx(0.1)

    def test_option_validation(self):
        """Test invalid options raise ConfigurationError."""
        with pytest.raises(ConfigurationError):
            DualDecompositionOptions(step_size=0.0)
        with pytest.raises(ConfigurationError):
            DualDecompositionOptions(stopping_rule=StoppingRule.BENCHMARK)
        with pytest.raises(ConfigurationError):
            DualDecompositionOptions(workers=0)


class TestRun:
    """Test suite for the full distributed algorithm."""

    def test_converges_to_centralized(self, dual_service, symmetric_scenario, zf_gains, tight_options):
        """Test the symmetric scenario converges to the LP optimum."""
        targets = qos_to_sinr_target(symmetric_scenario)
        optimum = solve_centralized(symmetric_scenario, zf_gains, targets).total_power
        result = dual_service.run(symmetric_scenario, zf_gains, targets, tight_options)
        assert result.converged
        assert result.allocation.total_power == pytest.approx(optimum, rel=1e-3)
        assert result.traces[-1].max_residual <= 1e-6
        assert len(result.traces) == result.iterations

    def test_trace_counts_exchanges(self, dual_service, symmetric_scenario, zf_gains, tight_options):
        """Test the exchanged-parameter count grows by 4K(L-1)^2 per iteration."""
        targets = qos_to_sinr_target(symmetric_scenario)
        result = dual_service.run(symmetric_scenario, zf_gains, targets, tight_options)
        counts = [trace.exchanged_params for trace in result.traces]
        assert counts[0] == 4 + 4
        assert np.all(np.diff(counts) == 4)

    def test_iteration_cap(self, dual_service, symmetric_scenario, zf_gains):
        """Test the cap returns the best iterate with ITERATION_CAP."""
        targets = qos_to_sinr_target(symmetric_scenario)
        options = DualDecompositionOptions(max_iterations=1, residual_tolerance=1e-9)
        result = dual_service.run(symmetric_scenario, zf_gains, targets, options)
        assert result.status is ConvergenceStatus.ITERATION_CAP
        assert result.iterations == 1
        assert result.best_iteration == 1

    def test_benchmark_rule(self, dual_service, symmetric_scenario, zf_gains):
        """Test stopping within 5 percent of a known optimum."""
        targets = qos_to_sinr_target(symmetric_scenario)
        optimum = solve_centralized(symmetric_scenario, zf_gains, targets).total_power
        options = DualDecompositionOptions(stopping_rule=StoppingRule.BENCHMARK, reference_total_power=optimum)
        result = dual_service.run(symmetric_scenario, zf_gains, targets, options)
        assert result.converged
        assert abs(result.allocation.total_power - optimum) <= 0.05 * optimum

    def test_single_cell_converges_immediately(self, dual_service, single_cell_scenario):
        """Test L=1 needs no consistency and stops after one iteration."""
        gains = compute_effective_gains(single_cell_scenario)
        result = dual_service.run(single_cell_scenario, gains, qos_to_sinr_target(single_cell_scenario))
        assert result.converged
        assert result.iterations == 1

    def test_no_targets(self, dual_service, scenario_factory):
        """Test zero QoS converges at once to zero power."""
        scenario = scenario_factory(np.ones((2, 2, 1)), qos_se=0.0)
        gains = compute_effective_gains(scenario)
        result = dual_service.run(scenario, gains, qos_to_sinr_target(scenario))
        assert result.converged
        assert result.allocation.total_power == 0.0

    def test_threads_give_same_result(self, symmetric_scenario, zf_gains, tight_options):
        """Test solving subproblems on threads does not change the iterates."""
        targets = qos_to_sinr_target(symmetric_scenario)
        serial = run_dual_decomposition(symmetric_scenario, zf_gains, targets, tight_options)
        threaded_options = replace(tight_options, workers=2)
        threaded = run_dual_decomposition(symmetric_scenario, zf_gains, targets, threaded_options)
        assert threaded.iterations == serial.iterations
        assert np.allclose(threaded.allocation.rho, serial.allocation.rho)

    def test_schedule_enum(self):
        """Test schedules are parsed from strings."""
        assert DualDecompositionOptions(schedule="constant").schedule is StepSchedule.CONSTANT

    def test_dual_values_bound_the_optimum(self, dual_service, two_cell_scenario):
        """Test every iteration's dual value lower-bounds the centralized optimum."""
        gains = compute_effective_gains(two_cell_scenario)
        targets = qos_to_sinr_target(two_cell_scenario)
        optimum = solve_centralized(two_cell_scenario, gains, targets).total_power
        result = dual_service.run(two_cell_scenario, gains, targets, DualDecompositionOptions(max_iterations=30))
        assert result.traces
        for trace in result.traces:
            assert trace.dual_value <= optimum * (1 + 1e-4)

    def test_default_options_converge(self, dual_service, two_cell_scenario):
        """Test the default options settle the asymmetric scenario well before the cap."""
        gains = compute_effective_gains(two_cell_scenario)
        targets = qos_to_sinr_target(two_cell_scenario)
        optimum = solve_centralized(two_cell_scenario, gains, targets).total_power
        result = dual_service.run(two_cell_scenario, gains, targets)
        assert result.converged
        assert result.iterations < 100
        assert result.allocation.total_power == pytest.approx(optimum, rel=0.02)


def _feasible_drops(cfg):
    """Yield (scenario, gains, targets, optimum) for the drops with a centralized optimum."""
    for seed in drop_seeds(cfg):
        scenario = generate_drop(cfg, seed)
        gains = compute_effective_gains(scenario, cfg.scheme)
        targets = qos_to_sinr_target(scenario)
        centralized = solve_centralized(scenario, gains, targets)
        if centralized.feasible:
            yield scenario, gains, targets, centralized.total_power


@pytest.mark.slow
class TestDefaultOptionsOnDrops:
    """Test suite for the default options over seeded two-cell drops."""

    def test_residual_settles(self):
        """Test the consistency residual drops below 1e-3 before the cap on most drops."""
        cfg = DropConfig(grid_rows=1, grid_cols=2, users_per_cell=2, num_drops=100, master_seed=2)
        feasible, settled = 0, 0
        for scenario, gains, targets, _ in _feasible_drops(cfg):
            feasible += 1
            try:
                result = run_dual_decomposition(scenario, gains, targets)
            except (SubproblemInfeasibleError, SolverBreakdownError):
                continue
            settled += any(trace.max_residual < 1e-3 for trace in result.traces)
        assert feasible >= 50
        assert settled >= 0.9 * feasible

    def test_reaches_centralized_optimum(self):
        """Test the total power gets within 1 percent of the optimum on most drops."""
        cfg = DropConfig(grid_rows=1, grid_cols=2, users_per_cell=2, num_drops=20, master_seed=1)
        feasible, reached = 0, 0
        for scenario, gains, targets, optimum in _feasible_drops(cfg):
            feasible += 1
            options = DualDecompositionOptions(
                stopping_rule=StoppingRule.BENCHMARK, reference_total_power=optimum, benchmark_gap=0.01,
            )
            try:
                result = run_dual_decomposition(scenario, gains, targets, options)
            except (SubproblemInfeasibleError, SolverBreakdownError):
                continue
            reached += result.converged
        assert feasible >= 10
        assert reached >= 0.9 * feasible
