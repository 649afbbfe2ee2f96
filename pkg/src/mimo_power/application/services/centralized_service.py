"""Centralized power minimization as a linear program."""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from mimo_power.domain.entities.cone_program import ConeDims, ConeProgram, SolveResult, SolveStatus
from mimo_power.domain.entities.scenario import (
    EffectiveGains,
    NetworkScenario,
    PowerAllocation,
    SinrTargets,
)
from mimo_power.domain.interfaces.cone_solver import ConeSolver
from mimo_power.domain.system_model import (
    reference_power,
    regrouped_denominator,
    sinr_matrix,
    sinr_terms,
)
from mimo_power.infrastructure.conic.interior_point import InteriorPointSolver

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CentralizedSolution:
    """Result of a centralized (or basic distributed) solve."""

    status: SolveStatus
    """Solver status; INFEASIBLE means the QoS targets are unachievable."""

    allocation: Optional[PowerAllocation]
    """Optimal powers, None unless status is OPTIMAL."""

    power_unit: float
    """Watts per LP variable unit."""

    result: Optional[SolveResult] = None
    """Raw solver output."""

    @property
    def feasible(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    @property
    def total_power(self) -> float:
        """Optimal total power in watts, NaN when not optimal."""
        return self.allocation.total_power if self.allocation is not None else float("nan")


@dataclass(frozen=True)
class FixedPointSolution:
    """Result of the standard interference fixed-point iteration."""

    allocation: PowerAllocation
    iterations: int
    converged: bool


class CentralizedPowerControlService:
    """Builds and solves the centralized LP and its oracles."""

    def __init__(self, solver: Optional[ConeSolver] = None):
        """Initialize the service.

        Args:
            solver: Cone solver used for the LP; defaults to the interior-point solver
        """
        self.solver = solver or InteriorPointSolver()

    def build_program(
        self,
        scenario: NetworkScenario,
        gains: EffectiveGains,
        targets: SinrTargets,
        power_unit: Optional[float] = None,
    ) -> ConeProgram:
        """Build the LP in the variables x = rho / power_unit.

        Each SINR constraint ``G gamma rho_lk >= xi_hat (interference + noise)``
        is divided by its desired-signal gain ``G gamma_lk^l``, giving

            x_lk - (xi_hat / (G gamma)) * interference(x) >= xi_hat sigma^2 / (G gamma unit)

        Rows are ordered: K*L SINR rows, L budget rows, K*L nonnegativity rows.
        Variable (l, k) has index l*K + k.

        Args:
            scenario: Network scenario
            gains: Effective gains of the precoding scheme
            targets: Linear SINR targets
            power_unit: Watts per variable unit; defaults to the reference power

        Returns:
            ConeProgram with an orthant-only cone
        """
        L, K = scenario.L, scenario.K
        unit = power_unit or reference_power(gains, targets, scenario)
        G = gains.G
        n = L * K

        # the denominator is affine in the powers; column j is its response to unit power on user j
        noise = scenario.sigma_dl_sq
        interference = np.column_stack([
            (regrouped_denominator(basis.reshape(L, K), gains, scenario) - noise).ravel()
            for basis in np.eye(n)
        ])
        weight = (targets.xi_hat / (G * gains.own_gamma)).ravel()
        sinr_rows = np.eye(n) - weight[:, np.newaxis] * interference
        sinr_rhs = weight * noise / unit

        budget_rows = np.kron(np.eye(L), np.ones((1, K)))
        budget_rhs = scenario.p_max / unit

        G_matrix = np.vstack([-sinr_rows, budget_rows, -np.eye(n)])
        h = np.concatenate([-sinr_rhs, budget_rhs, np.zeros(n)])
        return ConeProgram(
            c=np.ones(n),
            G=G_matrix,
            h=h,
            dims=ConeDims(nonneg=2 * n + L),
            row_blocks=(("sinr", n), ("budget", L), ("nonneg", n)),
        )

    def solve(
        self,
        scenario: NetworkScenario,
        gains: EffectiveGains,
        targets: SinrTargets,
        power_unit: Optional[float] = None,
    ) -> CentralizedSolution:
        """Solve the centralized LP.

        Args:
            scenario: Network scenario
            gains: Effective gains of the precoding scheme
            targets: Linear SINR targets
            power_unit: Watts per variable unit; defaults to the reference power

        Returns:
            CentralizedSolution; infeasibility is a status, not an error
        """
        L, K = scenario.L, scenario.K
        unit = power_unit or reference_power(gains, targets, scenario)
        if not np.any(targets.active):
            logger.info("No active QoS targets, all powers are zero")
            return CentralizedSolution(SolveStatus.OPTIMAL, PowerAllocation.zeros(L, K), unit)

        program = self.build_program(scenario, gains, targets, unit)
        result = self.solver.solve(program)
        if result.status is not SolveStatus.OPTIMAL:
            logger.info("Centralized LP finished with status %s", result.status.value)
            return CentralizedSolution(result.status, None, unit, result)

        rho = np.maximum(result.x, 0.0).reshape(L, K) * unit
        allocation = PowerAllocation(rho)
        self._replay(allocation, scenario, gains, targets)
        return CentralizedSolution(SolveStatus.OPTIMAL, allocation, unit, result)

    @staticmethod
    def _replay(
        allocation: PowerAllocation,
        scenario: NetworkScenario,
        gains: EffectiveGains,
        targets: SinrTargets,
    ) -> None:
        active = targets.active
        sinr = sinr_matrix(allocation, gains, scenario)
        slack = sinr[active] / targets.xi_hat[active] - 1.0
        if slack.size and slack.min() < -1e-6:
            logger.warning("Centralized solution violates a SINR target by %.2e", -slack.min())
        excess = allocation.per_bs_power - scenario.p_max
        if excess.max() > 1e-6 * scenario.p_max.max():
            logger.warning("Centralized solution exceeds a power budget by %.2e W", excess.max())

    def solve_basic_distributed(
        self,
        scenario: NetworkScenario,
        gains: EffectiveGains,
        targets: SinrTargets,
    ) -> CentralizedSolution:
        """Every BS solves the full LP locally and keeps its own powers.

        All BSs hold the same gathered parameters, so their local optima
        agree; disagreement beyond solver tolerance is logged.
        """
        L, K = scenario.L, scenario.K
        local: List[CentralizedSolution] = []
        for l in range(L):
            solution = self.solve(scenario, gains, targets)
            if not solution.feasible:
                logger.info("BS %d found the problem %s", l, solution.status.value)
                return solution
            local.append(solution)

        rho = np.vstack([local[l].allocation.rho[l] for l in range(L)]).reshape(L, K)
        spread = max(
            float(np.max(np.abs(solution.allocation.rho - rho))) for solution in local
        )
        if spread > 1e-6 * max(rho.max(), 1e-300):
            logger.warning("Local solutions disagree by %.2e W", spread)
        return CentralizedSolution(SolveStatus.OPTIMAL, PowerAllocation(rho), local[0].power_unit)

    @staticmethod
    def solve_fixed_point(
        scenario: NetworkScenario,
        gains: EffectiveGains,
        targets: SinrTargets,
        tolerance: float = 1e-13,
        max_iterations: int = 100_000,
    ) -> FixedPointSolution:
        """Standard interference fixed point ``rho <- xi_hat (I(rho) + sigma^2) / (G gamma)``.

        Ignores the power budgets; it converges to the LP optimum whenever
        the targets are feasible and no budget is active.
        """
        L, K = scenario.L, scenario.K
        desired_gain = gains.G * gains.own_gamma
        rho = np.zeros((L, K))
        blow_up = 1e6 * float(scenario.p_max.max())
        for iteration in range(1, max_iterations + 1):
            terms = sinr_terms(rho, gains, scenario)
            updated = targets.xi_hat * (terms.coherent + terms.noncoherent + terms.noise) / desired_gain
            change = np.max(np.abs(updated - rho) / np.maximum(updated, 1e-300))
            rho = updated
            if change <= tolerance:
                return FixedPointSolution(PowerAllocation(rho), iteration, True)
            if rho.max() > blow_up:
                logger.info("Fixed-point iteration diverged after %d iterations", iteration)
                break
        return FixedPointSolution(PowerAllocation(rho), iteration, False)


def build_centralized_lp(
    scenario: NetworkScenario,
    gains: EffectiveGains,
    targets: SinrTargets,
    power_unit: Optional[float] = None,
) -> ConeProgram:
    """Build the centralized LP; see :meth:`CentralizedPowerControlService.build_program`."""
    return CentralizedPowerControlService().build_program(scenario, gains, targets, power_unit)


def solve_centralized(
    scenario: NetworkScenario,
    gains: EffectiveGains,
    targets: SinrTargets,
    solver: Optional[ConeSolver] = None,
) -> CentralizedSolution:
    """Solve the centralized LP with the default or a given solver."""
    return CentralizedPowerControlService(solver).solve(scenario, gains, targets)
