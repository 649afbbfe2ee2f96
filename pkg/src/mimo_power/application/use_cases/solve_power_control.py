"""Use case for solving the power minimization problem of one scenario."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from mimo_power.application.services.centralized_service import CentralizedPowerControlService
from mimo_power.application.services.dual_decomposition_service import (
    DualDecompositionOptions,
    DualDecompositionService,
)
from mimo_power.application.services.signaling_service import count_signaling
from mimo_power.domain.entities.consistency import IterationTrace
from mimo_power.domain.entities.scenario import NetworkScenario, PowerAllocation, PrecodingScheme
from mimo_power.domain.entities.signaling import SignalingLedger, Strategy
from mimo_power.domain.system_model import (
    compute_effective_gains,
    qos_to_sinr_target,
    se_from_sinr,
    sinr_matrix,
)
from mimo_power.infrastructure.scenario.scenario_io import write_allocation_csv, write_trace_csv

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solve."""

    strategy: Strategy
    status: str
    """Solver status (centralized, basic) or convergence status (dual)."""
    allocation: Optional[PowerAllocation]
    sinr: Optional[np.ndarray]
    se: Optional[np.ndarray]
    ledger: SignalingLedger
    traces: List[IterationTrace] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.allocation is not None

    @property
    def total_power(self) -> float:
        return self.allocation.total_power if self.allocation is not None else float("nan")


class SolvePowerControlUseCase:
    """Use case for solving a scenario with one implementation strategy."""

    def __init__(
        self,
        centralized_service: CentralizedPowerControlService,
        dual_service: DualDecompositionService,
    ):
        """Initialize the use case.

        Args:
            centralized_service: Service solving the centralized LP
            dual_service: Service running the distributed algorithm
        """
        self.centralized_service = centralized_service
        self.dual_service = dual_service

    def execute(
        self,
        scenario: NetworkScenario,
        strategy: Strategy,
        scheme: PrecodingScheme = PrecodingScheme.ZF,
        options: Optional[DualDecompositionOptions] = None,
        allocation_csv: Optional[Path] = None,
        trace_csv: Optional[Path] = None,
    ) -> SolveReport:
        """Execute the use case.

        Args:
            scenario: Network scenario
            strategy: centralized, basic or dual
            scheme: Precoding scheme
            options: Dual decomposition options (dual strategy only)
            allocation_csv: If given, the allocation is exported there
            trace_csv: If given, the dual decomposition trace is exported there

        Returns:
            SolveReport; an infeasible problem yields an empty allocation
        """
        strategy = Strategy(strategy)
        gains = compute_effective_gains(scenario, scheme)
        targets = qos_to_sinr_target(scenario)
        traces: List[IterationTrace] = []
        iterations = 1

        if strategy is Strategy.DUAL_DECOMPOSITION:
            result = self.dual_service.run(scenario, gains, targets, options)
            allocation: Optional[PowerAllocation] = result.allocation
            status = result.status.value
            traces = result.traces
            iterations = result.iterations
            if trace_csv is not None:
                write_trace_csv(trace_csv, traces)
        else:
            if strategy is Strategy.CENTRALIZED:
                solution = self.centralized_service.solve(scenario, gains, targets)
            else:
                solution = self.centralized_service.solve_basic_distributed(scenario, gains, targets)
            allocation = solution.allocation
            status = solution.status.value

        ledger = count_signaling(strategy, scenario.L, scenario.K, iterations)
        if allocation is None:
            logger.info("No allocation: problem is %s", status)
            return SolveReport(strategy, status, None, None, None, ledger, traces)

        sinr = sinr_matrix(allocation, gains, scenario)
        se = np.asarray(se_from_sinr(sinr, scenario.config))
        if allocation_csv is not None:
            write_allocation_csv(allocation_csv, allocation, sinr, se)
        return SolveReport(strategy, status, allocation, sinr, se, ledger, traces)
