"""Monte-Carlo experiments over seeded network drops.

Drops are independent: each worker regenerates its scenario from a spawned
seed, solves it and returns a plain outcome record. Only the calling
process aggregates outcomes and writes files.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from mimo_power.application.services.centralized_service import CentralizedPowerControlService
from mimo_power.application.services.dual_decomposition_service import (
    DualDecompositionOptions,
    DualDecompositionService,
    StoppingRule,
)
from mimo_power.application.services.signaling_service import signaling_table
from mimo_power.domain.entities.drop_config import DropConfig
from mimo_power.domain.errors import (
    ConfigurationError,
    SolverBreakdownError,
    SubproblemInfeasibleError,
)
from mimo_power.domain.system_model import (
    compute_effective_gains,
    qos_to_sinr_target,
    se_from_sinr,
    sinr_matrix,
)
from mimo_power.infrastructure.channel.monte_carlo import simulate_estimates, simulate_sinr_terms
from mimo_power.infrastructure.scenario.drop_generator import WrapAroundDropGenerator, drop_seeds

logger = logging.getLogger(__name__)


class ExperimentMode(str, Enum):
    """Experiments the driver can run."""

    CONVERGENCE_HISTOGRAM = "convergence-histogram"
    QOS_CDF = "qos-cdf"
    SIGNALING_TABLE = "signaling-table"
    VALIDATE_CLOSED_FORM = "validate-lemma1"

    @classmethod
    def _missing_(cls, value):
        if value == "validate-closed-form":
            return cls.VALIDATE_CLOSED_FORM
        return None

    @classmethod
    def choices(cls) -> List[str]:
        """Accepted command-line names, aliases included."""
        return [mode.value for mode in cls] + ["validate-closed-form"]


class DropStatus(str, Enum):
    """Outcome class of one drop."""

    SOLVED = "solved"
    INFEASIBLE = "infeasible"
    SUBPROBLEM_INFEASIBLE = "subproblem_infeasible"
    SOLVER_BREAKDOWN = "solver_breakdown"


@dataclass(frozen=True)
class DropOutcome:
    """Result of the distributed algorithm on one drop."""

    drop: int
    status: DropStatus
    centralized_power: float = float("nan")
    distributed_power: float = float("nan")
    iterations: Optional[int] = None
    """Iterations to reach the benchmark gap, None if the cap was hit first."""
    achieved_se: Optional[np.ndarray] = field(default=None, compare=False)
    """Per-user SE at the returned iterate, shape (L, K)."""
    required_se: Optional[np.ndarray] = field(default=None, compare=False)
    diagnosis: str = ""

    @property
    def feasible(self) -> bool:
        return self.status is DropStatus.SOLVED


@dataclass(frozen=True)
class ExperimentResult:
    """Tables produced by an experiment."""

    mode: ExperimentMode
    table: pd.DataFrame
    """Main result table, written as the experiment CSV."""
    summary: Dict[str, float]
    """Scalar statistics of the run."""
    outcomes: List[DropOutcome] = field(default_factory=list)


def solve_drop(
    cfg: DropConfig,
    seed: np.random.SeedSequence,
    drop: int,
    options: DualDecompositionOptions,
) -> DropOutcome:
    """Solve one drop centrally and with the benchmark-stopped dual decomposition.

    Module-level so process pools can pickle it.
    """
    scenario = WrapAroundDropGenerator(cfg).generate(seed)
    gains = compute_effective_gains(scenario, cfg.scheme)
    targets = qos_to_sinr_target(scenario)
    centralized = CentralizedPowerControlService().solve(scenario, gains, targets)
    if not centralized.feasible:
        logger.info("Drop %d is infeasible (%s)", drop, centralized.status.value)
        return DropOutcome(drop=drop, status=DropStatus.INFEASIBLE, diagnosis=centralized.status.value)

    run_options = replace(
        options,
        stopping_rule=StoppingRule.BENCHMARK,
        reference_total_power=centralized.total_power,
    )
    try:
        result = DualDecompositionService().run(scenario, gains, targets, run_options)
    except SubproblemInfeasibleError as e:
        logger.info("Drop %d: %s", drop, e)
        return DropOutcome(
            drop=drop,
            status=DropStatus.SUBPROBLEM_INFEASIBLE,
            centralized_power=centralized.total_power,
            diagnosis=str(e),
        )
    except SolverBreakdownError as e:
        logger.warning("Drop %d: %s", drop, e)
        return DropOutcome(
            drop=drop,
            status=DropStatus.SOLVER_BREAKDOWN,
            centralized_power=centralized.total_power,
            diagnosis=str(e),
        )
    sinr = sinr_matrix(result.allocation, gains, scenario)
    return DropOutcome(
        drop=drop,
        status=DropStatus.SOLVED,
        centralized_power=centralized.total_power,
        distributed_power=result.allocation.total_power,
        iterations=result.iterations if result.converged else None,
        achieved_se=np.asarray(se_from_sinr(sinr, scenario.config)),
        required_se=np.array(scenario.qos_se),
    )


def _solve_job(job: tuple) -> DropOutcome:
    return solve_drop(*job)


class ExperimentService:
    """Runs Monte-Carlo experiments over a configured set of drops."""

    def __init__(
        self,
        cfg: DropConfig,
        options: Optional[DualDecompositionOptions] = None,
        workers: int = 1,
    ):
        """Initialize the service.

        Args:
            cfg: Drop configuration (layout, seeds, number of drops)
            options: Dual decomposition options; the stopping rule is
                replaced by the benchmark rule against each drop's optimum
            workers: Worker processes for independent drops
        """
        if workers < 1:
            raise ConfigurationError(f"Workers must be at least 1, got {workers}")
        self.cfg = cfg
        self.options = options or DualDecompositionOptions()
        self.workers = workers

    def run(self, mode: ExperimentMode) -> ExperimentResult:
        """Run an experiment.

        Args:
            mode: Experiment to run

        Returns:
            ExperimentResult with the main table and a summary
        """
        mode = ExperimentMode(mode)
        handlers: Dict[ExperimentMode, Callable[[], ExperimentResult]] = {
            ExperimentMode.CONVERGENCE_HISTOGRAM: self.convergence_histogram,
            ExperimentMode.QOS_CDF: self.qos_cdf,
            ExperimentMode.SIGNALING_TABLE: self.signaling_table,
            ExperimentMode.VALIDATE_CLOSED_FORM: self.validate_closed_form,
        }
        logger.info("Running %s over %d drops", mode.value, self.cfg.num_drops)
        return handlers[mode]()

    def solve_drops(self) -> List[DropOutcome]:
        """Solve every drop, in parallel when more than one worker is configured."""
        jobs = [
            (self.cfg, seed, index, self.options)
            for index, seed in enumerate(drop_seeds(self.cfg))
        ]
        if self.workers == 1:
            outcomes = [_solve_job(job) for job in jobs]
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as executor:
                outcomes = list(executor.map(_solve_job, jobs))
        skipped = sum(not outcome.feasible for outcome in outcomes)
        if skipped:
            logger.info("%d of %d drops were infeasible", skipped, len(outcomes))
        return outcomes

    def _drop_summary(self, outcomes: List[DropOutcome]) -> Dict[str, float]:
        solved = [o for o in outcomes if o.feasible]
        cap = self.options.max_iterations
        summary: Dict[str, float] = {
            "drops": len(outcomes),
            "feasible_drops": len(solved),
            "infeasible_drops": sum(o.status is DropStatus.INFEASIBLE for o in outcomes),
            "subproblem_infeasible_drops": sum(
                o.status is DropStatus.SUBPROBLEM_INFEASIBLE for o in outcomes
            ),
            "solver_breakdown_drops": sum(o.status is DropStatus.SOLVER_BREAKDOWN for o in outcomes),
        }
        if solved:
            iterations = [o.iterations for o in solved]
            summary["one_iteration_fraction"] = sum(n == 1 for n in iterations) / len(solved)
            summary["over_cap_fraction"] = sum(n is None for n in iterations) / len(solved)
            converged = [n for n in iterations if n is not None]
            summary["mean_iterations"] = float(np.mean(converged)) if converged else float(cap)
        return summary

    def convergence_histogram(self) -> ExperimentResult:
        """Iterations each drop needs to get within the benchmark gap of its optimum."""
        outcomes = self.solve_drops()
        cap = self.options.max_iterations
        table = pd.DataFrame(
            [
                {
                    "drop": o.drop,
                    "status": o.status.value,
                    "centralized_power": o.centralized_power,
                    "distributed_power": o.distributed_power,
                    "iterations": o.iterations if o.iterations is not None else cap + 1,
                    "converged": o.iterations is not None,
                }
                for o in outcomes
            ],
            columns=["drop", "status", "centralized_power", "distributed_power", "iterations", "converged"],
        )
        return ExperimentResult(ExperimentMode.CONVERGENCE_HISTOGRAM, table, self._drop_summary(outcomes), outcomes)

    def qos_cdf(self) -> ExperimentResult:
        """Achieved SE of every user at the benchmark stopping iterate."""
        outcomes = self.solve_drops()
        rows = []
        for o in outcomes:
            if not o.feasible:
                continue
            L, K = o.achieved_se.shape
            for l in range(L):
                for k in range(K):
                    rows.append({
                        "drop": o.drop,
                        "l": l,
                        "k": k,
                        "se": float(o.achieved_se[l, k]),
                        "required_se": float(o.required_se[l, k]),
                    })
        table = pd.DataFrame(rows, columns=["drop", "l", "k", "se", "required_se"])
        table = table.sort_values("se", kind="stable").reset_index(drop=True)
        summary = self._drop_summary(outcomes)
        if len(table):
            table["cdf"] = np.arange(1, len(table) + 1) / len(table)
            satisfied = table["se"] >= 0.95 * table["required_se"]
            summary["satisfied_fraction"] = float(satisfied.mean())
        else:
            table["cdf"] = pd.Series(dtype=float)
        return ExperimentResult(ExperimentMode.QOS_CDF, table, summary, outcomes)

    def signaling_table(self) -> ExperimentResult:
        """Signaling counts with N set to the measured mean iteration count."""
        outcomes = self.solve_drops()
        summary = self._drop_summary(outcomes)
        measured = summary.get("mean_iterations", float(self.options.max_iterations))
        N = max(1, math.ceil(measured))
        summary["measured_iterations"] = N
        table = pd.DataFrame(
            [ledger.as_row() for ledger in signaling_table(self.cfg.num_cells, self.cfg.users_per_cell, N)]
        )
        return ExperimentResult(ExperimentMode.SIGNALING_TABLE, table, summary, outcomes)

    def validate_closed_form(self) -> ExperimentResult:
        """Monte-Carlo check of the closed-form SINR on the first drop.

        Runs at ``validation_antennas`` antennas. The powers are the
        centralized optimum when it exists, otherwise an equal split of the
        budget.
        """
        cfg = self.cfg.with_overrides(antennas=self.cfg.validation_antennas)
        seed = drop_seeds(cfg)[0]
        scenario = WrapAroundDropGenerator(cfg).generate(seed)
        gains = compute_effective_gains(scenario, cfg.scheme)
        centralized = CentralizedPowerControlService().solve(
            scenario, gains, qos_to_sinr_target(scenario)
        )
        if centralized.feasible and centralized.total_power > 0:
            rho = centralized.allocation.rho
        else:
            rho = np.repeat(scenario.p_max[:, np.newaxis] / scenario.K, scenario.K, axis=1)

        estimates_seed, terms_seed = seed.spawn(2)
        estimates = simulate_estimates(scenario, cfg.validation_draws, estimates_seed)
        terms = simulate_sinr_terms(scenario, gains, rho, cfg.validation_draws, terms_seed)
        table = pd.concat([estimates.to_frame(), terms.to_frame()], ignore_index=True)
        z = table["z_score"].abs()
        summary = {
            "draws": cfg.validation_draws,
            "antennas": cfg.antennas,
            "max_abs_z": float(z.max()),
            "within_3_se_fraction": float((z <= 3.0).mean()),
            "max_se_relative_error": float(terms.se_relative_error.max()),
            "max_gamma_relative_error": estimates.max_relative_error,
            "singular_draws": terms.singular_draws,
        }
        return ExperimentResult(ExperimentMode.VALIDATE_CLOSED_FORM, table, summary)


def run_experiment(
    cfg: DropConfig,
    mode: Union[ExperimentMode, str],
    options: Optional[DualDecompositionOptions] = None,
    workers: int = 1,
    output: Optional[Path] = None,
) -> ExperimentResult:
    """Run one experiment and optionally write its table as CSV."""
    result = ExperimentService(cfg, options, workers).run(ExperimentMode(mode))
    if output is not None:
        result.table.to_csv(output, index=False, float_format="%.17g")
    return result
