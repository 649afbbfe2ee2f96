"""Distributed power minimization by dual decomposition.

Each BS l solves a local SOCP in its sqrt-powers, the exact interference
it causes to other cells and the interference it believes it receives.
A master entity then moves the multipliers of the consistency constraints
``theta_tilde == theta`` along a projected subgradient.

Inside the subproblems powers are measured in a scenario-wide reference
power. Interference amplitudes use a per-user unit (see
:func:`amplitude_units`) under which the default step of 0.01 moves every
belief onto the interference observed in the previous iteration.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Union

import numpy as np

from mimo_power.domain.entities.cone_program import ConeDims, ConeProgram, SolveStatus
from mimo_power.domain.entities.consistency import (
    ConsistencyState,
    IterationTrace,
    SubproblemSolution,
    other_cells,
    slot,
)
from mimo_power.domain.entities.scenario import (
    EffectiveGains,
    NetworkScenario,
    PowerAllocation,
    SinrTargets,
)
from mimo_power.domain.entities.signaling import Strategy
from mimo_power.domain.errors import (
    ConfigurationError,
    SolverBreakdownError,
    SubproblemInfeasibleError,
)
from mimo_power.domain.interfaces.cone_solver import ConeSolver
from mimo_power.domain.system_model import reference_power, sinr_matrix
from mimo_power.application.services.signaling_service import count_signaling
from mimo_power.infrastructure.conic.interior_point import InteriorPointSolver

logger = logging.getLogger(__name__)


class StepSchedule(str, Enum):
    """Step-size rule of the multiplier update."""

    CONSTANT = "constant"
    DIMINISHING = "diminishing"


class StoppingRule(str, Enum):
    """Termination test of the outer iteration."""

    CONSISTENCY = "consistency"
    BENCHMARK = "benchmark"


class ConvergenceStatus(str, Enum):
    CONVERGED = "converged"
    ITERATION_CAP = "iteration_cap"


@dataclass(frozen=True)
class DualDecompositionOptions:
    """Knobs of the distributed algorithm."""

    step_size: float = 0.01
    """Constant step, or the initial step of the diminishing schedule."""

    schedule: StepSchedule = StepSchedule.CONSTANT
    """Constant step or step / sqrt(n)."""

    initial_multiplier: float = 0.0
    """Starting value of every multiplier."""

    max_iterations: int = 400
    """Iteration cap."""

    stopping_rule: StoppingRule = StoppingRule.CONSISTENCY
    """Consistency-and-QoS test or distance to a known optimum."""

    residual_tolerance: float = 1e-3
    """Largest tolerated |theta_tilde - theta| for the consistency rule."""

    qos_tolerance: float = 0.01
    """Largest tolerated relative SINR shortfall for the consistency rule."""

    reference_total_power: Optional[float] = None
    """Centralized optimum in watts, required by the benchmark rule."""

    benchmark_gap: float = 0.05
    """Relative distance to the optimum accepted by the benchmark rule."""

    exact_weight: float = 1e-6
    """Objective weight on the exact variables; keeps them tight when their multipliers vanish."""

    power_unit: Optional[float] = None
    """Watts per subproblem power unit; defaults to the reference power."""

    workers: int = 1
    """Threads solving the L subproblems of one iteration."""

    def __post_init__(self):
        """Validate options."""
        object.__setattr__(self, "schedule", StepSchedule(self.schedule))
        object.__setattr__(self, "stopping_rule", StoppingRule(self.stopping_rule))
        if self.step_size <= 0:
            raise ConfigurationError(f"Step size must be positive, got {self.step_size}")
        if self.max_iterations < 1:
            raise ConfigurationError(f"Iteration cap must be at least 1, got {self.max_iterations}")
        if self.initial_multiplier < 0:
            raise ConfigurationError("Initial multipliers must be nonnegative")
        if self.residual_tolerance <= 0 or self.qos_tolerance <= 0 or self.benchmark_gap <= 0:
            raise ConfigurationError("Tolerances must be positive")
        if self.exact_weight < 0:
            raise ConfigurationError("Exact-variable weight must be nonnegative")
        if self.workers < 1:
            raise ConfigurationError(f"Workers must be at least 1, got {self.workers}")
        if self.stopping_rule is StoppingRule.BENCHMARK and (
            self.reference_total_power is None or self.reference_total_power < 0
        ):
            raise ConfigurationError("The benchmark stopping rule needs a nonnegative reference power")

    def step_at(self, iteration: int) -> float:
        """Step size used after the given (1-based) iteration."""
        if self.schedule is StepSchedule.DIMINISHING:
            return self.step_size / math.sqrt(iteration)
        return self.step_size


@dataclass(frozen=True)
class DualDecompositionResult:
    """Outcome of the distributed algorithm."""

    status: ConvergenceStatus
    allocation: PowerAllocation
    """Allocation of the returned iterate."""

    iterations: int
    """Outer iterations executed."""

    best_iteration: int
    """Iteration the returned allocation comes from."""

    traces: List[IterationTrace]
    state: ConsistencyState

    amplitude_sq: Optional[np.ndarray] = None
    """Squared amplitude unit of every user in watts, for ``state.in_sqrt_watts``."""

    @property
    def converged(self) -> bool:
        return self.status is ConvergenceStatus.CONVERGED


class _Layout:
    """Variable indices of BS l's subproblem: [rho_tilde | theta | theta_tilde | s]."""

    def __init__(self, L: int, K: int):
        self.L, self.K = L, K
        self.J = L - 1
        self.n = K * (2 * L - 1) + 1

    def rho(self, k: int) -> int:
        return k

    def theta(self, j: int, k: int) -> int:
        return self.K + j * self.K + k

    def believed(self, j: int, k: int) -> int:
        return self.K + self.J * self.K + j * self.K + k

    @property
    def s(self) -> int:
        return self.n - 1

    @property
    def theta_slice(self) -> slice:
        return slice(self.K, self.K + self.J * self.K)

    @property
    def believed_slice(self) -> slice:
        return slice(self.K + self.J * self.K, self.n - 1)


def subproblem_variable_count(L: int, K: int) -> int:
    """Variables of one BS's subproblem: K(2L-1) + 1."""
    return K * (2 * L - 1) + 1


def complexity_estimate(L: int, K: int, epsilon: float) -> float:
    """Flop-order cost of an epsilon-solution of one subproblem by an IPM.

    Returns:
        ``delta (L K^3 + 6 L K^2 + K L^2 + 6 L K + 3 K + 5 + m^2) m`` with
        ``delta = ln(1/epsilon) sqrt(2 L K + 4)`` and ``m = K(2L-1) + 1``

    Raises:
        ValueError: If epsilon is not in (0, 1)
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    m = subproblem_variable_count(L, K)
    delta = math.log(1.0 / epsilon) * math.sqrt(2 * L * K + 4)
    per_iteration = L * K ** 3 + 6 * L * K ** 2 + K * L ** 2 + 6 * L * K + 3 * K + 5 + m ** 2
    return delta * per_iteration * m


BELIEF_CURVATURE = 0.005
"""Power units that a unit believed amplitude costs its BS."""

_BUDGET_SLACK = 1e-6
"""Relative budget overshoot of a subproblem point that is rounded back onto the budget."""


def amplitude_units(
    gains: EffectiveGains,
    targets: SinrTargets,
    scenario: NetworkScenario,
    power_unit: Optional[float] = None,
) -> np.ndarray:
    """Squared interference-amplitude unit of every user in watts, shape (L, K).

    User k of cell l measures the interference it receives in units whose
    square is ``BELIEF_CURVATURE * power_unit * G gamma[l,l,k] / xi[l,k]``.
    Believing in an amplitude theta_tilde then costs the BS close to
    ``BELIEF_CURVATURE * theta_tilde^2`` power units whatever the user's
    pathloss, so the belief answers a multiplier as
    ``theta_tilde = lam / (2 BELIEF_CURVATURE)`` and a step of
    ``2 BELIEF_CURVATURE`` (the default 0.01) replaces each belief by the
    interference observed in the previous iteration.

    Users without a target keep the DL noise power as their unit.
    """
    unit = power_unit or reference_power(gains, targets, scenario)
    active = targets.active
    desired = gains.G * gains.own_gamma
    scaled = BELIEF_CURVATURE * unit * desired / np.where(active, targets.xi_hat, 1.0)
    return np.where(active, scaled, scenario.sigma_dl_sq)


def _as_state(lam: Union[ConsistencyState, np.ndarray]) -> ConsistencyState:
    if isinstance(lam, ConsistencyState):
        return lam
    lam = np.asarray(lam, dtype=float)
    return ConsistencyState(np.zeros_like(lam), np.zeros_like(lam), lam)


def consistency_mask(targets: SinrTargets) -> np.ndarray:
    """Entries of the (L, L-1, K) state that carry a consistency constraint.

    Users without a QoS target need no belief about their interference.
    """
    L, K = targets.xi_hat.shape
    return np.repeat(targets.active[:, np.newaxis, :], L - 1, axis=1).reshape(L, L - 1, K)


class DualDecompositionService:
    """Runs the per-BS subproblems and the master multiplier update."""

    def __init__(self, solver: Optional[ConeSolver] = None):
        """Initialize the service.

        Args:
            solver: Cone solver for the subproblems; defaults to the interior-point solver
        """
        self.solver = solver or InteriorPointSolver()

    def build_subproblem(
        self,
        l: int,
        scenario: NetworkScenario,
        gains: EffectiveGains,
        targets: SinrTargets,
        lam: Union[ConsistencyState, np.ndarray],
        power_unit: Optional[float] = None,
        exact_weight: float = 1e-6,
        amplitude_sq: Optional[np.ndarray] = None,
    ) -> ConeProgram:
        """Build BS l's local SOCP for given multipliers.

        Variables are ``x = [rho_tilde (K), theta (L-1)K, theta_tilde (L-1)K, s]``
        with rho_tilde in sqrt reference-power units. Cones, in order:

        * orthant: theta_tilde >= 0 for users with a QoS target;
        * K QoS cones of dimension K+L+1;
        * one epigraph cone of dimension K+2 encoding s >= sum rho_tilde^2 + y;
        * (L-1)K interference cones of dimension K+2;
        * one budget cone of dimension K+1.

        Believed variables of users without a target are pinned to zero by
        equality rows.

        Args:
            l: BS index
            scenario: Network scenario (sigma_dl_sq must be positive)
            gains: Effective gains
            targets: SINR targets
            lam: Multipliers as a ConsistencyState or an (L, L-1, K) array
            power_unit: Watts per power unit; defaults to the reference power
            exact_weight: Objective weight on the exact variables
            amplitude_sq: (L, K) squared amplitude units; defaults to amplitude_units()

        Returns:
            ConeProgram minimizing ``s + exact_weight * sum(theta)``
        """
        L, K = scenario.L, scenario.K
        if not 0 <= l < L:
            raise IndexError(f"BS index {l} out of range for L={L}")
        if scenario.sigma_dl_sq <= 0:
            raise ConfigurationError("The distributed algorithm needs a positive DL noise power")
        state = _as_state(lam)
        if np.any(state.lam < 0):
            raise ConfigurationError("Multipliers must be nonnegative")

        unit = power_unit or reference_power(gains, targets, scenario)
        sigma_sq = scenario.sigma_dl_sq
        if amplitude_sq is None:
            amplitude_sq = amplitude_units(gains, targets, scenario, unit)
        layout = _Layout(L, K)
        n, J = layout.n, layout.J
        G = gains.G
        others = other_cells(L, l)
        xi = targets.xi_hat[l]
        local_active = xi > 0

        lam_believed = state.believed_multipliers(l) * local_active[np.newaxis, :]
        lam_exact = state.exact_multipliers(l)
        for j, i in enumerate(others):
            lam_exact[j] *= targets.active[i]

        blocks = []
        vectors = []
        labels = []

        believed = [layout.believed(j, k) for j in range(J) for k in range(K) if local_active[k]]
        orthant = np.zeros((len(believed), n))
        orthant[np.arange(len(believed)), believed] = -1.0
        blocks.append(orthant)
        vectors.append(np.zeros(len(believed)))
        labels.append(("believed_nonneg", len(believed)))

        for k in range(K):
            cone = np.zeros((K + L + 1, n))
            offset = np.zeros(K + L + 1)
            desired = G * gains.gamma[l, l, k]
            cone[0, layout.rho(k)] = -1.0
            local_coef = math.sqrt(xi[k] * gains.z_gain[l, l, k] / desired)
            for t in range(K):
                cone[1 + t, layout.rho(t)] = -local_coef
            belief_coef = math.sqrt(xi[k] * amplitude_sq[l, k] / (desired * unit))
            for j in range(J):
                cone[1 + K + j, layout.believed(j, k)] = -belief_coef
            noise_coef = math.sqrt(xi[k] * sigma_sq / (desired * unit))
            offset[K + L] = noise_coef
            blocks.append(cone)
            vectors.append(offset)
        labels.append(("qos", K * (K + L + 1)))

        # y = sum lam_exact * theta - sum lam_believed * theta_tilde
        grad_y = np.zeros(n)
        grad_y[layout.theta_slice] = lam_exact.ravel()
        grad_y[layout.believed_slice] = -lam_believed.ravel()
        e_s = np.zeros(n)
        e_s[layout.s] = 1.0
        epigraph = np.zeros((K + 2, n))
        epigraph[0] = -0.5 * e_s + 0.5 * grad_y
        for t in range(K):
            epigraph[1 + t, layout.rho(t)] = -1.0
        epigraph[K + 1] = 0.5 * e_s - 0.5 * grad_y
        epigraph_offset = np.zeros(K + 2)
        epigraph_offset[0] = 0.5
        epigraph_offset[K + 1] = 0.5
        blocks.append(epigraph)
        vectors.append(epigraph_offset)
        labels.append(("epigraph", K + 2))

        for j, i in enumerate(others):
            for k in range(K):
                cone = np.zeros((K + 2, n))
                cone[0, layout.theta(j, k)] = -1.0
                scale = unit / amplitude_sq[i, k]
                cone[1, layout.rho(k)] = -math.sqrt(G * gains.gamma[l, i, k] * scale)
                spread = math.sqrt(gains.z_gain[l, i, k] * scale)
                for t in range(K):
                    cone[2 + t, layout.rho(t)] = -spread
                blocks.append(cone)
                vectors.append(np.zeros(K + 2))
        labels.append(("interference", J * K * (K + 2)))

        budget = np.zeros((K + 1, n))
        budget_offset = np.zeros(K + 1)
        budget_offset[0] = math.sqrt(scenario.p_max[l] / unit)
        for t in range(K):
            budget[1 + t, layout.rho(t)] = -1.0
        blocks.append(budget)
        vectors.append(budget_offset)
        labels.append(("budget", K + 1))

        pinned = [layout.believed(j, k) for j in range(J) for k in range(K) if not local_active[k]]
        A = np.zeros((len(pinned), n))
        A[np.arange(len(pinned)), pinned] = 1.0

        c = np.zeros(n)
        c[layout.s] = 1.0
        c[layout.theta_slice] = exact_weight

        dims = ConeDims(
            nonneg=len(believed),
            soc=(K + L + 1,) * K + (K + 2,) + (K + 2,) * (J * K) + (K + 1,),
        )
        return ConeProgram(
            c=c,
            G=np.vstack(blocks),
            h=np.concatenate(vectors),
            dims=dims,
            A=A,
            b=np.zeros(len(pinned)),
            row_blocks=tuple(labels),
        )

    def solve_subproblem(
        self,
        l: int,
        scenario: NetworkScenario,
        gains: EffectiveGains,
        targets: SinrTargets,
        lam: Union[ConsistencyState, np.ndarray],
        power_unit: Optional[float] = None,
        exact_weight: float = 1e-6,
        amplitude_sq: Optional[np.ndarray] = None,
    ) -> SubproblemSolution:
        """Solve BS l's subproblem.

        Raises:
            SubproblemInfeasibleError: If BS l cannot meet its local QoS targets
            SolverBreakdownError: If the solver stops without a usable point
        """
        L, K = scenario.L, scenario.K
        unit = power_unit or reference_power(gains, targets, scenario)
        program = self.build_subproblem(
            l, scenario, gains, targets, lam, unit, exact_weight, amplitude_sq
        )
        result = self.solver.solve(program)

        if result.status is SolveStatus.INFEASIBLE:
            raise SubproblemInfeasibleError(l, _diagnose(l, scenario, gains, targets))
        if result.status is SolveStatus.ITERATION_LIMIT:
            violation = (
                program.constraint_violation(result.x)
                if result.x is not None and np.all(np.isfinite(result.x))
                else np.inf
            )
            if violation > 1e-6:
                raise SolverBreakdownError(
                    f"Subproblem of BS {l} stopped after {result.iterations} iterations "
                    f"with constraint violation {violation:.2e}"
                )
            logger.warning("Subproblem of BS %d accepted at reduced accuracy", l)
        elif result.status is not SolveStatus.OPTIMAL:
            raise SolverBreakdownError(f"Subproblem of BS {l} reported {result.status.value}")

        layout = _Layout(L, K)
        x = result.x
        rho_tilde = np.maximum(x[:K], 0.0) * math.sqrt(unit)
        power = float(rho_tilde @ rho_tilde)
        if power > scenario.p_max[l]:
            overshoot = power / scenario.p_max[l] - 1.0
            if overshoot > _BUDGET_SLACK:
                raise SolverBreakdownError(
                    f"Subproblem of BS {l} returned {power:.6e} W against a budget of "
                    f"{scenario.p_max[l]:.6e} W"
                )
            logger.debug("BS %d powers scaled onto the budget (overshoot %.2e)", l, overshoot)
            rho_tilde *= math.sqrt(scenario.p_max[l] / power)
        return SubproblemSolution(
            cell=l,
            rho_tilde=rho_tilde,
            s=float(x[layout.s]),
            theta_out=np.maximum(x[layout.theta_slice], 0.0).reshape(layout.J, K),
            theta_tilde_out=np.maximum(x[layout.believed_slice], 0.0).reshape(layout.J, K),
            power_unit=unit,
            iterations=result.iterations,
        )

    def run(
        self,
        scenario: NetworkScenario,
        gains: EffectiveGains,
        targets: SinrTargets,
        options: Optional[DualDecompositionOptions] = None,
    ) -> DualDecompositionResult:
        """Run the distributed algorithm until the stopping rule or the cap.

        Args:
            scenario: Network scenario
            gains: Effective gains
            targets: SINR targets
            options: Algorithm options; defaults to DualDecompositionOptions()

        Returns:
            DualDecompositionResult. At the cap the best iterate seen is
            returned with status ITERATION_CAP.

        Raises:
            SubproblemInfeasibleError: If some BS cannot meet its local QoS
        """
        options = options or DualDecompositionOptions()
        L, K = scenario.L, scenario.K
        unit = options.power_unit or reference_power(gains, targets, scenario)
        amplitude_sq = amplitude_units(gains, targets, scenario, unit)
        state = ConsistencyState.initial(L, K, options.initial_multiplier, consistency_mask(targets))
        active = targets.active
        traces: List[IterationTrace] = []
        started = time.perf_counter()

        best_score = np.inf
        best_allocation: Optional[PowerAllocation] = None
        best_iteration = 0
        best_state = state

        executor = ThreadPoolExecutor(max_workers=options.workers) if options.workers > 1 else None
        try:
            for iteration in range(1, options.max_iterations + 1):
                if not np.any(active):
                    solutions = [_zero_solution(l, L, K, unit) for l in range(L)]
                else:
                    def solve(l: int, snapshot: ConsistencyState = state) -> SubproblemSolution:
                        return self.solve_subproblem(
                            l, scenario, gains, targets, snapshot, unit,
                            options.exact_weight, amplitude_sq,
                        )

                    solutions = list(executor.map(solve, range(L)) if executor else map(solve, range(L)))

                theta = np.zeros((L, L - 1, K))
                theta_tilde = np.zeros((L, L - 1, K))
                for solution in solutions:
                    l = solution.cell
                    theta_tilde[l] = solution.theta_tilde_out
                    for j, i in enumerate(other_cells(L, l)):
                        theta[i, slot(i, l)] = solution.theta_out[j]
                state = state.with_observations(theta, theta_tilde)

                allocation = PowerAllocation(np.vstack([solution.rho for solution in solutions]))
                sinr = sinr_matrix(allocation, gains, scenario)
                if np.any(active):
                    ratio = sinr[active] / targets.xi_hat[active]
                    violation = float(np.max(np.maximum(1.0 - ratio, 0.0)))
                    margin = float(np.min(ratio - 1.0))
                else:
                    violation, margin = 0.0, 0.0
                total = allocation.total_power
                trace = IterationTrace(
                    iteration=iteration,
                    total_power=total,
                    max_residual=state.max_residual,
                    min_sinr_margin=margin,
                    max_qos_violation=violation,
                    exchanged_params=count_signaling(
                        Strategy.DUAL_DECOMPOSITION, L, K, iteration
                    ).exchanged_parameters,
                    wall_time=time.perf_counter() - started,
                    dual_value=float(sum(solution.dual_value for solution in solutions)),
                    sinr=sinr,
                )
                traces.append(trace)
                logger.debug(
                    "dual it=%d power=%.6e residual=%.3e violation=%.3e dual=%.6e",
                    iteration, total, trace.max_residual, violation, trace.dual_value,
                )

                score = _score(options, total, state.max_residual, violation)
                if best_allocation is None or score < best_score:
                    best_score, best_allocation = score, allocation
                    best_iteration, best_state = iteration, state
                if score <= 1.0:
                    logger.info("Dual decomposition converged after %d iterations", iteration)
                    return DualDecompositionResult(
                        ConvergenceStatus.CONVERGED, allocation, iteration, iteration,
                        traces, state, amplitude_sq,
                    )
                state = subgradient_update(state, options.step_at(iteration))
        finally:
            if executor is not None:
                executor.shutdown()

        logger.info(
            "Dual decomposition hit the cap of %d iterations; returning iteration %d",
            options.max_iterations, best_iteration,
        )
        return DualDecompositionResult(
            ConvergenceStatus.ITERATION_CAP,
            best_allocation,
            options.max_iterations,
            best_iteration,
            traces,
            best_state,
            amplitude_sq,
        )


def _zero_solution(l: int, L: int, K: int, unit: float) -> SubproblemSolution:
    return SubproblemSolution(
        cell=l,
        rho_tilde=np.zeros(K),
        s=0.0,
        theta_out=np.zeros((L - 1, K)),
        theta_tilde_out=np.zeros((L - 1, K)),
        power_unit=unit,
    )


def _score(options: DualDecompositionOptions, total: float, residual: float, violation: float) -> float:
    """Stopping measure; the iterate satisfies the rule when it is at most 1."""
    if options.stopping_rule is StoppingRule.BENCHMARK:
        reference = options.reference_total_power
        if reference == 0:
            return 0.0 if total <= 1e-12 else np.inf
        return abs(total - reference) / (options.benchmark_gap * reference)
    return max(residual / options.residual_tolerance, violation / options.qos_tolerance)


def _diagnose(l: int, scenario: NetworkScenario, gains: EffectiveGains, targets: SinrTargets) -> str:
    xi = targets.xi_hat[l]
    desired = gains.G * gains.gamma[l, l, :]
    self_limited = np.flatnonzero(xi * gains.z_gain[l, l, :] >= desired)
    if self_limited.size:
        return f"users {self_limited.tolist()} cannot reach their target at any power"
    # noise-limited powers ignoring inter-cell interference
    local = xi * gains.z_gain[l, l, :] / desired
    if local.sum() >= 1.0:
        return "intra-cell interference makes the local targets unachievable"
    needed = float((xi * scenario.sigma_dl_sq / desired).sum() / (1.0 - local.sum()))
    return f"local targets need at least {needed:.3e} W against a budget of {scenario.p_max[l]:.3e} W"


def subgradient_update(state: ConsistencyState, step: float) -> ConsistencyState:
    """Projected subgradient step ``lam <- max(0, lam - step (theta_tilde - theta))``.

    Raises:
        ValueError: If step is not positive
    """
    if step <= 0:
        raise ValueError(f"Step size must be positive, got {step}")
    updated = np.maximum(state.lam - step * (state.theta_tilde - state.theta), 0.0)
    return state.with_multipliers(updated)


def build_subproblem_socp(
    l: int,
    scenario: NetworkScenario,
    gains: EffectiveGains,
    targets: SinrTargets,
    lam: Union[ConsistencyState, np.ndarray],
    power_unit: Optional[float] = None,
    exact_weight: float = 1e-6,
) -> ConeProgram:
    """Build BS l's subproblem; see :meth:`DualDecompositionService.build_subproblem`."""
    return DualDecompositionService().build_subproblem(
        l, scenario, gains, targets, lam, power_unit, exact_weight
    )


def solve_subproblem(
    l: int,
    scenario: NetworkScenario,
    gains: EffectiveGains,
    targets: SinrTargets,
    lam: Union[ConsistencyState, np.ndarray],
    power_unit: Optional[float] = None,
    solver: Optional[ConeSolver] = None,
) -> SubproblemSolution:
    """Solve BS l's subproblem with the default or a given solver."""
    return DualDecompositionService(solver).solve_subproblem(
        l, scenario, gains, targets, lam, power_unit
    )


def run_dual_decomposition(
    scenario: NetworkScenario,
    gains: EffectiveGains,
    targets: SinrTargets,
    options: Optional[DualDecompositionOptions] = None,
    solver: Optional[ConeSolver] = None,
) -> DualDecompositionResult:
    """Run the distributed algorithm; see :meth:`DualDecompositionService.run`."""
    return DualDecompositionService(solver).run(scenario, gains, targets, options)
