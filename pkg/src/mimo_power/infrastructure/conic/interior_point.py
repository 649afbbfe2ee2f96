"""Primal-dual interior-point solver for dense cone programs.

The solver runs a Mehrotra predictor-corrector method on the homogeneous
self-dual embedding of

    minimize    c^T x
    subject to  G x + s = h,  A x = b,  s in C

with Nesterov-Todd scaling on second-order cones. The embedding variables
tau and kappa certify infeasibility or unboundedness without a phase-1
problem. All linear algebra is dense; every Newton system is factorized
once by LU and reused for the predictor and the corrector.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg

from mimo_power.domain.entities.cone_program import ConeProgram, SolveResult, SolveStatus
from mimo_power.domain.errors import DimensionMismatchError
from mimo_power.domain.interfaces.cone_solver import ConeSolver
from mimo_power.infrastructure.conic import cones

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances and limits of the interior-point method."""

    feastol: float = 1e-8
    """Tolerance on scaled primal and dual residuals."""

    abstol: float = 1e-8
    """Absolute duality-gap tolerance."""

    reltol: float = 1e-8
    """Relative duality-gap tolerance."""

    max_iterations: int = 200
    """Iteration cap."""

    step_fraction: float = 0.99
    """Fraction-to-boundary factor applied to the maximal step."""

    refinement_steps: int = 2
    """Iterative refinement passes on every Newton solve."""


class _Direction(NamedTuple):
    dx: np.ndarray
    dy: np.ndarray
    dz: np.ndarray
    dtau: float
    ds: np.ndarray
    dkappa: float


class _NumericalBreakdown(Exception):
    pass


def _drop_empty_rows(program: ConeProgram) -> ConeProgram:
    if program.p == 0:
        return program
    keep = np.any(program.A != 0, axis=1) | (program.b != 0)
    if np.all(keep):
        return program
    logger.debug("Removing %d empty equality rows", int((~keep).sum()))
    return ConeProgram(
        program.c, program.G, program.h, program.dims,
        program.A[keep], program.b[keep], program.row_blocks,
    )


def _solve_dense(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        solution = linalg.solve(matrix, rhs)
    except linalg.LinAlgError:
        solution = linalg.lstsq(matrix, rhs)[0]
    if not np.all(np.isfinite(solution)):
        solution = linalg.lstsq(matrix, rhs)[0]
    return solution


def _initial_point(program: ConeProgram):
    c, G, h, A, b, dims = program.c, program.G, program.h, program.A, program.b, program.dims
    n, m, p = program.n, program.m, program.p
    kkt = np.block([
        [np.zeros((n, n)), A.T, G.T],
        [A, np.zeros((p, p)), np.zeros((p, m))],
        [G, np.zeros((m, p)), -np.eye(m)],
    ])
    # least-squares primal point: min ||Gx - h|| s.t. Ax = b
    primal = _solve_dense(kkt, np.concatenate([np.zeros(n), b, h]))
    x = primal[:n]
    s = cones.shift_into_cone(-primal[n + p:], dims)
    # least-norm dual point: min ||z|| s.t. A^T y + G^T z + c = 0
    dual = _solve_dense(kkt, np.concatenate([-c, np.zeros(p), np.zeros(m)]))
    y = dual[n:n + p]
    z = cones.shift_into_cone(dual[n + p:], dims)
    return x, y, z, s


class InteriorPointSolver(ConeSolver):
    """Homogeneous self-dual interior-point solver for LPs and SOCPs."""

    def __init__(self, settings: Optional[SolverSettings] = None):
        """Initialize the solver.

        Args:
            settings: Tolerances and limits; defaults to SolverSettings()
        """
        self.settings = settings or SolverSettings()

    def solve(self, program: ConeProgram) -> SolveResult:
        """Solve a cone program.

        Args:
            program: Program in standard conic form

        Returns:
            SolveResult. Numerical failures yield ITERATION_LIMIT with the
            best iterate seen, never a silently wrong OPTIMAL.
        """
        program = _drop_empty_rows(program)
        settings = self.settings
        c, G, h, A, b, dims = program.c, program.G, program.h, program.A, program.b, program.dims
        n, m, p = program.n, program.m, program.p
        degree = dims.degree
        e = cones.identity(dims)

        scale_primal = max(1.0, float(np.linalg.norm(np.concatenate([b, h]))))
        scale_dual = max(1.0, float(np.linalg.norm(c)))

        x, y, z, s = _initial_point(program)
        tau, kappa = 1.0, 1.0
        best: Optional[SolveResult] = None
        best_merit = np.inf

        for iteration in range(settings.max_iterations + 1):
            rx = A.T @ y + G.T @ z + c * tau
            ry = b * tau - A @ x
            rz = s + G @ x - h * tau
            rt = kappa + c @ x + b @ y + h @ z
            mu = (s @ z + tau * kappa) / (degree + 1)

            xs, ys, zs, ss = x / tau, y / tau, z / tau, s / tau
            pcost = float(c @ xs)
            dcost = float(-(h @ zs) - (b @ ys))
            gap = float(ss @ zs)
            pres = max(
                float(np.linalg.norm(A @ xs - b)) if p else 0.0,
                float(np.linalg.norm(G @ xs + ss - h)),
            ) / scale_primal
            dres = float(np.linalg.norm(A.T @ ys + G.T @ zs + c)) / scale_dual
            if pcost < 0:
                relgap = gap / -pcost
            elif dcost > 0:
                relgap = gap / dcost
            else:
                relgap = np.inf

            logger.debug(
                "ipm it=%d pcost=%.6e dcost=%.6e gap=%.2e pres=%.2e dres=%.2e tau=%.2e kappa=%.2e",
                iteration, pcost, dcost, gap, pres, dres, tau, kappa,
            )

            if pres <= settings.feastol and dres <= settings.feastol and (
                gap <= settings.abstol or relgap <= settings.reltol
            ):
                return SolveResult(
                    status=SolveStatus.OPTIMAL, x=xs, s=ss, y=ys, z=zs,
                    primal_objective=pcost, dual_objective=dcost,
                    iterations=iteration, gap=gap,
                    primal_residual=pres, dual_residual=dres,
                )

            hz_by = float(h @ z + b @ y)
            if hz_by < 0 and kappa > tau:
                infres = float(np.linalg.norm(A.T @ y + G.T @ z)) / -hz_by
                if infres <= settings.feastol:
                    logger.debug("ipm: primal infeasibility certificate at iteration %d", iteration)
                    return SolveResult(
                        status=SolveStatus.INFEASIBLE, x=None, s=None,
                        y=y / -hz_by, z=z / -hz_by,
                        primal_objective=np.inf, dual_objective=np.inf,
                        iterations=iteration, gap=np.nan, dual_residual=infres,
                    )

            cx = float(c @ x)
            if cx < 0 and kappa > tau:
                unbres = max(
                    float(np.linalg.norm(A @ x)) if p else 0.0,
                    float(np.linalg.norm(G @ x + s)),
                ) / -cx
                if unbres <= settings.feastol:
                    logger.debug("ipm: dual infeasibility certificate at iteration %d", iteration)
                    return SolveResult(
                        status=SolveStatus.UNBOUNDED, x=x / -cx, s=s / -cx, y=None, z=None,
                        primal_objective=-np.inf, dual_objective=-np.inf,
                        iterations=iteration, gap=np.nan, primal_residual=unbres,
                    )

            merit = max(pres, dres, min(gap, relgap))
            if np.isfinite(merit) and merit < best_merit:
                best_merit = merit
                best = SolveResult(
                    status=SolveStatus.ITERATION_LIMIT, x=xs, s=ss, y=ys, z=zs,
                    primal_objective=pcost, dual_objective=dcost,
                    iterations=iteration, gap=gap,
                    primal_residual=pres, dual_residual=dres,
                )

            if iteration == settings.max_iterations:
                break

            try:
                step = self._iterate(
                    program, x, y, z, s, tau, kappa, mu, e,
                    rx, ry, rz, rt,
                )
            except (_NumericalBreakdown, linalg.LinAlgError, FloatingPointError, ValueError) as exc:
                logger.debug("ipm: numerical breakdown at iteration %d: %s", iteration, exc)
                break
            x, y, z, s, tau, kappa = step

        logger.debug("ipm: stopped without convergence, returning best iterate")
        if best is None:
            nan = np.full(n, np.nan)
            return SolveResult(
                status=SolveStatus.ITERATION_LIMIT, x=nan, s=np.full(m, np.nan),
                y=np.full(p, np.nan), z=np.full(m, np.nan),
                primal_objective=np.nan, dual_objective=np.nan,
                iterations=settings.max_iterations, gap=np.nan,
            )
        return SolveResult(
            status=SolveStatus.ITERATION_LIMIT, x=best.x, s=best.s, y=best.y, z=best.z,
            primal_objective=best.primal_objective, dual_objective=best.dual_objective,
            iterations=iteration, gap=best.gap,
            primal_residual=best.primal_residual, dual_residual=best.dual_residual,
        )

    def _iterate(self, program, x, y, z, s, tau, kappa, mu, e, rx, ry, rz, rt):
        settings = self.settings
        c, G, h, A, b, dims = program.c, program.G, program.h, program.A, program.b, program.dims
        n, m, p = program.n, program.m, program.p

        scaling = cones.nt_scaling(s, z, dims)
        W, W_inv, lmbda = scaling.W, scaling.W_inv, scaling.lmbda
        if not np.all(np.isfinite(W)):
            raise _NumericalBreakdown("non-finite scaling")

        kkt = np.block([
            [np.zeros((n, n)), A.T, G.T, c[:, np.newaxis]],
            [A, np.zeros((p, p)), np.zeros((p, m)), -b[:, np.newaxis]],
            [G, np.zeros((m, p)), -W @ W, -h[:, np.newaxis]],
            [c[np.newaxis, :], b[np.newaxis, :], h[np.newaxis, :], np.array([[-kappa / tau]])],
        ])
        factor = linalg.lu_factor(kkt, check_finite=True)

        def newton(sigma: float, rhs_s: np.ndarray, rhs_tau: float) -> _Direction:
            scaled = cones.jordan_divide(lmbda, rhs_s, dims)
            rhs = np.concatenate([
                -(1.0 - sigma) * rx,
                (1.0 - sigma) * ry,
                -(1.0 - sigma) * rz - W @ scaled,
                [-(1.0 - sigma) * rt - rhs_tau / tau],
            ])
            sol = linalg.lu_solve(factor, rhs)
            for _ in range(settings.refinement_steps):
                sol = sol + linalg.lu_solve(factor, rhs - kkt @ sol)
            if not np.all(np.isfinite(sol)):
                raise _NumericalBreakdown("non-finite Newton direction")
            dx, dy, dz, dtau = sol[:n], sol[n:n + p], sol[n + p:n + p + m], float(sol[-1])
            ds = W @ (scaled - W @ dz)
            dkappa = (rhs_tau - kappa * dtau) / tau
            return _Direction(dx, dy, dz, dtau, ds, dkappa)

        def step_length(d: _Direction, fraction: float) -> float:
            alpha = min(cones.max_step(s, d.ds, dims), cones.max_step(z, d.dz, dims))
            if d.dtau < 0:
                alpha = min(alpha, -tau / d.dtau)
            if d.dkappa < 0:
                alpha = min(alpha, -kappa / d.dkappa)
            return min(1.0, fraction * alpha)

        # predictor
        lambda_sq = cones.jordan_product(lmbda, lmbda, dims)
        affine = newton(0.0, -lambda_sq, -tau * kappa)
        alpha_affine = step_length(affine, 1.0)
        sigma = float(np.clip((1.0 - alpha_affine) ** 3, 0.0, 1.0))

        # corrector
        second_order = cones.jordan_product(W_inv @ affine.ds, W @ affine.dz, dims)
        rhs_s = -lambda_sq + sigma * mu * e - second_order
        rhs_tau = -tau * kappa + sigma * mu - affine.dtau * affine.dkappa
        direction = newton(sigma, rhs_s, rhs_tau)
        alpha = step_length(direction, settings.step_fraction)
        if alpha < 1e-12:
            raise _NumericalBreakdown(f"step length {alpha:.1e}")

        return (
            x + alpha * direction.dx,
            y + alpha * direction.dy,
            z + alpha * direction.dz,
            s + alpha * direction.ds,
            tau + alpha * direction.dtau,
            kappa + alpha * direction.dkappa,
        )


def solve_socp(program: ConeProgram, settings: Optional[SolverSettings] = None) -> SolveResult:
    """Solve a second-order cone program (orthant block allowed)."""
    return InteriorPointSolver(settings).solve(program)


def solve_lp(program: ConeProgram, settings: Optional[SolverSettings] = None) -> SolveResult:
    """Solve a linear program given in conic form with only an orthant block.

    Raises:
        DimensionMismatchError: If the program contains second-order cones
    """
    if not program.dims.is_orthant_only:
        raise DimensionMismatchError("solve_lp accepts only orthant cones")
    return InteriorPointSolver(settings).solve(program)
