"""Solver interface for dense cone programs."""

from abc import ABC, abstractmethod

from mimo_power.domain.entities.cone_program import ConeProgram, SolveResult


class ConeSolver(ABC):
    """Interface for solvers of ``min c^T x s.t. Gx + s = h, Ax = b, s in C``."""

    @abstractmethod
    def solve(self, program: ConeProgram) -> SolveResult:
        """Solve a cone program.

        Args:
            program: Program in standard conic form

        Returns:
            SolveResult with status, primal/dual points and objective values
        """
        pass
