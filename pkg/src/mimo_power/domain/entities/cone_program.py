"""Standard-form conic programs and solver results."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Tuple

import numpy as np

from mimo_power.domain.errors import ConfigurationError, DimensionMismatchError


class SolveStatus(str, Enum):
    """Outcome of a cone program solve."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class ConeDims:
    """Layout of the cone C: a nonnegative orthant block followed by SOCs."""

    nonneg: int = 0
    """Dimension of the nonnegative orthant block."""

    soc: Tuple[int, ...] = ()
    """Dimension of each second-order cone, in order."""

    def __post_init__(self):
        """Validate cone dimensions."""
        object.__setattr__(self, "soc", tuple(int(q) for q in self.soc))
        if self.nonneg < 0:
            raise ConfigurationError(f"Orthant dimension must be nonnegative, got {self.nonneg}")
        for q in self.soc:
            if q < 2:
                raise ConfigurationError(f"Second-order cones need dimension >= 2, got {q}")

    @property
    def total(self) -> int:
        """Total number of conic rows."""
        return self.nonneg + sum(self.soc)

    @property
    def degree(self) -> int:
        """Barrier degree: one per orthant coordinate plus one per SOC."""
        return self.nonneg + len(self.soc)

    @property
    def is_orthant_only(self) -> bool:
        return not self.soc

    def blocks(self) -> Iterator[Tuple[str, slice]]:
        """Yield ``("l", slice)`` for the orthant then ``("q", slice)`` per SOC."""
        if self.nonneg:
            yield "l", slice(0, self.nonneg)
        start = self.nonneg
        for q in self.soc:
            yield "q", slice(start, start + q)
            start += q


def cone_violation(u: np.ndarray, dims: ConeDims) -> float:
    """Largest distance-to-cone measure of u: 0 when u lies in C."""
    worst = 0.0
    for kind, rows in dims.blocks():
        block = u[rows]
        if kind == "l":
            worst = max(worst, float(np.max(-block, initial=0.0)))
        else:
            worst = max(worst, float(np.linalg.norm(block[1:]) - block[0]))
    return max(worst, 0.0)


@dataclass(frozen=True)
class ConeProgram:
    """Dense conic program.

    minimize    c^T x
    subject to  G x + s = h,  A x = b,  s in C

    ``row_blocks`` optionally labels consecutive groups of rows of G so that
    builders and tests can address constraint families by name.
    """

    c: np.ndarray
    """Objective vector, shape (n,)."""

    G: np.ndarray
    """Conic constraint matrix, shape (m, n)."""

    h: np.ndarray
    """Conic constraint offset, shape (m,)."""

    dims: ConeDims
    """Cone layout of the slack s."""

    A: Optional[np.ndarray] = None
    """Equality constraint matrix, shape (p, n)."""

    b: Optional[np.ndarray] = None
    """Equality right-hand side, shape (p,)."""

    row_blocks: Tuple[Tuple[str, int], ...] = field(default=())
    """Named consecutive row groups of G."""

    def __post_init__(self):
        """Validate dimensions."""
        c = np.asarray(self.c, dtype=float).ravel()
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        h = np.asarray(self.h, dtype=float).ravel()
        n = c.size
        if G.shape != (h.size, n):
            raise DimensionMismatchError(f"G must have shape ({h.size}, {n}), got {G.shape}")
        if h.size != self.dims.total:
            raise DimensionMismatchError(
                f"Cone dimensions sum to {self.dims.total} but there are {h.size} conic rows"
            )
        A = np.zeros((0, n)) if self.A is None else np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.zeros(0) if self.b is None else np.asarray(self.b, dtype=float).ravel()
        if A.size == 0:
            A = np.zeros((0, n))
        if A.shape != (b.size, n):
            raise DimensionMismatchError(f"A must have shape ({b.size}, {n}), got {A.shape}")
        if self.row_blocks and sum(size for _, size in self.row_blocks) != h.size:
            raise DimensionMismatchError("Row block sizes do not add up to the conic rows")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "row_blocks", tuple(self.row_blocks))

    @property
    def n(self) -> int:
        """Number of variables."""
        return self.c.size

    @property
    def m(self) -> int:
        """Number of conic rows."""
        return self.h.size

    @property
    def p(self) -> int:
        """Number of equality rows."""
        return self.b.size

    def block(self, name: str) -> slice:
        """Row slice of the named block.

        Raises:
            KeyError: If no block has that name
        """
        start = 0
        for label, size in self.row_blocks:
            if label == name:
                return slice(start, start + size)
            start += size
        raise KeyError(name)

    def slack(self, x: np.ndarray) -> np.ndarray:
        """Conic slack h - G x at a point."""
        return self.h - self.G @ x

    def constraint_violation(self, x: np.ndarray) -> float:
        """Largest violation of any constraint at x, replayed from raw data."""
        violation = cone_violation(self.slack(x), self.dims)
        if self.p:
            violation = max(violation, float(np.max(np.abs(self.A @ x - self.b))))
        return violation

    def scaled_objective(self, factor: float) -> "ConeProgram":
        """Same program with the objective multiplied by a positive factor."""
        return ConeProgram(self.c * factor, self.G, self.h, self.dims, self.A, self.b, self.row_blocks)


@dataclass(frozen=True)
class SolveResult:
    """Solver output.

    For OPTIMAL, ``x, s`` are primal and ``y, z`` dual solutions. For
    INFEASIBLE, ``y, z`` hold a Farkas certificate with ``h^T z + b^T y = -1``
    and ``x`` is None. For UNBOUNDED, ``x, s`` hold a direction with
    ``c^T x = -1`` and ``y, z`` are None. For ITERATION_LIMIT every field
    holds the best iterate found.
    """

    status: SolveStatus
    x: Optional[np.ndarray]
    s: Optional[np.ndarray]
    y: Optional[np.ndarray]
    z: Optional[np.ndarray]
    primal_objective: float
    dual_objective: float
    iterations: int
    gap: float
    primal_residual: float = 0.0
    dual_residual: float = 0.0

    @property
    def objective(self) -> float:
        """Primal objective value."""
        return self.primal_objective

    @property
    def relative_gap(self) -> float:
        scale = max(abs(self.primal_objective), abs(self.dual_objective), 1e-300)
        return self.gap / scale

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL
