"""Entities of the dual-decomposition state."""

from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from mimo_power.domain.errors import ConfigurationError, DimensionMismatchError


def other_cells(L: int, l: int) -> List[int]:
    """Cells other than l, in increasing order."""
    return [i for i in range(L) if i != l]


def slot(l: int, i: int) -> int:
    """Position of cell i in ``other_cells(L, l)``."""
    if i == l:
        raise ValueError("A cell has no slot in its own neighbour list")
    return i if i < l else i - 1


def _frozen(values, name: str, shape: tuple) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.shape != shape:
        raise DimensionMismatchError(f"{name} must have shape {shape}, got {array.shape}")
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class ConsistencyState:
    """Consistency variables and multipliers shared between iterations.

    Arrays have shape (L, L-1, K). Entry ``[l, j, k]`` with
    ``i = other_cells(L, l)[j]`` refers to the interference BS i causes to
    user k of cell l:

    * ``theta`` is the exact value, computed by BS i;
    * ``theta_tilde`` is the value believed by BS l;
    * ``lam`` is the multiplier of ``theta_tilde - theta``.

    Interference amplitudes are measured in a per-user unit whose square,
    in watts, is supplied by the algorithm that owns the state.
    """

    theta: np.ndarray
    """Exact consistency variables."""

    theta_tilde: np.ndarray
    """Believed consistency variables."""

    lam: np.ndarray
    """Nonnegative Lagrange multipliers."""

    active: Optional[np.ndarray] = field(default=None)
    """Entries that take part in the consistency constraints."""

    def __post_init__(self):
        """Validate shapes and signs."""
        shape = np.shape(self.lam)
        if len(shape) != 3 or shape[1] != max(shape[0] - 1, 0):
            raise DimensionMismatchError(f"State arrays must have shape (L, L-1, K), got {shape}")
        object.__setattr__(self, "theta", _frozen(self.theta, "theta", shape))
        object.__setattr__(self, "theta_tilde", _frozen(self.theta_tilde, "theta_tilde", shape))
        object.__setattr__(self, "lam", _frozen(self.lam, "lam", shape))
        active = np.ones(shape, dtype=bool) if self.active is None else np.array(self.active, dtype=bool)
        if active.shape != shape:
            raise DimensionMismatchError(f"active must have shape {shape}, got {active.shape}")
        active.flags.writeable = False
        object.__setattr__(self, "active", active)
        if np.any(self.lam < 0):
            raise ConfigurationError("Multipliers must be nonnegative")

    @classmethod
    def initial(
        cls,
        L: int,
        K: int,
        multiplier: float = 0.0,
        active: Optional[np.ndarray] = None,
    ) -> "ConsistencyState":
        """Starting state with zero consistency variables.

        Args:
            L: Number of cells
            K: Users per cell
            multiplier: Initial value of every active multiplier
            active: Optional (L, L-1, K) mask of constrained entries

        Returns:
            Initial ConsistencyState
        """
        shape = (L, L - 1, K)
        mask = np.ones(shape, dtype=bool) if active is None else np.asarray(active, dtype=bool)
        return cls(
            theta=np.zeros(shape),
            theta_tilde=np.zeros(shape),
            lam=np.where(mask, multiplier, 0.0),
            active=mask,
        )

    @property
    def L(self) -> int:
        return self.lam.shape[0]

    @property
    def K(self) -> int:
        return self.lam.shape[2]

    @property
    def residual(self) -> np.ndarray:
        """Masked consistency residual theta_tilde - theta."""
        return np.where(self.active, self.theta_tilde - self.theta, 0.0)

    @property
    def max_residual(self) -> float:
        """Largest absolute consistency residual."""
        return float(np.max(np.abs(self.residual), initial=0.0))

    def believed_multipliers(self, l: int) -> np.ndarray:
        """Multipliers on BS l's believed variables, shape (L-1, K)."""
        return np.array(self.lam[l])

    def exact_multipliers(self, l: int) -> np.ndarray:
        """Multipliers on the exact variables BS l computes, shape (L-1, K).

        Row j corresponds to cell ``other_cells(L, l)[j]``.
        """
        rows = [self.lam[i, slot(i, l)] for i in other_cells(self.L, l)]
        return np.array(rows).reshape(self.L - 1, self.K)

    def with_observations(self, theta: np.ndarray, theta_tilde: np.ndarray) -> "ConsistencyState":
        """Copy with new consistency variables and the same multipliers."""
        return replace(self, theta=theta, theta_tilde=theta_tilde)

    def with_multipliers(self, lam: np.ndarray) -> "ConsistencyState":
        """Copy with new multipliers."""
        return replace(self, lam=np.where(self.active, lam, 0.0))

    def in_sqrt_watts(self, amplitude_sq):
        """Exact and believed variables on the sqrt-watt scale.

        Args:
            amplitude_sq: Squared amplitude unit in watts, a scalar or one value
                per user with shape (L, K)
        """
        amplitude = np.sqrt(np.asarray(amplitude_sq, dtype=float))
        if amplitude.ndim == 2:
            amplitude = amplitude[:, np.newaxis, :]
        return self.theta * amplitude, self.theta_tilde * amplitude


@dataclass(frozen=True)
class SubproblemSolution:
    """Optimal point of one BS's local SOCP."""

    cell: int
    """Index l of the BS that solved the subproblem."""

    rho_tilde: np.ndarray
    """Square roots of the BS's transmit powers in watts, shape (K,)."""

    s: float
    """Epigraph value in reference-power units (the local dual function value)."""

    theta_out: np.ndarray
    """Exact interference caused to other cells, shape (L-1, K)."""

    theta_tilde_out: np.ndarray
    """Believed interference received from other cells, shape (L-1, K)."""

    power_unit: float = 1.0
    """Watts per reference-power unit."""

    iterations: int = 0
    """Interior-point iterations used."""

    def __post_init__(self):
        """Check nonnegativity of the sqrt-powers."""
        if np.any(np.asarray(self.rho_tilde) < 0):
            raise ConfigurationError("Sqrt-powers must be nonnegative")

    @property
    def rho(self) -> np.ndarray:
        """Transmit powers in watts."""
        return np.asarray(self.rho_tilde) ** 2

    @property
    def dual_value(self) -> float:
        """Local dual function value in watts."""
        return self.s * self.power_unit


@dataclass(frozen=True)
class IterationTrace:
    """One row of the dual-decomposition convergence trace."""

    iteration: int
    total_power: float
    max_residual: float
    min_sinr_margin: float
    max_qos_violation: float
    exchanged_params: int
    wall_time: float
    dual_value: float
    sinr: np.ndarray = field(compare=False, repr=False)
