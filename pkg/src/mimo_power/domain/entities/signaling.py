"""Backhaul signaling accounting entities."""

from dataclasses import dataclass
from enum import Enum


class Strategy(str, Enum):
    """Implementation strategy for the power minimization problem."""

    CENTRALIZED = "centralized"
    BASIC_DISTRIBUTED = "basic"
    DUAL_DECOMPOSITION = "dual"


class ExecutionPlace(str, Enum):
    """Where the optimization runs."""

    CORE_NETWORK = "core network"
    BASE_STATIONS = "base stations"


@dataclass(frozen=True)
class SignalingLedger:
    """Optimization-variable and exchanged-parameter counts of one strategy."""

    strategy: Strategy
    """Implementation strategy."""

    L: int
    """Number of cells."""

    K: int
    """Users per cell."""

    iterations: int
    """Number of iterations N (1 for non-iterative strategies)."""

    optimization_variables: int
    """Total number of optimization variables over the network."""

    exchanged_parameters: int
    """Total number of parameters exchanged over the backhaul."""

    execution_place: ExecutionPlace
    """Where the problem is solved."""

    def as_row(self) -> dict:
        """Flat dictionary for tabular export."""
        return {
            "strategy": self.strategy.value,
            "execution_place": self.execution_place.value,
            "L": self.L,
            "K": self.K,
            "iterations": self.iterations,
            "optimization_variables": self.optimization_variables,
            "exchanged_parameters": self.exchanged_parameters,
        }
