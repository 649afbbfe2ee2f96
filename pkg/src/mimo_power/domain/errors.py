"""Exception hierarchy for mimo-power."""


class MimoPowerError(Exception):
    """Base class for all mimo-power errors."""


class ConfigurationError(MimoPowerError, ValueError):
    """Raised when a scenario, drop or solver configuration is invalid."""


class DimensionMismatchError(MimoPowerError, ValueError):
    """Raised when array or cone dimensions do not agree."""


class SolverBreakdownError(MimoPowerError):
    """Raised when a subproblem solve stops without a usable solution."""


class SubproblemInfeasibleError(MimoPowerError):
    """Raised when a base station's local QoS constraints cannot be met."""

    def __init__(self, cell: int, diagnosis: str):
        """Initialize the error.

        Args:
            cell: Index of the base station whose subproblem is infeasible
            diagnosis: Human-readable description of the failing constraints
        """
        self.cell = cell
        self.diagnosis = diagnosis
        super().__init__(f"Subproblem of BS {cell} is infeasible: {diagnosis}")
