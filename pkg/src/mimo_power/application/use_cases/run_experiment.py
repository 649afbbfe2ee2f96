"""Use case for running a Monte-Carlo experiment."""

from pathlib import Path
from typing import Optional

from mimo_power.application.services.experiment_service import (
    ExperimentMode,
    ExperimentResult,
    ExperimentService,
)


class RunExperimentUseCase:
    """Use case for running an experiment and writing its table."""

    def __init__(self, experiment_service: ExperimentService):
        """Initialize the use case.

        Args:
            experiment_service: Configured experiment service
        """
        self.experiment_service = experiment_service

    def execute(self, mode: ExperimentMode, output: Optional[Path] = None) -> ExperimentResult:
        """Execute the use case.

        Args:
            mode: Experiment mode
            output: CSV file for the result table

        Returns:
            ExperimentResult of the run
        """
        result = self.experiment_service.run(mode)
        if output is not None:
            result.table.to_csv(output, index=False, float_format="%.17g")
        return result
