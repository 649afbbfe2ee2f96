"""Use case for generating a network drop."""

from pathlib import Path
from typing import Optional

from mimo_power.domain.entities.scenario import NetworkScenario
from mimo_power.domain.interfaces.scenario_source import ScenarioSource, Seed
from mimo_power.domain.system_model import compute_estimate_variance
from mimo_power.infrastructure.scenario.scenario_io import write_scenario, write_tensor_csv


class GenerateScenarioUseCase:
    """Use case for drawing a scenario and writing it to disk."""

    def __init__(self, source: ScenarioSource):
        """Initialize the use case.

        Args:
            source: Scenario source, e.g. the wrap-around drop generator
        """
        self.source = source

    def execute(
        self,
        seed: Seed,
        output: Path,
        tensor_dir: Optional[Path] = None,
    ) -> NetworkScenario:
        """Execute the use case.

        Args:
            seed: Drop seed
            output: Scenario file to write
            tensor_dir: If given, beta.csv and gamma.csv are exported there

        Returns:
            The generated scenario
        """
        scenario = self.source.generate(seed)
        write_scenario(output, scenario)
        if tensor_dir is not None:
            tensor_dir = Path(tensor_dir)
            tensor_dir.mkdir(parents=True, exist_ok=True)
            write_tensor_csv(tensor_dir / "beta.csv", scenario.beta)
            write_tensor_csv(tensor_dir / "gamma.csv", compute_estimate_variance(scenario))
        return scenario
