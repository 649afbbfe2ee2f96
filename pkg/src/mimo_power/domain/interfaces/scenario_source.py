"""Interface for sources of network scenarios."""

from abc import ABC, abstractmethod
from typing import Union

import numpy as np

from mimo_power.domain.entities.scenario import NetworkScenario

Seed = Union[int, np.random.SeedSequence]


class ScenarioSource(ABC):
    """Interface for anything that produces network scenarios."""

    @abstractmethod
    def generate(self, seed: Seed) -> NetworkScenario:
        """Produce a scenario.

        Args:
            seed: Seed or seed sequence controlling all randomness

        Returns:
            NetworkScenario
        """
        pass
