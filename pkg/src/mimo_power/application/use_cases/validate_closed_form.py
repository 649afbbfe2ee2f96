"""Use case for checking the closed-form SINR against simulation."""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from mimo_power.domain.entities.scenario import NetworkScenario, PrecodingScheme
from mimo_power.domain.interfaces.scenario_source import Seed
from mimo_power.domain.system_model import compute_effective_gains
from mimo_power.infrastructure.channel.monte_carlo import (
    EstimateReport,
    SinrTermsReport,
    simulate_estimates,
    simulate_sinr_terms,
)


@dataclass(frozen=True)
class ValidationReport:
    """Estimate-variance and SINR-term comparisons of one scenario."""

    estimates: EstimateReport
    terms: SinrTermsReport

    def to_frame(self) -> pd.DataFrame:
        return pd.concat([self.estimates.to_frame(), self.terms.to_frame()], ignore_index=True)

    @property
    def max_abs_z(self) -> float:
        return float(self.to_frame()["z_score"].abs().max())


class ValidateClosedFormUseCase:
    """Use case for Monte-Carlo validation of the closed-form expressions."""

    def __init__(self, batch_size: int = 256):
        """Initialize the use case.

        Args:
            batch_size: Channel realizations per simulation batch
        """
        self.batch_size = batch_size

    def execute(
        self,
        scenario: NetworkScenario,
        scheme: PrecodingScheme,
        draws: int,
        seed: Seed,
        rho: Optional[np.ndarray] = None,
        output: Optional[Path] = None,
    ) -> ValidationReport:
        """Execute the use case.

        Args:
            scenario: Network scenario
            scheme: Precoding scheme to validate
            draws: Channel realizations per simulation
            seed: Master seed; the two simulations use spawned children
            rho: DL powers in watts; defaults to an equal split of each budget
            output: If given, the report table is written there as CSV

        Returns:
            ValidationReport
        """
        if rho is None:
            rho = np.repeat(scenario.p_max[:, np.newaxis] / scenario.K, scenario.K, axis=1)
        root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        estimates_seed, terms_seed = root.spawn(2)
        gains = compute_effective_gains(scenario, scheme)
        report = ValidationReport(
            estimates=simulate_estimates(scenario, draws, estimates_seed, self.batch_size),
            terms=simulate_sinr_terms(scenario, gains, rho, draws, terms_seed, self.batch_size),
        )
        if output is not None:
            report.to_frame().to_csv(output, index=False, float_format="%.17g")
        return report
