"""Network scenario entities holding all large-scale system quantities."""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from mimo_power.domain.errors import ConfigurationError, DimensionMismatchError


def _frozen_array(values, name: str, shape: tuple) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.shape != shape:
        raise DimensionMismatchError(f"{name} must have shape {shape}, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ConfigurationError(f"{name} contains non-finite entries")
    array.flags.writeable = False
    return array


class PrecodingScheme(str, Enum):
    """Linear downlink precoding scheme."""

    MR = "MR"
    ZF = "ZF"


@dataclass(frozen=True)
class ScenarioConfig:
    """Dimensions of a multi-cell Massive MIMO network.

    Pilots are reused in every cell, so the pilot length equals the number
    of users per cell.
    """

    L: int
    """Number of cells (one BS per cell)."""

    K: int
    """Single-antenna users per cell."""

    M: int
    """Antennas per BS."""

    tau_c: int = 200
    """Coherence interval length in symbols."""

    tau_p: Optional[int] = None
    """Pilot length in symbols. Defaults to K."""

    def __post_init__(self):
        """Validate dimensions."""
        if self.tau_p is None:
            object.__setattr__(self, "tau_p", self.K)
        if self.L < 1:
            raise ConfigurationError(f"L must be at least 1, got {self.L}")
        if self.K < 1:
            raise ConfigurationError(f"K must be at least 1, got {self.K}")
        if self.M <= self.K:
            raise ConfigurationError(f"M must exceed K, got M={self.M}, K={self.K}")
        if self.tau_p != self.K:
            raise ConfigurationError(f"tau_p must equal K={self.K}, got {self.tau_p}")
        if self.tau_p >= self.tau_c:
            raise ConfigurationError(
                f"tau_p must be shorter than tau_c, got tau_p={self.tau_p}, tau_c={self.tau_c}"
            )

    @property
    def pre_log_factor(self) -> float:
        """Fraction of the coherence interval used for data."""
        return 1.0 - self.tau_p / self.tau_c

    def array_gain(self, scheme: PrecodingScheme) -> int:
        """Array gain G of the given precoding scheme."""
        return self.M if scheme is PrecodingScheme.MR else self.M - self.K


@dataclass(frozen=True)
class NetworkScenario:
    """All large-scale parameters of one network realization.

    Index convention: ``beta[l, i, k]`` is the large-scale fading between
    user k of cell i and BS l. Every quantity is in linear scale.
    """

    config: ScenarioConfig
    """Network dimensions."""

    beta: np.ndarray
    """Large-scale fading coefficients, shape (L, L, K)."""

    pilot_power: np.ndarray
    """UL pilot power per user in watts, shape (L, K)."""

    sigma_ul_sq: float
    """UL noise power in watts."""

    sigma_dl_sq: float
    """DL noise power in watts."""

    p_max: np.ndarray
    """Per-BS DL power budget in watts, shape (L,)."""

    qos_se: np.ndarray
    """Required spectral efficiency per user in b/s/Hz, shape (L, K)."""

    def __post_init__(self):
        """Validate shapes and signs, and freeze the arrays."""
        L, K = self.config.L, self.config.K
        object.__setattr__(self, "beta", _frozen_array(self.beta, "beta", (L, L, K)))
        object.__setattr__(
            self, "pilot_power", _frozen_array(self.pilot_power, "pilot_power", (L, K))
        )
        object.__setattr__(self, "p_max", _frozen_array(self.p_max, "p_max", (L,)))
        object.__setattr__(self, "qos_se", _frozen_array(self.qos_se, "qos_se", (L, K)))
        object.__setattr__(self, "sigma_ul_sq", float(self.sigma_ul_sq))
        object.__setattr__(self, "sigma_dl_sq", float(self.sigma_dl_sq))

        if np.any(self.beta <= 0):
            raise ConfigurationError("All beta entries must be positive")
        if np.any(self.pilot_power <= 0):
            raise ConfigurationError("All pilot powers must be positive")
        if np.any(self.p_max <= 0):
            raise ConfigurationError("All power budgets must be positive")
        if np.any(self.qos_se < 0):
            raise ConfigurationError("QoS targets must be nonnegative")
        if self.sigma_ul_sq < 0 or self.sigma_dl_sq < 0:
            raise ConfigurationError("Noise powers must be nonnegative")

    @property
    def L(self) -> int:
        """Number of cells."""
        return self.config.L

    @property
    def K(self) -> int:
        """Users per cell."""
        return self.config.K

    def with_qos(self, qos_se) -> "NetworkScenario":
        """Copy of this scenario with different QoS targets."""
        return replace(self, qos_se=np.array(qos_se, dtype=float))

    def with_noise(self, sigma_dl_sq: float) -> "NetworkScenario":
        """Copy of this scenario with a different DL noise power."""
        return replace(self, sigma_dl_sq=sigma_dl_sq)


@dataclass(frozen=True)
class EffectiveGains:
    """Precoding-dependent quantities entering the closed-form SINR.

    ``gamma[l, i, k]`` is the estimate variance of user k of cell i at BS l
    and ``z_gain[l, i, k]`` the matching non-coherent interference gain.
    """

    scheme: PrecodingScheme
    """Precoding scheme the gains belong to."""

    G: int
    """Array gain: M for MR, M - K for ZF."""

    gamma: np.ndarray
    """Channel-estimate variances, shape (L, L, K)."""

    z_gain: np.ndarray
    """Non-coherent interference gains, shape (L, L, K)."""

    def __post_init__(self):
        """Freeze arrays and check signs."""
        gamma = np.array(self.gamma, dtype=float)
        z_gain = np.array(self.z_gain, dtype=float)
        if gamma.shape != z_gain.shape or gamma.ndim != 3:
            raise DimensionMismatchError(
                f"gamma and z_gain must share an (L, L, K) shape, got {gamma.shape}, {z_gain.shape}"
            )
        if np.any(gamma <= 0):
            raise ConfigurationError("Estimate variances must be positive")
        if np.any(z_gain < 0):
            raise ConfigurationError("Interference gains must be nonnegative")
        gamma.flags.writeable = False
        z_gain.flags.writeable = False
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "z_gain", z_gain)

    @property
    def own_gamma(self) -> np.ndarray:
        """Estimate variance of each user at its own BS, shape (L, K)."""
        L = self.gamma.shape[0]
        return self.gamma[np.arange(L), np.arange(L), :]

    @property
    def own_z(self) -> np.ndarray:
        """Non-coherent gain of each user from its own BS, shape (L, K)."""
        L = self.z_gain.shape[0]
        return self.z_gain[np.arange(L), np.arange(L), :]


@dataclass(frozen=True)
class SinrTargets:
    """Linear SINR targets equivalent to the per-user QoS requirements."""

    xi_hat: np.ndarray
    """Target SINR per user, shape (L, K)."""

    def __post_init__(self):
        """Freeze and check sign."""
        xi_hat = np.array(self.xi_hat, dtype=float)
        if np.any(xi_hat < 0):
            raise ConfigurationError("SINR targets must be nonnegative")
        xi_hat.flags.writeable = False
        object.__setattr__(self, "xi_hat", xi_hat)

    @property
    def active(self) -> np.ndarray:
        """Mask of users with a nonzero target."""
        return self.xi_hat > 0

    def scaled(self, factor: float) -> "SinrTargets":
        """Targets multiplied by a nonnegative factor."""
        return SinrTargets(self.xi_hat * factor)


@dataclass(frozen=True)
class PowerAllocation:
    """DL transmit powers of every user."""

    rho: np.ndarray
    """Transmit power per user in watts, shape (L, K)."""

    feasible: bool = True
    """Whether the allocation respects every per-BS budget."""

    p_max: Optional[np.ndarray] = field(default=None, compare=False)
    """Budgets the feasibility flag was checked against, if any."""

    def __post_init__(self):
        """Validate powers and budgets."""
        rho = np.array(self.rho, dtype=float)
        if rho.ndim != 2:
            raise DimensionMismatchError(f"rho must be an (L, K) array, got shape {rho.shape}")
        if np.any(rho < 0):
            raise ConfigurationError("Powers must be nonnegative")
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)
        if self.feasible and self.p_max is not None:
            if np.any(rho.sum(axis=1) > np.asarray(self.p_max) * (1 + 1e-6)):
                raise ConfigurationError("Allocation marked feasible exceeds a power budget")

    @classmethod
    def zeros(cls, L: int, K: int) -> "PowerAllocation":
        """All-zero allocation."""
        return cls(np.zeros((L, K)))

    @property
    def total_power(self) -> float:
        """Sum of all transmit powers in watts."""
        return float(self.rho.sum())

    @property
    def per_bs_power(self) -> np.ndarray:
        """Total transmit power of each BS in watts."""
        return self.rho.sum(axis=1)
