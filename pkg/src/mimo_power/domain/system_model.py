"""Closed-form expressions of the multi-cell Massive MIMO system model.

Every solver consumes these functions. Arrays follow the ``[l, i, k]``
convention of :class:`NetworkScenario`: BS ``l`` observes user ``k`` of
cell ``i``.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from mimo_power.domain.entities.scenario import (
    EffectiveGains,
    NetworkScenario,
    PowerAllocation,
    PrecodingScheme,
    ScenarioConfig,
    SinrTargets,
)

ArrayLike = Union[float, np.ndarray]


def db_to_linear(value_db: ArrayLike) -> ArrayLike:
    """Convert a dB quantity to linear scale."""
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value: ArrayLike) -> ArrayLike:
    """Convert a linear quantity to dB."""
    return 10.0 * np.log10(np.asarray(value, dtype=float))


def dbm_to_watts(value_dbm: ArrayLike) -> ArrayLike:
    """Convert a power in dBm to watts."""
    return db_to_linear(np.asarray(value_dbm, dtype=float) - 30.0)


def compute_estimate_variance(scenario: NetworkScenario) -> np.ndarray:
    """Variance of the MMSE channel estimate for every (BS, cell, user) triple.

    Args:
        scenario: Network scenario

    Returns:
        Array ``gamma`` of shape (L, L, K) with
        ``gamma[l, i, k] = p_ik tau_p beta[l, i, k]^2 / (sum_i' p_i'k tau_p beta[l, i', k] + sigma_ul^2)``
    """
    tau_p = scenario.config.tau_p
    received = tau_p * scenario.pilot_power[np.newaxis, :, :] * scenario.beta
    denominator = received.sum(axis=1, keepdims=True) + scenario.sigma_ul_sq
    gamma = received * scenario.beta / denominator
    return np.minimum(gamma, scenario.beta)


def compute_effective_gains(
    scenario: NetworkScenario,
    scheme: PrecodingScheme = PrecodingScheme.ZF,
) -> EffectiveGains:
    """Array gain, estimate variances and non-coherent gains of a scheme.

    Args:
        scenario: Network scenario
        scheme: MR or ZF precoding

    Returns:
        EffectiveGains with G = M (MR) or M - K (ZF)
    """
    gamma = compute_estimate_variance(scenario)
    if scheme is PrecodingScheme.MR:
        z_gain = np.array(scenario.beta)
    else:
        z_gain = np.maximum(scenario.beta - gamma, 0.0)
    return EffectiveGains(
        scheme=scheme,
        G=scenario.config.array_gain(scheme),
        gamma=gamma,
        z_gain=z_gain,
    )


@dataclass(frozen=True)
class SinrTerms:
    """Numerator and interference terms of the closed-form SINR, each (L, K)."""

    signal: np.ndarray
    coherent: np.ndarray
    noncoherent: np.ndarray
    noise: float

    @property
    def sinr(self) -> np.ndarray:
        return self.signal / (self.coherent + self.noncoherent + self.noise)


def _as_rho(rho: Union[PowerAllocation, np.ndarray]) -> np.ndarray:
    if isinstance(rho, PowerAllocation):
        return rho.rho
    array = np.asarray(rho, dtype=float)
    if np.any(array < 0):
        raise ValueError("Powers must be nonnegative")
    return array


def sinr_terms(
    rho: Union[PowerAllocation, np.ndarray],
    gains: EffectiveGains,
    scenario: NetworkScenario,
) -> SinrTerms:
    """Evaluate every term of the closed-form SINR for all users at once."""
    rho = _as_rho(rho)
    G = gains.G
    signal = G * rho * gains.own_gamma
    # coherent[l, k] = G sum_{i != l} rho[i, k] gamma[i, l, k]
    coherent = G * np.einsum("ik,ilk->lk", rho, gains.gamma) - signal
    noncoherent = np.einsum("i,ilk->lk", rho.sum(axis=1), gains.z_gain)
    return SinrTerms(
        signal=signal,
        coherent=np.maximum(coherent, 0.0),
        noncoherent=noncoherent,
        noise=scenario.sigma_dl_sq,
    )


def sinr_matrix(
    rho: Union[PowerAllocation, np.ndarray],
    gains: EffectiveGains,
    scenario: NetworkScenario,
) -> np.ndarray:
    """Closed-form SINR of every user, shape (L, K)."""
    return sinr_terms(rho, gains, scenario).sinr


def closed_form_sinr(
    rho: Union[PowerAllocation, np.ndarray],
    gains: EffectiveGains,
    scenario: NetworkScenario,
    l: int,
    k: int,
) -> float:
    """Closed-form effective SINR of user k in cell l.

    Args:
        rho: Transmit powers, shape (L, K)
        gains: Effective gains of the precoding scheme
        scenario: Network scenario (provides the DL noise)
        l: Cell index
        k: User index

    Returns:
        ``G rho_lk gamma_lk^l / (G sum_{i != l} rho_ik gamma_lk^i + sum_i sum_t rho_it z_lk^i + sigma_dl^2)``

    Raises:
        IndexError: If l or k is out of range
    """
    if not 0 <= l < scenario.L:
        raise IndexError(f"Cell index {l} out of range for L={scenario.L}")
    if not 0 <= k < scenario.K:
        raise IndexError(f"User index {k} out of range for K={scenario.K}")
    rho = _as_rho(rho)
    G = gains.G
    signal = G * rho[l, k] * gains.gamma[l, l, k]
    coherent = G * sum(rho[i, k] * gains.gamma[i, l, k] for i in range(scenario.L) if i != l)
    noncoherent = sum(
        rho[i, :].sum() * gains.z_gain[i, l, k] for i in range(scenario.L)
    )
    denominator = coherent + noncoherent + scenario.sigma_dl_sq
    if denominator == 0:
        return 0.0
    return float(signal / denominator)


def intercell_interference(
    rho: Union[PowerAllocation, np.ndarray],
    gains: EffectiveGains,
) -> np.ndarray:
    """Interference BS i causes to each user of cell l.

    Returns:
        Array of shape (L, L, K) where entry ``[l, i, k]`` is
        ``G rho_ik gamma_lk^i + sum_t rho_it z_lk^i``. The diagonal ``i == l``
        is zero; local interference is returned by :func:`local_interference`.
    """
    rho = _as_rho(rho)
    L = rho.shape[0]
    G = gains.G
    # gamma/z are indexed [bs, cell, user]; transpose to [cell, bs, user]
    coherent = G * rho[np.newaxis, :, :] * np.transpose(gains.gamma, (1, 0, 2))
    noncoherent = rho.sum(axis=1)[np.newaxis, :, np.newaxis] * np.transpose(gains.z_gain, (1, 0, 2))
    interference = coherent + noncoherent
    interference[np.arange(L), np.arange(L), :] = 0.0
    return interference


def local_interference(
    rho: Union[PowerAllocation, np.ndarray],
    gains: EffectiveGains,
) -> np.ndarray:
    """Non-coherent interference each user receives from its own BS, shape (L, K)."""
    rho = _as_rho(rho)
    return rho.sum(axis=1)[:, np.newaxis] * gains.own_z


def regrouped_denominator(
    rho: Union[PowerAllocation, np.ndarray],
    gains: EffectiveGains,
    scenario: NetworkScenario,
) -> np.ndarray:
    """SINR denominator written as local interference plus per-cell blocks.

    Equals the closed-form denominator; this grouping is the one the
    distributed algorithm decouples through its consistency variables.
    """
    return (
        local_interference(rho, gains)
        + intercell_interference(rho, gains).sum(axis=1)
        + scenario.sigma_dl_sq
    )


def se_from_sinr(sinr: ArrayLike, config: ScenarioConfig) -> ArrayLike:
    """Spectral efficiency in b/s/Hz achieved at a given SINR.

    Args:
        sinr: SINR value or array, nonnegative
        config: Scenario dimensions (provides the pilot overhead)

    Returns:
        ``(1 - tau_p / tau_c) log2(1 + sinr)``
    """
    values = np.asarray(sinr, dtype=float)
    if np.any(values < 0):
        raise ValueError("SINR must be nonnegative")
    se = config.pre_log_factor * np.log2(1.0 + values)
    return float(se) if se.ndim == 0 else se


def sinr_from_se(se: ArrayLike, config: ScenarioConfig) -> ArrayLike:
    """SINR needed to reach a spectral efficiency."""
    values = np.asarray(se, dtype=float)
    exponent = config.tau_c * values / (config.tau_c - config.tau_p)
    sinr = np.exp2(exponent) - 1.0
    return float(sinr) if sinr.ndim == 0 else sinr


def qos_to_sinr_target(scenario: NetworkScenario) -> SinrTargets:
    """Convert per-user QoS requirements to linear SINR targets.

    Applies ``xi_hat = 2^(tau_c xi / (tau_c - tau_p)) - 1`` elementwise.
    """
    xi_hat = sinr_from_se(scenario.qos_se, scenario.config)
    xi_hat = np.where(scenario.qos_se == 0, 0.0, xi_hat)
    return SinrTargets(xi_hat)


def reference_power(gains: EffectiveGains, targets: SinrTargets, scenario: NetworkScenario) -> float:
    """Mean noise-limited power needed to meet the active SINR targets.

    Used as the power unit of the optimization problems so that their
    variables are of order one regardless of the pathloss scale.
    """
    active = targets.active
    if not np.any(active):
        return 1.0
    noise_limited = targets.xi_hat * scenario.sigma_dl_sq / (gains.G * gains.own_gamma)
    unit = float(noise_limited[active].mean())
    return unit if unit > 0 else 1.0
