"""Monte-Carlo simulation of pilot training and linear precoding.

Small-scale fading is i.i.d. Rayleigh: every complex channel entry is built
from a pair of real Gaussians with variance beta/2 each. Draws are processed
in batches, each seeded from a child of the caller's SeedSequence, so runs
are bit-reproducible for a given seed, draw count and batch size.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from mimo_power.domain.entities.scenario import EffectiveGains, NetworkScenario, PrecodingScheme
from mimo_power.domain.errors import DimensionMismatchError
from mimo_power.domain.interfaces.scenario_source import Seed
from mimo_power.domain.system_model import compute_estimate_variance, se_from_sinr, sinr_matrix

logger = logging.getLogger(__name__)

SINGULAR_CONDITION = 1e12
REPORT_COLUMNS = ["term", "l", "k", "i", "t", "analytic", "empirical", "standard_error", "z_score"]


def pilot_book(tau_p: int) -> np.ndarray:
    """DFT pilot book; column k is pilot psi_k with squared norm tau_p."""
    n = np.arange(tau_p)
    return np.exp(-2j * np.pi * np.outer(n, n) / tau_p)


def draw_channels(scenario: NetworkScenario, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n channel realizations.

    Returns:
        Array of shape (n, L, L, K, M); entry ``[:, l, i, k]`` is the channel
        from BS l to user k of cell i
    """
    L, K, M = scenario.L, scenario.K, scenario.config.M
    shape = (n, L, L, K, M)
    scale = np.sqrt(scenario.beta / 2.0)[np.newaxis, :, :, :, np.newaxis]
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def receive_pilots(scenario: NetworkScenario, h: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Pilot observations despread with each pilot.

    Builds the received training matrix of every BS and correlates it with
    each pilot sequence.

    Returns:
        Array of shape (n, L, K, M): ``Y_l psi_k^*`` for BS l and pilot k
    """
    tau_p = scenario.config.tau_p
    psi = pilot_book(tau_p)
    amplitude = np.sqrt(scenario.pilot_power)
    received = np.einsum("nlikm,ik,pk->nlmp", h, amplitude, psi, optimize=True)
    if scenario.sigma_ul_sq > 0:
        scale = np.sqrt(scenario.sigma_ul_sq / 2.0)
        received = received + scale * (
            rng.standard_normal(received.shape) + 1j * rng.standard_normal(received.shape)
        )
    return np.einsum("nlmp,pk->nlkm", received, psi.conj())


def mmse_estimates(scenario: NetworkScenario, despread: np.ndarray) -> np.ndarray:
    """MMSE channel estimates from despread pilot observations.

    Returns:
        Array of shape (n, L, L, K, M) aligned with :func:`draw_channels`
    """
    tau_p = scenario.config.tau_p
    pilot_power = scenario.pilot_power[np.newaxis, :, :]
    total = (tau_p * pilot_power * scenario.beta).sum(axis=1) + scenario.sigma_ul_sq
    coefficient = np.sqrt(pilot_power) * scenario.beta / total[:, np.newaxis, :]
    return coefficient[np.newaxis, :, :, :, np.newaxis] * despread[:, :, np.newaxis, :, :]


def own_estimates(estimates: np.ndarray) -> np.ndarray:
    """Estimates of each BS's own users, shape (n, L, K, M)."""
    L = estimates.shape[1]
    return estimates[:, np.arange(L), np.arange(L)]


def compute_precoders(estimates: np.ndarray, gains: EffectiveGains) -> Tuple[np.ndarray, np.ndarray]:
    """Normalized MR or ZF precoders of every BS.

    Args:
        estimates: MMSE estimates, shape (n, L, L, K, M)
        gains: Effective gains of the scheme (provide G and gamma)

    Returns:
        Tuple of precoders w of shape (n, L, K, M) and a mask of shape (n,)
        that is False for draws with an ill-conditioned ZF Gram matrix
    """
    own = own_estimates(estimates)
    scale = np.sqrt(gains.G * gains.own_gamma)[np.newaxis, :, :, np.newaxis]
    if gains.scheme is PrecodingScheme.MR:
        return own / scale, np.ones(own.shape[0], dtype=bool)

    gram = np.einsum("nltm,nlsm->nlts", own.conj(), own)
    condition = np.linalg.cond(gram)
    well_posed = np.isfinite(condition) & (condition < SINGULAR_CONDITION)
    gram[~well_posed] = np.eye(gram.shape[-1])
    # w_t = H (H^H H)^{-1} e_t, stored with the user index before antennas
    pseudo = np.swapaxes(own, -1, -2) @ np.linalg.inv(gram)
    w = np.swapaxes(pseudo, -1, -2) * scale
    return w, np.all(well_posed, axis=1)


def precoded_gains(h: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Effective scalar channels ``g[n, l, k, i, t] = h_{i->(l,k)}^H w_{i,t}``."""
    return np.einsum("nilkm,nitm->nlkit", h.conj(), w, optimize=True)


def zf_leakage(estimates: np.ndarray, w: np.ndarray) -> float:
    """Largest normalized leakage of a precoder onto other local estimates."""
    own = own_estimates(estimates)
    inner = np.abs(np.einsum("nltm,nlsm->nlts", own.conj(), w))
    norms = np.linalg.norm(own, axis=-1)[..., :, np.newaxis] * np.linalg.norm(w, axis=-1)[..., np.newaxis, :]
    K = own.shape[2]
    off_diagonal = ~np.eye(K, dtype=bool)
    return float((inner / norms)[..., off_diagonal].max()) if K > 1 else 0.0


def _batch_root(seed: Seed) -> np.random.SeedSequence:
    """Unspawned copy of the seed, so a caller's SeedSequence is left untouched."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key, pool_size=seed.pool_size)
    return np.random.SeedSequence(seed)


def _batches(n_draws: int, batch_size: int):
    if n_draws < 1:
        raise ValueError(f"n_draws must be positive, got {n_draws}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be positive, got {batch_size}")
    full, rest = divmod(n_draws, batch_size)
    return [batch_size] * full + ([rest] if rest else [])


def _z_scores(analytic: np.ndarray, empirical: np.ndarray, standard_error: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (empirical - analytic) / standard_error
    return np.where(standard_error > 0, z, np.where(empirical == analytic, 0.0, np.inf))


@dataclass(frozen=True)
class EstimateReport:
    """Empirical channel and estimate variances against the analytic ones."""

    analytic_gamma: np.ndarray
    """Closed-form estimate variances, shape (L, L, K)."""

    empirical_gamma: np.ndarray
    """Per-antenna sample variance of the MMSE estimates."""

    gamma_standard_error: np.ndarray
    """Standard error of ``empirical_gamma``."""

    empirical_beta: np.ndarray
    """Per-antenna sample variance of the channels."""

    beta_standard_error: np.ndarray
    """Standard error of ``empirical_beta``."""

    analytic_beta: np.ndarray
    """Large-scale fading the channels were drawn with."""

    draws: int
    """Number of channel realizations."""

    @property
    def gamma_z_scores(self) -> np.ndarray:
        return _z_scores(self.analytic_gamma, self.empirical_gamma, self.gamma_standard_error)

    @property
    def max_relative_error(self) -> float:
        """Largest relative deviation of the empirical estimate variance."""
        return float(np.max(np.abs(self.empirical_gamma / self.analytic_gamma - 1.0)))

    def to_frame(self) -> pd.DataFrame:
        """Report rows ``term,l,k,i,t,analytic,empirical,standard_error,z_score``."""
        frames = []
        for term, analytic, empirical, se in (
            ("gamma", self.analytic_gamma, self.empirical_gamma, self.gamma_standard_error),
            ("beta", self.analytic_beta, self.empirical_beta, self.beta_standard_error),
        ):
            l, i, k = np.meshgrid(*(np.arange(n) for n in analytic.shape), indexing="ij")
            frames.append(pd.DataFrame({
                "term": term,
                "l": l.ravel(),
                "k": k.ravel(),
                "i": i.ravel(),
                "t": k.ravel(),
                "analytic": analytic.ravel(),
                "empirical": empirical.ravel(),
                "standard_error": se.ravel(),
                "z_score": _z_scores(analytic, empirical, se).ravel(),
            }))
        return pd.concat(frames, ignore_index=True)[REPORT_COLUMNS]


def simulate_estimates(
    scenario: NetworkScenario,
    n_draws: int,
    seed: Seed,
    batch_size: int = 256,
) -> EstimateReport:
    """Estimate the MMSE estimate variance by simulation.

    Args:
        scenario: Network scenario
        n_draws: Number of channel realizations
        seed: Integer seed or SeedSequence
        batch_size: Realizations processed per batch

    Returns:
        EstimateReport comparing against the closed-form variance
    """
    root = _batch_root(seed)
    shape = scenario.beta.shape
    sums = {name: np.zeros(shape) for name in ("gamma", "gamma_sq", "beta", "beta_sq")}
    for size in _batches(n_draws, batch_size):
        rng = np.random.default_rng(root.spawn(1)[0])
        h = draw_channels(scenario, size, rng)
        estimates = mmse_estimates(scenario, receive_pilots(scenario, h, rng))
        # per-draw antenna averages are i.i.d. across draws
        estimate_power = np.mean(np.abs(estimates) ** 2, axis=-1)
        channel_power = np.mean(np.abs(h) ** 2, axis=-1)
        sums["gamma"] += estimate_power.sum(axis=0)
        sums["gamma_sq"] += (estimate_power ** 2).sum(axis=0)
        sums["beta"] += channel_power.sum(axis=0)
        sums["beta_sq"] += (channel_power ** 2).sum(axis=0)

    def mean_and_error(first: np.ndarray, second: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        mean = first / n_draws
        variance = np.maximum(second / n_draws - mean ** 2, 0.0)
        return mean, np.sqrt(variance / n_draws)

    gamma, gamma_se = mean_and_error(sums["gamma"], sums["gamma_sq"])
    beta, beta_se = mean_and_error(sums["beta"], sums["beta_sq"])
    return EstimateReport(
        analytic_gamma=compute_estimate_variance(scenario),
        empirical_gamma=gamma,
        gamma_standard_error=gamma_se,
        empirical_beta=beta,
        beta_standard_error=beta_se,
        analytic_beta=np.array(scenario.beta),
        draws=n_draws,
    )


class _GainMoments:
    """Running moments of the precoded gains about their analytic means."""

    def __init__(self, analytic_mean: np.ndarray, L: int, K: int):
        self.analytic_mean = analytic_mean
        self.count = 0
        self.shift = np.zeros(analytic_mean.shape, dtype=complex)
        self.real_sq = np.zeros(analytic_mean.shape)
        self.power = np.zeros(analytic_mean.shape)
        self.power_sq = np.zeros(analytic_mean.shape)
        self.norm = np.zeros((L, K))
        self.norm_sq = np.zeros((L, K))

    def add(self, g: np.ndarray, w: np.ndarray):
        d = g - self.analytic_mean
        power = np.abs(d) ** 2
        self.count += g.shape[0]
        self.shift += d.sum(axis=0)
        self.real_sq += (d.real ** 2).sum(axis=0)
        self.power += power.sum(axis=0)
        self.power_sq += (power ** 2).sum(axis=0)
        norm = np.sum(np.abs(w) ** 2, axis=-1)
        self.norm += norm.sum(axis=0)
        self.norm_sq += (norm ** 2).sum(axis=0)


@dataclass(frozen=True)
class SinrTermsReport:
    """Empirical moments of the precoded channels against the closed form.

    Arrays indexed ``[l, k, i, t]`` describe the gain from the precoder of
    user t in cell i to user k in cell l.
    """

    scheme: PrecodingScheme
    analytic_mean: np.ndarray
    empirical_mean: np.ndarray
    mean_standard_error: np.ndarray
    analytic_variance: np.ndarray
    empirical_variance: np.ndarray
    variance_standard_error: np.ndarray
    precoder_norm: np.ndarray
    """Empirical E||w||^2 per precoder, shape (L, K)."""
    precoder_norm_standard_error: np.ndarray
    closed_form_sinr: np.ndarray
    empirical_sinr: np.ndarray
    """Use-and-then-forget SINR from the empirical moments, shape (L, K)."""
    closed_form_se: np.ndarray
    empirical_se: np.ndarray
    draws: int
    singular_draws: int
    """Draws discarded because a ZF Gram matrix was ill-conditioned."""
    max_zf_leakage: Optional[float] = None

    @property
    def mean_z_scores(self) -> np.ndarray:
        return _z_scores(self.analytic_mean, self.empirical_mean, self.mean_standard_error)

    @property
    def variance_z_scores(self) -> np.ndarray:
        return _z_scores(self.analytic_variance, self.empirical_variance, self.variance_standard_error)

    @property
    def precoder_norm_z_scores(self) -> np.ndarray:
        return _z_scores(np.ones_like(self.precoder_norm), self.precoder_norm, self.precoder_norm_standard_error)

    @property
    def se_relative_error(self) -> np.ndarray:
        """Relative deviation of the empirical SE from the closed-form SE."""
        return np.abs(self.empirical_se - self.closed_form_se) / self.closed_form_se

    def power_terms(self) -> pd.DataFrame:
        """Signal and coherent-interference power rows (``t == k``)."""
        L, K = self.analytic_mean.shape[:2]
        rows = []
        for l in range(L):
            for k in range(K):
                for i in range(L):
                    analytic = self.analytic_mean[l, k, i, k] ** 2
                    empirical = self.empirical_mean[l, k, i, k] ** 2
                    se = 2.0 * abs(self.empirical_mean[l, k, i, k]) * self.mean_standard_error[l, k, i, k]
                    rows.append({
                        "term": "signal" if i == l else "coherent",
                        "l": l, "k": k, "i": i, "t": k,
                        "analytic": analytic,
                        "empirical": empirical,
                        "standard_error": se,
                        "z_score": float(_z_scores(np.array(analytic), np.array(empirical), np.array(se))),
                    })
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    def to_frame(self) -> pd.DataFrame:
        """Report rows ``term,l,k,i,t,analytic,empirical,standard_error,z_score``."""
        L, K = self.analytic_mean.shape[:2]
        l, k, i, t = np.meshgrid(np.arange(L), np.arange(K), np.arange(L), np.arange(K), indexing="ij")
        index = {"l": l.ravel(), "k": k.ravel(), "i": i.ravel(), "t": t.ravel()}
        leakage = (t != k).ravel()
        mean_rows = pd.DataFrame({
            "term": "leakage",
            **index,
            "analytic": self.analytic_mean.ravel(),
            "empirical": self.empirical_mean.ravel(),
            "standard_error": self.mean_standard_error.ravel(),
            "z_score": self.mean_z_scores.ravel(),
        })[leakage]
        variance_rows = pd.DataFrame({
            "term": "noncoherent",
            **index,
            "analytic": self.analytic_variance.ravel(),
            "empirical": self.empirical_variance.ravel(),
            "standard_error": self.variance_standard_error.ravel(),
            "z_score": self.variance_z_scores.ravel(),
        })
        cells, users = np.meshgrid(np.arange(L), np.arange(K), indexing="ij")
        norm_rows = pd.DataFrame({
            "term": "precoder_norm",
            "l": cells.ravel(), "k": users.ravel(), "i": cells.ravel(), "t": users.ravel(),
            "analytic": 1.0,
            "empirical": self.precoder_norm.ravel(),
            "standard_error": self.precoder_norm_standard_error.ravel(),
            "z_score": self.precoder_norm_z_scores.ravel(),
        })
        frame = pd.concat([self.power_terms(), mean_rows, variance_rows, norm_rows], ignore_index=True)
        return frame[REPORT_COLUMNS]


def simulate_sinr_terms(
    scenario: NetworkScenario,
    gains: EffectiveGains,
    rho: np.ndarray,
    n_draws: int,
    seed: Seed,
    batch_size: int = 256,
) -> SinrTermsReport:
    """Estimate the moments behind the closed-form SINR by simulation.

    Args:
        scenario: Network scenario
        gains: Effective gains; their scheme selects MR or ZF precoding
        rho: DL powers in watts, shape (L, K)
        n_draws: Number of valid channel realizations to collect
        seed: Integer seed or SeedSequence
        batch_size: Realizations processed per batch

    Returns:
        SinrTermsReport with per-term comparisons and SINR/SE agreement
    """
    L, K = scenario.L, scenario.K
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (L, K):
        raise DimensionMismatchError(f"rho must have shape {(L, K)}, got {rho.shape}")
    if gains.gamma.shape != scenario.beta.shape:
        raise DimensionMismatchError("Gains do not belong to this scenario")
    _batches(n_draws, batch_size)

    # analytic mean of g[l, k, i, t] is sqrt(G gamma[i, l, k]) for t == k, else 0
    coherent = np.sqrt(gains.G * np.transpose(gains.gamma, (1, 2, 0)))
    analytic_mean = np.zeros((L, K, L, K))
    analytic_variance = np.zeros((L, K, L, K))
    for k in range(K):
        analytic_mean[:, k, :, k] = coherent[:, k, :]
    analytic_variance[:] = np.transpose(gains.z_gain, (1, 2, 0))[:, :, :, np.newaxis]

    root = _batch_root(seed)
    moments = _GainMoments(analytic_mean, L, K)
    singular = 0
    leakage = 0.0
    while moments.count < n_draws:
        size = min(batch_size, n_draws - moments.count)
        rng = np.random.default_rng(root.spawn(1)[0])
        h = draw_channels(scenario, size, rng)
        estimates = mmse_estimates(scenario, receive_pilots(scenario, h, rng))
        w, valid = compute_precoders(estimates, gains)
        singular += int(np.count_nonzero(~valid))
        if not np.any(valid):
            continue
        h, estimates, w = h[valid], estimates[valid], w[valid]
        if gains.scheme is PrecodingScheme.ZF:
            leakage = max(leakage, zf_leakage(estimates, w))
        moments.add(precoded_gains(h, w), w)
    if singular:
        logger.info("Discarded %d draws with ill-conditioned ZF Gram matrices", singular)

    n = moments.count
    shift = moments.shift / n
    empirical_mean = analytic_mean + shift.real
    mean_se = np.sqrt(np.maximum(moments.real_sq / n - shift.real ** 2, 0.0) / n)
    centered_power = moments.power / n
    empirical_variance = centered_power - np.abs(shift) ** 2
    variance_se = np.sqrt(np.maximum(moments.power_sq / n - centered_power ** 2, 0.0) / n)
    norm = moments.norm / n
    norm_se = np.sqrt(np.maximum(moments.norm_sq / n - norm ** 2, 0.0) / n)

    # use-and-then-forget SINR from the empirical moments
    second_moment = centered_power + 2.0 * analytic_mean * shift.real + analytic_mean ** 2
    own = np.arange(L)
    desired_mean = np.stack([empirical_mean[own, k, own, k] for k in range(K)], axis=1)
    signal = rho * desired_mean ** 2
    received = np.einsum("it,lkit->lk", rho, second_moment)
    empirical_sinr = signal / (received - signal + scenario.sigma_dl_sq)
    closed = sinr_matrix(rho, gains, scenario)

    return SinrTermsReport(
        scheme=gains.scheme,
        analytic_mean=analytic_mean,
        empirical_mean=empirical_mean,
        mean_standard_error=mean_se,
        analytic_variance=analytic_variance,
        empirical_variance=empirical_variance,
        variance_standard_error=variance_se,
        precoder_norm=norm,
        precoder_norm_standard_error=norm_se,
        closed_form_sinr=closed,
        empirical_sinr=empirical_sinr,
        closed_form_se=se_from_sinr(closed, scenario.config),
        empirical_se=se_from_sinr(np.maximum(empirical_sinr, 0.0), scenario.config),
        draws=n,
        singular_draws=singular,
        max_zf_leakage=leakage if gains.scheme is PrecodingScheme.ZF else None,
    )
