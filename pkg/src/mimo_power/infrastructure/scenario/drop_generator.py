"""Random user drops on a wrap-around square-grid network."""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
import shapely
from shapely.geometry import Point, box

from mimo_power.domain.entities.drop_config import DropConfig
from mimo_power.domain.entities.scenario import NetworkScenario, ScenarioConfig
from mimo_power.domain.interfaces.scenario_source import ScenarioSource, Seed
from mimo_power.domain.system_model import db_to_linear, dbm_to_watts

logger = logging.getLogger(__name__)


def wraparound_distance(a: np.ndarray, b: np.ndarray, torus: tuple) -> np.ndarray:
    """Distance between points on a torus.

    Args:
        a: Points of shape (..., 2)
        b: Points of shape (..., 2), broadcastable against a
        torus: (width, height) of the torus

    Returns:
        Shortest distances, each at most half the torus diagonal
    """
    delta = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    size = np.asarray(torus, dtype=float)
    delta = np.mod(delta, size)
    delta = np.minimum(delta, size - delta)
    return np.hypot(delta[..., 0], delta[..., 1])


def pathloss_db(distance_km: Union[float, np.ndarray], cfg: DropConfig) -> Union[float, np.ndarray]:
    """Mean large-scale gain in dB at a distance, without shadowing."""
    return cfg.pathloss_intercept_db - cfg.pathloss_slope_db * np.log10(distance_km)


def associated_shadowing(mean_db: np.ndarray, std_db: float, rng: np.random.Generator) -> np.ndarray:
    """Log-normal shadowing under which every user is served by its strongest BS.

    The shadowing vector of user k of cell i (over all BSs) is redrawn until
    ``mean_db[i, i, k] + shadow[i, i, k]`` is the largest gain of that user.
    Draws of users that already satisfy this are kept as they are.

    Args:
        mean_db: Shadowing-free gains in dB, shape (L, L, K): BS l to user k of cell i
        std_db: Shadowing standard deviation in dB
        rng: Random generator

    Returns:
        Shadowing in dB, shape (L, L, K)
    """
    L = mean_db.shape[0]
    own = np.arange(L)
    if std_db <= 0:
        return np.zeros(mean_db.shape)
    shadow = rng.normal(0.0, std_db, size=mean_db.shape)
    redraws = 0
    while True:
        gain = mean_db + shadow
        misassociated = gain[own, own, :] < gain.max(axis=0)
        if not misassociated.any():
            break
        cells, users = np.nonzero(misassociated)
        shadow[:, cells, users] = rng.normal(0.0, std_db, size=(L, cells.size))
        redraws += cells.size
    if redraws:
        logger.debug("Redrew shadowing %d times to keep users on their own BS", redraws)
    return shadow


@dataclass(frozen=True)
class DropLayout:
    """Geometry and shadowing of one drop."""

    bs_xy: np.ndarray
    """BS positions in km, shape (L, 2)."""

    user_xy: np.ndarray
    """User positions in km, shape (L, K, 2)."""

    distance_km: np.ndarray
    """Wrap-around distances, shape (L, L, K): BS l to user k of cell i."""

    shadow_db: np.ndarray
    """Shadow fading in dB per link, shape (L, L, K).

    Every user's own BS is its strongest link once shadowing is added.
    """


class WrapAroundDropGenerator(ScenarioSource):
    """Drops users uniformly in square cells around grid-placed BSs."""

    def __init__(self, cfg: DropConfig):
        """Initialize the generator.

        Args:
            cfg: Drop configuration
        """
        self.cfg = cfg
        self._cells = [self._cell_region(l) for l in range(cfg.num_cells)]

    def bs_positions(self) -> np.ndarray:
        """BS coordinates in km, one per grid cell, row-major."""
        d = self.cfg.inter_site_km
        rows, cols = np.divmod(np.arange(self.cfg.num_cells), self.cfg.grid_cols)
        return np.column_stack([(cols + 0.5) * d, (rows + 0.5) * d])

    def _cell_region(self, l: int):
        d = self.cfg.inter_site_km
        x, y = self.bs_positions()[l]
        square = box(x - d / 2, y - d / 2, x + d / 2, y + d / 2)
        return square.difference(Point(x, y).buffer(self.cfg.min_distance_km, quad_segs=64))

    def _sample_users(self, l: int, count: int, rng: np.random.Generator) -> np.ndarray:
        region = self._cells[l]
        minx, miny, maxx, maxy = region.bounds
        accepted = np.empty((0, 2))
        while accepted.shape[0] < count:
            batch = rng.uniform((minx, miny), (maxx, maxy), size=(2 * count, 2))
            inside = shapely.contains_xy(region, batch[:, 0], batch[:, 1])
            accepted = np.vstack([accepted, batch[inside]])
        return accepted[:count]

    def layout(self, seed: Seed) -> DropLayout:
        """Draw user positions and shadowing.

        Args:
            seed: Integer seed or SeedSequence

        Returns:
            DropLayout of the drop
        """
        cfg = self.cfg
        rng = np.random.default_rng(seed)
        L, K = cfg.num_cells, cfg.users_per_cell
        bs_xy = self.bs_positions()
        user_xy = np.stack([self._sample_users(l, K, rng) for l in range(L)])
        distance = wraparound_distance(
            bs_xy[:, np.newaxis, np.newaxis, :], user_xy[np.newaxis, :, :, :], cfg.torus_km
        )
        distance = np.maximum(distance, cfg.min_distance_km)
        shadow = associated_shadowing(pathloss_db(distance, cfg), cfg.shadow_std_db, rng)
        return DropLayout(bs_xy=bs_xy, user_xy=user_xy, distance_km=distance, shadow_db=shadow)

    def scenario_from_layout(self, layout: DropLayout) -> NetworkScenario:
        """Build the network scenario implied by a layout."""
        cfg = self.cfg
        L, K = cfg.num_cells, cfg.users_per_cell
        beta = db_to_linear(pathloss_db(layout.distance_km, cfg) + layout.shadow_db)
        noise = float(dbm_to_watts(cfg.noise_dbm))
        return NetworkScenario(
            config=ScenarioConfig(L=L, K=K, M=cfg.antennas, tau_c=cfg.coherence_interval),
            beta=beta,
            pilot_power=np.full((L, K), cfg.pilot_power_w),
            sigma_ul_sq=noise,
            sigma_dl_sq=noise,
            p_max=np.full(L, cfg.p_max_w),
            qos_se=np.full((L, K), cfg.qos_se),
        )

    def generate(self, seed: Seed) -> NetworkScenario:
        """Draw one drop and return its scenario."""
        return self.scenario_from_layout(self.layout(seed))


def generate_drop(cfg: DropConfig, seed: Seed) -> NetworkScenario:
    """Generate the scenario of one seeded drop."""
    return WrapAroundDropGenerator(cfg).generate(seed)


def drop_seeds(cfg: DropConfig) -> list:
    """Independent per-drop seed sequences derived from the master seed."""
    return np.random.SeedSequence(cfg.master_seed).spawn(cfg.num_drops)


def drop_seed(cfg: DropConfig, index: int) -> np.random.SeedSequence:
    """Seed of drop ``index``; equal to ``drop_seeds(cfg)[index]``."""
    if index < 0:
        raise ValueError(f"Drop index must be nonnegative, got {index}")
    return np.random.SeedSequence(cfg.master_seed).spawn(index + 1)[index]
