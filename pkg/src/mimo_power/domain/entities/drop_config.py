"""Configuration of Monte-Carlo network drops."""

from dataclasses import dataclass, fields, replace
from typing import Dict, Tuple

from mimo_power.domain.entities.scenario import PrecodingScheme
from mimo_power.domain.errors import ConfigurationError


@dataclass(frozen=True)
class DropConfig:
    """Layout, propagation and system parameters of a wrap-around network.

    BSs sit at the centres of a ``grid_rows`` x ``grid_cols`` square grid
    on a torus; users are dropped uniformly in their own square cell.
    Noise powers are taken as the stated -96 dBm for both links.
    """

    grid_rows: int = 2
    """Rows of the BS grid."""

    grid_cols: int = 2
    """Columns of the BS grid."""

    inter_site_km: float = 0.5
    """Distance between neighbouring BSs in km."""

    min_distance_km: float = 0.035
    """Minimum user-to-BS distance in km."""

    pathloss_intercept_db: float = -148.1
    """Pathloss at 1 km in dB."""

    pathloss_slope_db: float = 37.6
    """Pathloss increase per decade of distance in dB."""

    shadow_std_db: float = 7.0
    """Standard deviation of log-normal shadowing in dB."""

    master_seed: int = 0
    """Seed from which every drop seed is derived."""

    num_drops: int = 100
    """Number of drops in an experiment."""

    users_per_cell: int = 10
    """K."""

    antennas: int = 100
    """M."""

    coherence_interval: int = 200
    """tau_c in symbols."""

    pilot_power_w: float = 0.2
    """UL pilot power of every user in watts."""

    p_max_w: float = 40.0
    """DL power budget of every BS in watts."""

    qos_se: float = 0.5
    """QoS requirement of every user in b/s/Hz."""

    noise_dbm: float = -96.0
    """UL and DL noise power in dBm."""

    scheme: PrecodingScheme = PrecodingScheme.ZF
    """Precoding scheme used by experiments."""

    validation_antennas: int = 32
    """M used for Monte-Carlo validation runs."""

    validation_draws: int = 10_000
    """Channel draws per Monte-Carlo validation run."""

    def __post_init__(self):
        """Validate configuration."""
        if isinstance(self.scheme, str) and not isinstance(self.scheme, PrecodingScheme):
            object.__setattr__(self, "scheme", PrecodingScheme(self.scheme.upper()))
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise ConfigurationError("Grid dimensions must be at least 1")
        if self.inter_site_km <= 0:
            raise ConfigurationError(f"Inter-site distance must be positive, got {self.inter_site_km}")
        if self.min_distance_km <= 0:
            raise ConfigurationError(f"Minimum distance must be positive, got {self.min_distance_km}")
        if self.min_distance_km >= self.inter_site_km / 2:
            raise ConfigurationError("Minimum distance leaves no room for users inside a cell")
        if self.shadow_std_db < 0:
            raise ConfigurationError(f"Shadowing std must be nonnegative, got {self.shadow_std_db}")
        if self.num_drops < 1:
            raise ConfigurationError(f"Number of drops must be at least 1, got {self.num_drops}")
        if self.pilot_power_w <= 0 or self.p_max_w <= 0:
            raise ConfigurationError("Pilot power and power budget must be positive")
        if self.qos_se < 0:
            raise ConfigurationError(f"QoS requirement must be nonnegative, got {self.qos_se}")
        if self.validation_draws < 1:
            raise ConfigurationError("Validation needs at least one draw")

    @property
    def num_cells(self) -> int:
        """L."""
        return self.grid_rows * self.grid_cols

    @property
    def torus_km(self) -> Tuple[float, float]:
        """Width and height of the wrap-around area in km."""
        return self.grid_cols * self.inter_site_km, self.grid_rows * self.inter_site_km

    @classmethod
    def full_scale(cls, **overrides) -> "DropConfig":
        """Full-size configuration: 500 antennas and 1000 drops."""
        settings = {"antennas": 500, "num_drops": 1000}
        settings.update(overrides)
        return cls(**settings)

    @classmethod
    def from_mapping(cls, values: Dict[str, str]) -> "DropConfig":
        """Build a config from string values, e.g. a parsed key-value file.

        Raises:
            ConfigurationError: On unknown keys or unparsable values
        """
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in types:
                raise ConfigurationError(f"Unknown drop configuration key: {key}")
            default = getattr(cls, key)
            try:
                if isinstance(default, PrecodingScheme):
                    kwargs[key] = PrecodingScheme(raw.strip().upper())
                elif isinstance(default, int):
                    kwargs[key] = int(raw)
                else:
                    kwargs[key] = float(raw)
            except ValueError as e:
                raise ConfigurationError(f"Invalid value for {key}: {raw!r}") from e
        return cls(**kwargs)

    def to_mapping(self) -> Dict[str, str]:
        """String values of every field, inverse of :meth:`from_mapping`."""
        result = {}
        for f in fields(self):
            value = getattr(self, f.name)
            result[f.name] = value.value if isinstance(value, PrecodingScheme) else repr(value)
        return result

    def with_overrides(self, **changes) -> "DropConfig":
        """Copy with selected fields replaced, skipping None values."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})
