"""Scenario files and CSV result exports.

Scenario and configuration files use a flat ``key = value`` format. Array
values are whitespace-separated numbers in row-major order; ``#`` starts a
comment. Tabular results are written as CSV through pandas.
"""

from pathlib import Path
from typing import Dict, Iterable, Union

import numpy as np
import pandas as pd

from mimo_power.domain.entities.consistency import IterationTrace
from mimo_power.domain.entities.scenario import NetworkScenario, PowerAllocation, ScenarioConfig
from mimo_power.domain.errors import ConfigurationError

PathLike = Union[str, Path]

_SCENARIO_KEYS = (
    "L", "K", "M", "tau_c", "tau_p",
    "sigma_ul_sq", "sigma_dl_sq", "beta", "pilot_power", "p_max", "qos_se",
)


def parse_key_values(text: str) -> Dict[str, str]:
    """Parse ``key = value`` lines.

    Raises:
        ConfigurationError: On malformed or duplicate keys, naming the line
    """
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"Line {number}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"Line {number}: missing key")
        if key in values:
            raise ConfigurationError(f"Line {number}: duplicate key {key!r}")
        values[key] = value
    return values


def read_key_values(path: PathLike) -> Dict[str, str]:
    """Read a key-value file.

    Raises:
        FileNotFoundError: If the file does not exist
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    return parse_key_values(path.read_text())


def write_key_values(path: PathLike, values: Dict[str, str]) -> Path:
    """Write a key-value file."""
    path = Path(path)
    path.write_text("".join(f"{key} = {value}\n" for key, value in values.items()))
    return path


def _format_array(array: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(array).ravel())


def _parse_array(key: str, text: str, shape: tuple) -> np.ndarray:
    try:
        values = np.array([float(v) for v in text.split()])
    except ValueError as e:
        raise ConfigurationError(f"Invalid number in {key}") from e
    if values.size != int(np.prod(shape)):
        raise ConfigurationError(f"{key} needs {int(np.prod(shape))} values, got {values.size}")
    return values.reshape(shape)


def scenario_to_mapping(scenario: NetworkScenario) -> Dict[str, str]:
    """Key-value representation of a scenario."""
    config = scenario.config
    return {
        "L": str(config.L),
        "K": str(config.K),
        "M": str(config.M),
        "tau_c": str(config.tau_c),
        "tau_p": str(config.tau_p),
        "sigma_ul_sq": repr(scenario.sigma_ul_sq),
        "sigma_dl_sq": repr(scenario.sigma_dl_sq),
        "beta": _format_array(scenario.beta),
        "pilot_power": _format_array(scenario.pilot_power),
        "p_max": _format_array(scenario.p_max),
        "qos_se": _format_array(scenario.qos_se),
    }


def scenario_from_mapping(values: Dict[str, str]) -> NetworkScenario:
    """Build a scenario from its key-value representation.

    Raises:
        ConfigurationError: On unknown or missing keys or bad values
    """
    unknown = set(values) - set(_SCENARIO_KEYS)
    if unknown:
        raise ConfigurationError(f"Unknown scenario keys: {sorted(unknown)}")
    missing = [key for key in _SCENARIO_KEYS if key not in values and key != "tau_p"]
    if missing:
        raise ConfigurationError(f"Missing scenario keys: {missing}")
    try:
        config = ScenarioConfig(
            L=int(values["L"]),
            K=int(values["K"]),
            M=int(values["M"]),
            tau_c=int(values["tau_c"]),
            tau_p=int(values["tau_p"]) if "tau_p" in values else None,
        )
        sigma_ul_sq = float(values["sigma_ul_sq"])
        sigma_dl_sq = float(values["sigma_dl_sq"])
    except ValueError as e:
        if isinstance(e, ConfigurationError):
            raise
        raise ConfigurationError(f"Invalid scalar in scenario: {e}") from e
    L, K = config.L, config.K
    return NetworkScenario(
        config=config,
        beta=_parse_array("beta", values["beta"], (L, L, K)),
        pilot_power=_parse_array("pilot_power", values["pilot_power"], (L, K)),
        sigma_ul_sq=sigma_ul_sq,
        sigma_dl_sq=sigma_dl_sq,
        p_max=_parse_array("p_max", values["p_max"], (L,)),
        qos_se=_parse_array("qos_se", values["qos_se"], (L, K)),
    )


def write_scenario(path: PathLike, scenario: NetworkScenario) -> Path:
    """Write a scenario file."""
    return write_key_values(path, scenario_to_mapping(scenario))


def read_scenario(path: PathLike) -> NetworkScenario:
    """Read a scenario file."""
    return scenario_from_mapping(read_key_values(path))


def tensor_frame(tensor: np.ndarray) -> pd.DataFrame:
    """Long-format table ``l,i,k,value`` of an (L, L, K) tensor."""
    L1, L2, K = tensor.shape
    l, i, k = np.meshgrid(np.arange(L1), np.arange(L2), np.arange(K), indexing="ij")
    return pd.DataFrame({"l": l.ravel(), "i": i.ravel(), "k": k.ravel(), "value": tensor.ravel()})


def write_tensor_csv(path: PathLike, tensor: np.ndarray) -> Path:
    """Export an (L, L, K) tensor such as beta or gamma."""
    path = Path(path)
    tensor_frame(tensor).to_csv(path, index=False, float_format="%.17g")
    return path


def read_tensor_csv(path: PathLike) -> np.ndarray:
    """Read a tensor written by :func:`write_tensor_csv`."""
    frame = pd.read_csv(path)
    shape = (frame["l"].max() + 1, frame["i"].max() + 1, frame["k"].max() + 1)
    tensor = np.zeros(shape)
    tensor[frame["l"], frame["i"], frame["k"]] = frame["value"].to_numpy()
    return tensor


def allocation_frame(allocation: PowerAllocation, sinr: np.ndarray, se: np.ndarray) -> pd.DataFrame:
    """Table ``l,k,rho_watts,sinr,se`` of an allocation."""
    L, K = allocation.rho.shape
    l, k = np.meshgrid(np.arange(L), np.arange(K), indexing="ij")
    return pd.DataFrame({
        "l": l.ravel(),
        "k": k.ravel(),
        "rho_watts": allocation.rho.ravel(),
        "sinr": np.asarray(sinr).ravel(),
        "se": np.asarray(se).ravel(),
    })


def write_allocation_csv(
    path: PathLike, allocation: PowerAllocation, sinr: np.ndarray, se: np.ndarray
) -> Path:
    """Export an allocation with its SINR and SE."""
    path = Path(path)
    allocation_frame(allocation, sinr, se).to_csv(path, index=False, float_format="%.17g")
    return path


def read_allocation_csv(path: PathLike) -> PowerAllocation:
    """Read the powers of an allocation CSV."""
    frame = pd.read_csv(path)
    L, K = int(frame["l"].max()) + 1, int(frame["k"].max()) + 1
    rho = np.zeros((L, K))
    rho[frame["l"], frame["k"]] = frame["rho_watts"].to_numpy()
    return PowerAllocation(rho)


def trace_frame(traces: Iterable[IterationTrace]) -> pd.DataFrame:
    """Table ``iter,total_power,max_residual,min_sinr_margin,exchanged_params`` plus extras."""
    rows = [
        {
            "iter": t.iteration,
            "total_power": t.total_power,
            "max_residual": t.max_residual,
            "min_sinr_margin": t.min_sinr_margin,
            "exchanged_params": t.exchanged_params,
            "max_qos_violation": t.max_qos_violation,
            "dual_value": t.dual_value,
            "wall_time": t.wall_time,
        }
        for t in traces
    ]
    columns = [
        "iter", "total_power", "max_residual", "min_sinr_margin", "exchanged_params",
        "max_qos_violation", "dual_value", "wall_time",
    ]
    return pd.DataFrame(rows, columns=columns)


def write_trace_csv(path: PathLike, traces: Iterable[IterationTrace]) -> Path:
    """Export a dual-decomposition trace."""
    path = Path(path)
    trace_frame(traces).to_csv(path, index=False, float_format="%.17g")
    return path
