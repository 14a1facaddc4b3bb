"""
Flat ``key = value`` experiment files and the named presets
"""

from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from pydantic import ValidationError

from ..models.schemas import ExperimentConfig
from ..utils.error_handler import ConfigError, PMEWaveError
from ..utils.logger import setup_logger

logger = setup_logger(__name__)

KEY_SECTIONS: Dict[str, str] = {
    "x_max": "grid", "n_x": "grid", "n_y": "grid",
    "m": "physics", "c": "physics", "flow": "physics", "flow_file": "physics", "tau": "physics",
    "t_max": "run", "cfl_safety": "run", "snapshot_times": "run", "diag_interval": "run",
    "marker_stride": "run",
    "s": "analysis", "eps_max": "analysis", "eps_min": "analysis", "eps_count": "analysis",
    "eps_floor": "analysis", "corner_kappa": "analysis", "corner_zero_tol": "analysis",
    "corner_window": "analysis", "corner_min_prominence": "analysis",
    "nondegeneracy_factor": "analysis", "h1_rungs": "analysis", "h2_max_exponent": "analysis",
    "y0_row": "analysis", "drift_window": "analysis", "decay_window": "analysis",
    "decay_factor": "analysis", "converged_tol": "analysis",
    "output_dir": "output", "prefix": "output",
}

DESK_GRID = {"x_max": 8.0, "n_x": 401, "n_y": 51, "tau": 6.0}
PAPER_GRID = {"x_max": 10.0, "n_x": 2001, "n_y": 201}

PRESETS: Dict[str, Dict[str, Any]] = {
    "paper-fig5-desk": {**DESK_GRID, "m": 1.1, "flow": "alpha2", "c": 0.4, "t_max": 15.0},
    "paper-fig5": {**PAPER_GRID, "m": 1.1, "flow": "alpha2", "c": 0.4, "t_max": 30.0},
    "paper-fig2": {**PAPER_GRID, "m": 1.1, "flow": "alpha1", "c": 0.6, "t_max": 30.0},
    "planar-desk": {**DESK_GRID, "m": 0.1, "flow": "zero", "c": 0.6, "t_max": 2.0},
    "drift-desk": {**DESK_GRID, "m": 0.1, "flow": "alpha2", "c": 0.4, "t_max": 20.0},
    "corners-alpha1-desk": {**DESK_GRID, "m": 0.1, "flow": "alpha1", "c": 0.6, "t_max": 15.0},
    "corners-alpha2-desk": {**DESK_GRID, "m": 0.1, "flow": "alpha2", "c": 0.5, "t_max": 15.0},
    "corners-alpha3-desk": {**DESK_GRID, "m": 0.1, "flow": "alpha3", "c": 0.9, "t_max": 15.0},
}
DEFAULT_PRESET = "paper-fig5-desk"
LONG_RUNNING_PRESETS = ("paper-fig5", "paper-fig2")
LIST_KEYS = ("snapshot_times",)


def _split_line(raw: str, number: int) -> Optional[Tuple[str, str]]:
    line = raw.split("#", 1)[0].strip()
    if not line:
        return None
    if "=" not in line:
        raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=number)
    key, value = (part.strip() for part in line.split("=", 1))
    if not key:
        raise ConfigError("missing key before '='", line=number)
    if not value:
        raise ConfigError(f"missing value for {key}", line=number, key=key)
    return key, value


def _convert(key: str, value: str) -> Any:
    if key in LIST_KEYS:
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def nest(flat: Dict[str, Any]) -> Dict[str, Any]:
    """Flat keys to the sectioned layout of ``ExperimentConfig``"""
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        if key == "preset":
            nested["preset"] = value
        else:
            nested.setdefault(KEY_SECTIONS[key], {})[key] = value
    return nested


def flatten(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Inverse of :func:`nest` for a validated config"""
    dumped = cfg.model_dump(mode="json")
    flat = {key: dumped[section][key] for key, section in KEY_SECTIONS.items()}
    flat["preset"] = cfg.preset
    return flat


def _flow_key(flat: Dict[str, Any]) -> str:
    return "flow_file" if flat.get("flow_file") else "flow"


def build_config(flat: Dict[str, Any], lines: Optional[Dict[str, int]] = None) -> ExperimentConfig:
    """Validate flat values; failures are reported with the line of the offending key"""
    lines = lines or {}
    try:
        return ExperimentConfig.model_validate(nest(flat))
    except ValidationError as e:
        error = e.errors()[0]
        cause = (error.get("ctx") or {}).get("error")
        if isinstance(cause, ConfigError):
            raise type(cause)(str(cause), line=lines.get(cause.key), key=cause.key) from e
        if isinstance(cause, PMEWaveError):
            key = _flow_key(flat)
            raise ConfigError(str(cause), line=lines.get(key), key=key) from e
        key = str(error["loc"][-1]) if error["loc"] else None
        if key not in KEY_SECTIONS and len(error["loc"]) > 1:
            key = str(error["loc"][1])
        raise ConfigError(f"{key}: {error['msg']}", line=lines.get(key), key=key) from e
    except (PMEWaveError, OSError) as e:
        key = _flow_key(flat)
        raise ConfigError(str(e), line=lines.get(key), key=key) from e


def parse_config(text: str, base_dir: Union[str, Path, None] = None) -> ExperimentConfig:
    """Parse ``key = value`` lines with ``#`` comments into a validated config.

    A ``preset`` line is applied first wherever it appears; explicit keys
    override the preset. A relative ``flow_file`` is resolved against
    ``base_dir``.
    """
    explicit: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        pair = _split_line(raw, number)
        if pair is None:
            continue
        key, value = pair
        if key != "preset" and key not in KEY_SECTIONS:
            raise ConfigError(f"unknown key {key!r}", line=number, key=key)
        if key in lines:
            raise ConfigError(f"duplicate key {key!r} (first on line {lines[key]})", line=number, key=key)
        explicit[key] = _convert(key, value)
        lines[key] = number

    preset = explicit.get("preset", DEFAULT_PRESET)
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(sorted(PRESETS))}",
                          line=lines.get("preset"), key="preset")
    if preset in LONG_RUNNING_PRESETS:
        logger.warning(f"Preset {preset} runs at full resolution and takes hours")

    if base_dir is not None and "flow_file" in explicit:
        flow_file = Path(explicit["flow_file"])
        if not flow_file.is_absolute():
            explicit["flow_file"] = str(Path(base_dir) / flow_file)

    flat = {**PRESETS[preset], **explicit, "preset": preset}
    cfg = build_config(flat, lines)
    logger.bind(preset=preset, keys=len(explicit)).debug(f"Parsed config with preset {preset}")
    return cfg


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and parse a config file"""
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)


def with_override(cfg: ExperimentConfig, key: str, value: Any) -> ExperimentConfig:
    """Copy of ``cfg`` with one flat key replaced and fully revalidated"""
    if key not in KEY_SECTIONS:
        raise ConfigError(f"unknown key {key!r}", key=key)
    flat = flatten(cfg)
    flat[key] = value
    return build_config(flat)


__all__ = [
    "DEFAULT_PRESET",
    "KEY_SECTIONS",
    "PRESETS",
    "build_config",
    "flatten",
    "load_config",
    "nest",
    "parse_config",
    "with_override",
]
