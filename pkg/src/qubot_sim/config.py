"""
Run configuration: the flat ``key = value`` grammar, its pydantic model and rendering.

Grammar
-------
- one ``key = value`` per line; blank lines and lines starting with ``#`` are ignored,
  as is anything after `` #`` on a value line
- keys before the first header form the common section
- ``[<scenario>]`` opens a section whose keys apply only when that scenario runs and
  override the common section
- list values are comma separated; booleans are ``true``/``false``

Command-line flags override values from the file.
"""
import logging
import re
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import pydantic
from pydantic import BaseModel, ConfigDict, Field, field_validator

from qubot_sim.channels import Environment, ModelParams, recovery_rate
from qubot_sim.errors import ParseError, ValidationError, ZeroForgetness
from qubot_sim.experiments import (
    DEFAULT_BLOCH_POINTS,
    DEFAULT_FORGET_RANGE,
    DEFAULT_SNAPSHOT_TIMES,
    DEFAULT_STABILIZATION_GAMMAS,
    DEFAULT_SWEEP_GRID,
    STABILIZATION_SAMPLE_DT,
    STABILIZATION_T_END,
)
from qubot_sim.metrics import EntropyBase, FidelityConvention

logger = logging.getLogger(__name__)


class Scenario(str, Enum):
    TRANSIENT = "transient"
    STABILIZATION = "stabilization"
    SWEEP = "sweep"
    BLOCH = "bloch"
    PHOTODISSOCIATION = "photodissociation"
    VALIDATE = "validate"


# Scenarios that run at a single (Γ, γ) and therefore require both rates.
SINGLE_POINT = {
    Scenario.TRANSIENT,
    Scenario.BLOCH,
    Scenario.PHOTODISSOCIATION,
    Scenario.VALIDATE,
}

PARAM_KEYS = (
    "gamma_dephasing",
    "gamma_forget",
    "recovery_rate",
    "correction_time",
    "delta",
    "environment",
)

# Working point used for parameter echo in grid scenarios when no rates are given.
GRID_ECHO_RATES = {"gamma_dephasing": "1.0", "gamma_forget": "1.5"}

_HEADER = re.compile(r"^\[\s*([A-Za-z_][\w-]*)\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_][\w-]*)\s*=\s*(.*)$")


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario: Scenario
    params: ModelParams
    t_end: float = Field(default=10.0, gt=0.0)
    sample_dt: float = Field(default=0.02, gt=0.0)
    gamma_dephasing_values: Tuple[float, ...] = DEFAULT_STABILIZATION_GAMMAS
    gamma_forget_values: Tuple[float, ...] = DEFAULT_FORGET_RANGE
    stabilization_t_end: float = Field(default=STABILIZATION_T_END, gt=0.0)
    stabilization_sample_dt: float = Field(default=STABILIZATION_SAMPLE_DT, gt=0.0)
    gamma_dephasing_grid: Tuple[float, ...] = DEFAULT_SWEEP_GRID
    gamma_forget_grid: Tuple[float, ...] = DEFAULT_SWEEP_GRID
    snapshot_times: Tuple[float, ...] = DEFAULT_SNAPSHOT_TIMES
    n_points: int = Field(default=DEFAULT_BLOCH_POINTS, ge=1)
    output_dir: Path = Path("results")
    emit_svg: bool = False
    fidelity_convention: FidelityConvention = FidelityConvention.OVERLAP
    entropy_base: EntropyBase = EntropyBase.E
    workers: int = Field(default=1, ge=1)

    @field_validator(
        "gamma_dephasing_values",
        "gamma_forget_values",
        "gamma_dephasing_grid",
        "gamma_forget_grid",
        "snapshot_times",
        mode="before",
    )
    @classmethod
    def _split_list(cls, value: Any) -> Any:
        if isinstance(value, str):
            return tuple(item.strip() for item in value.split(",") if item.strip())
        return value

    @field_validator(
        "gamma_dephasing_values",
        "gamma_forget_values",
        "gamma_dephasing_grid",
        "gamma_forget_grid",
    )
    @classmethod
    def _positive_rates(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value:
            raise ValueError("list must not be empty")
        if any(v <= 0.0 for v in value):
            raise ValueError("rates must be positive")
        return value

    @field_validator("snapshot_times")
    @classmethod
    def _ascending(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value or value[0] < 0.0 or any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError(
                "snapshot times must be non-negative and strictly increasing"
            )
        return value


FIELD_KEYS = tuple(
    name for name in RunConfig.model_fields if name not in ("scenario", "params")
)
KNOWN_KEYS = frozenset(("scenario",) + PARAM_KEYS + FIELD_KEYS)


def read_sections(text: str) -> Dict[str, Dict[str, str]]:
    """
    Split configuration text into sections of raw string values; "" is the common
    section.
    """
    sections: Dict[str, Dict[str, str]] = {"": {}}
    current = ""
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        header = _HEADER.match(line)
        if header:
            current = header.group(1)
            if current in sections:
                raise ParseError(f"section [{current}] appears twice", number)
            sections[current] = {}
            continue
        entry = _ENTRY.match(line)
        if not entry:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", number)
        key, value = entry.group(1), entry.group(2).split(" #", 1)[0].strip()
        if not value:
            raise ParseError(f"key {key!r} has no value", number)
        if key not in KNOWN_KEYS:
            raise ValidationError(key, "unknown configuration key")
        if key in sections[current]:
            raise ParseError(f"duplicate key {key!r}", number)
        sections[current][key] = value
    return sections


def _first_error_key(error: pydantic.ValidationError) -> str:
    details = error.errors()
    if not details:
        return "config"
    loc = [str(part) for part in details[0].get("loc", ()) if not isinstance(part, int)]
    return loc[-1] if loc else "config"


def build_config(
    values: Mapping[str, str], scenario: Optional[str] = None
) -> RunConfig:
    """Validate raw key/value strings into a RunConfig."""
    raw = dict(values)
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ValidationError(unknown[0], "unknown configuration key")

    name = scenario or raw.pop("scenario", None)
    raw.pop("scenario", None)
    if name is None:
        raise ValidationError("scenario", "no scenario given")
    try:
        kind = Scenario(name)
    except ValueError:
        raise ValidationError("scenario", f"unknown scenario {name!r}") from None

    params_raw: Dict[str, Any] = {k: raw.pop(k) for k in PARAM_KEYS if k in raw}
    for key in ("gamma_dephasing", "gamma_forget"):
        if key not in params_raw:
            if kind in SINGLE_POINT:
                raise ValidationError(key, f"required for the {kind.value} scenario")
            params_raw[key] = GRID_ECHO_RATES[key]
    if kind is Scenario.PHOTODISSOCIATION:
        params_raw.setdefault("environment", Environment.PHOTODISSOCIATION.value)

    try:
        if "recovery_rate" not in params_raw:
            partial = ModelParams(**{**params_raw, "recovery_rate": 0.0})
            params_raw["recovery_rate"] = recovery_rate(
                partial.correction_time, partial.gamma_forget
            )
        params = ModelParams(**params_raw)
        return RunConfig(scenario=kind, params=params, **raw)
    except ZeroForgetness as e:
        raise ValidationError("gamma_forget", str(e)) from e
    except pydantic.ValidationError as e:
        key = _first_error_key(e)
        raise ValidationError(key, e.errors()[0].get("msg", "invalid value")) from e


def parse_config(
    text: str,
    overrides: Optional[Mapping[str, str]] = None,
    scenario: Optional[str] = None,
) -> RunConfig:
    """
    Parse configuration text into a RunConfig.

    Args:
        text: configuration document
        overrides: raw values from command-line flags, applied last
        scenario: scenario chosen on the command line; otherwise the ``scenario`` key

    Raises:
        ParseError: malformed text, with the line number
        ValidationError: unknown, missing or out-of-range key
    """
    sections = read_sections(text)
    merged = dict(sections[""])
    name = scenario or merged.get("scenario")
    for section in sections:
        if section and section not in {s.value for s in Scenario}:
            raise ValidationError(section, "unknown scenario section")
    if name is not None and name in sections:
        merged.update(sections[name])
    merged.update(overrides or {})
    return build_config(merged, scenario=name)


def _render_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_render_value(v) for v in value)
    return str(value)


def config_items(config: RunConfig) -> List[Tuple[str, str]]:
    """Every setting of ``config`` as (key, rendered value), parameters first."""
    items = [("scenario", config.scenario.value)]
    params = config.params.model_dump()
    items.extend((key, _render_value(params[key])) for key in PARAM_KEYS)
    items.extend((key, _render_value(getattr(config, key))) for key in FIELD_KEYS)
    return items


def render_config(config: RunConfig) -> str:
    """Inverse of `parse_config`."""
    lines = ["# qubot-sim run configuration"]
    lines.extend(f"{key} = {value}" for key, value in config_items(config))
    return "\n".join(lines) + "\n"


def load_config(
    path: Optional[Path],
    overrides: Optional[Mapping[str, str]] = None,
    scenario: Optional[str] = None,
) -> RunConfig:
    text = ""
    if path is not None:
        logger.info(f"Reading configuration from {path}")
        text = Path(path).read_text(encoding="utf-8")
    return parse_config(text, overrides=overrides, scenario=scenario)
