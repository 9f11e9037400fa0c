"""
Handlers for persisting scenario results: CSV tables, JSON sidecars and SVG figures.
"""
import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import jsonschema

from qubot_sim import __version__
from qubot_sim.channels import ValidationReport
from qubot_sim.config import RunConfig, config_items
from qubot_sim.errors import OutputError
from qubot_sim.experiments import (
    BlochSnapshot,
    PhotodissociationResult,
    StabilizationResult,
    SweepResult,
    TransientResult,
)
from qubot_sim.metrics import EntropyBase

logger = logging.getLogger(__name__)

ScenarioResult = Union[
    TransientResult,
    StabilizationResult,
    SweepResult,
    List[BlochSnapshot],
    PhotodissociationResult,
    ValidationReport,
]
Row = Sequence[Any]

SIDECAR_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": [
        "scenario",
        "version",
        "parameters",
        "columns",
        "entropy_base",
        "fidelity_convention",
        "wall_clock_seconds",
        "files",
    ],
    "properties": {
        "scenario": {"type": "string"},
        "version": {"type": "string"},
        "parameters": {"type": "object", "additionalProperties": {"type": "string"}},
        "columns": {"type": "array", "items": {"type": "string"}},
        "entropy_base": {"enum": ["e", "2"]},
        "fidelity_convention": {"enum": ["overlap", "sqrt"]},
        "wall_clock_seconds": {"type": "number", "minimum": 0},
        "files": {"type": "array", "items": {"type": "string"}},
        "report": {"type": "object"},
    },
    "additionalProperties": False,
}


def format_number(value: Any) -> str:
    """12 significant digits; missing values are empty cells."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return f"{float(value):.12g}"
    return str(value)


def entropy_unit(config: RunConfig) -> str:
    return "nats" if config.entropy_base is EntropyBase.E else "bits"


def metadata_lines(config: RunConfig) -> List[str]:
    lines = [
        f"qubot-sim {__version__}",
        f"scenario: {config.scenario.value}",
        "units: time in 1/Delta, rates in units of Delta",
        f"entropy_base: {config.entropy_base.value} ({entropy_unit(config)})",
        f"fidelity_convention: {config.fidelity_convention.value}",
    ]
    lines.extend(f"param {key} = {value}" for key, value in config_items(config))
    return lines


def write_csv(
    path: Path, config: RunConfig, columns: Sequence[str], rows: Sequence[Row]
) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for line in metadata_lines(config):
            handle.write(f"# {line}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    logger.debug(f"Wrote {len(rows)} rows to {path}")
    return path


def tabulate(result: ScenarioResult) -> Tuple[str, List[str], List[Row]]:
    """File stem, column names and rows for a scenario result."""
    if isinstance(result, TransientResult):
        rows = [
            (s.time, s.concurrence_ab, s.entropy_ab, s.entropy_loop, c_free)
            for s, (_, c_free) in zip(result.samples, result.baseline)
        ]
        return "transient", ["time", "C_qubot", "S_AB", "S_L", "C_free"], rows

    if isinstance(result, StabilizationResult):
        rows = [
            (p.gamma_dephasing, p.gamma_forget, p.recovery_rate, p.c_infinity, p.t_o)
            for points in result.curves.values()
            for p in points
        ]
        return "stabilization", ["Gamma", "gamma", "r", "C_inf", "t_o"], rows

    if isinstance(result, SweepResult):
        rows = []
        for i, gamma_d in enumerate(result.gamma_dephasing_grid):
            for j, gamma_f in enumerate(result.gamma_forget_grid):
                record = result.records[i][j]
                if record is None:
                    rows.append((gamma_d, gamma_f, None, None, None, None))
                else:
                    rows.append(
                        (
                            gamma_d,
                            gamma_f,
                            record.concurrence,
                            record.entropy_ab,
                            record.entropy_loop,
                            record.fidelity,
                        )
                    )
        return "sweep", ["Gamma", "gamma", "C_ss", "S_AB", "S_L", "F_ss"], rows

    if isinstance(result, PhotodissociationResult):
        rows = list(zip(result.times, result.qubot_fidelity, result.free_fidelity))
        return "photodissociation", ["time", "F_qubot", "F_free"], rows

    if isinstance(result, ValidationReport):
        report = result.as_dict()
        rows = [
            (
                name,
                report[name]["holds"],
                report[name]["margin"],
                report[name]["marginal"],
            )
            for name in ("protective", "feasible", "bounded")
        ]
        hardware = report["hardware"]
        rows.append(
            (
                "hardware",
                hardware["satisfied"],
                hardware["gap_hz"] - hardware["required_gap_hz"],
                False,
            )
        )
        return "validate", ["finding", "holds", "margin", "marginal"], rows

    if isinstance(result, list) and all(isinstance(s, BlochSnapshot) for s in result):
        rows = [
            (snap.time, index, x, y, z)
            for snap in result
            for index, (x, y, z) in enumerate(snap.points)
        ]
        return "bloch", ["time", "point", "x", "y", "z"], rows

    raise OutputError(f"cannot write results of type {type(result).__name__}")


def _plot(result: ScenarioResult, config: RunConfig) -> List[Path]:
    from qubot_sim import plotting

    out_dir, unit = config.output_dir, entropy_unit(config)
    if isinstance(result, TransientResult):
        return plotting.plot_transient(result, out_dir, unit)
    if isinstance(result, StabilizationResult):
        return plotting.plot_stabilization(result, out_dir)
    if isinstance(result, SweepResult):
        return plotting.plot_sweep(result, out_dir, unit)
    if isinstance(result, PhotodissociationResult):
        return plotting.plot_photodissociation(result, out_dir)
    if isinstance(result, list):
        return plotting.plot_bloch(result, out_dir)
    return []


def write_outputs(
    result: ScenarioResult, config: RunConfig, wall_clock_seconds: float = 0.0
) -> List[Path]:
    """
    Write the CSV (data of record), its JSON sidecar and optional SVG figures.

    Returns:
        Paths written, CSV first

    Raises:
        OutputError: the output directory or a file cannot be written
    """
    stem, columns, rows = tabulate(result)
    out_dir = config.output_dir
    logger.info(f"Writing {stem} outputs to {out_dir}")

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = write_csv(out_dir / f"{stem}.csv", config, columns, rows)
        figures = _plot(result, config) if config.emit_svg else []

        sidecar: Dict[str, Any] = {
            "scenario": config.scenario.value,
            "version": __version__,
            "parameters": dict(config_items(config)),
            "columns": list(columns),
            "entropy_base": config.entropy_base.value,
            "fidelity_convention": config.fidelity_convention.value,
            "wall_clock_seconds": max(0.0, float(wall_clock_seconds)),
            "files": [csv_path.name] + [p.name for p in figures],
        }
        if isinstance(result, ValidationReport):
            sidecar["report"] = result.as_dict()
        jsonschema.validate(sidecar, SIDECAR_SCHEMA)

        json_path = out_dir / f"{stem}.json"
        text = json.dumps(sidecar, indent=2, sort_keys=True) + "\n"
        json_path.write_text(text, encoding="utf-8")
    except OSError as e:
        logger.error(f"Failed to write outputs to {out_dir}: {e}")
        raise OutputError(f"cannot write outputs to {out_dir}: {e}") from e
    except jsonschema.ValidationError as e:
        raise OutputError(f"sidecar metadata is malformed: {e.message}") from e

    return [csv_path, json_path] + figures
