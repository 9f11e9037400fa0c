"""
qubot-sim command line: one subcommand per scenario.
"""
import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, NoReturn, Optional, Sequence

from qubot_sim import __version__
from qubot_sim.config import Scenario, load_config
from qubot_sim.errors import ConfigError
from qubot_sim.handlers import scenario_handlers

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

# Flag destination -> configuration key, for values passed through as raw strings.
OVERRIDE_FLAGS = {
    "gamma_dephasing": "gamma_dephasing",
    "gamma_forget": "gamma_forget",
    "recovery_rate": "recovery_rate",
    "correction_time": "correction_time",
    "delta": "delta",
    "environment": "environment",
    "t_end": "t_end",
    "sample_dt": "sample_dt",
    "gamma_dephasing_values": "gamma_dephasing_values",
    "gamma_forget_values": "gamma_forget_values",
    "stabilization_t_end": "stabilization_t_end",
    "stabilization_sample_dt": "stabilization_sample_dt",
    "gamma_dephasing_grid": "gamma_dephasing_grid",
    "gamma_forget_grid": "gamma_forget_grid",
    "snapshot_times": "snapshot_times",
    "n_points": "n_points",
    "workers": "workers",
    "fidelity_convention": "fidelity_convention",
    "entropy_base": "entropy_base",
    "out": "output_dir",
}


class UsageError(ConfigError):
    def __init__(self, message: str, usage: str) -> None:
        self.usage = usage
        super().__init__(message)


class ArgumentParser(argparse.ArgumentParser):
    """Raises on usage errors so they map onto exit status 1."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(message, self.format_usage())


def _common_options() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="configuration file (key = value)")
    common.add_argument("--out", help="output directory (default: results)")
    common.add_argument("--svg", action="store_true", help="also write SVG figures")
    common.add_argument("--log-level", choices=LOG_LEVELS, type=str.upper)

    model = common.add_argument_group("model parameters (in units of Delta)")
    model.add_argument("--gamma-dephasing", help="environment error rate Gamma")
    model.add_argument("--gamma-forget", help="forgetness rate gamma")
    model.add_argument(
        "--recovery-rate", help="recovery rate r (default (t_c + 1/gamma)^-1)"
    )
    model.add_argument("--correction-time", help="correction delay t_c")
    model.add_argument("--delta", help="loop gap Delta")
    model.add_argument("--environment", choices=("dephasing", "photodissociation"))

    run = common.add_argument_group("sampling and grids")
    run.add_argument("--t-end", help="final time")
    run.add_argument("--sample-dt", help="sampling interval")
    run.add_argument("--gamma-dephasing-values", help="comma-separated Gamma curves")
    run.add_argument("--gamma-forget-values", help="comma-separated gamma range")
    run.add_argument("--stabilization-t-end")
    run.add_argument("--stabilization-sample-dt")
    run.add_argument("--gamma-dephasing-grid", help="comma-separated heatmap rows")
    run.add_argument("--gamma-forget-grid", help="comma-separated heatmap columns")
    run.add_argument("--snapshot-times", help="comma-separated Bloch snapshot times")
    run.add_argument("--n-points", help="number of Bloch sample states")
    run.add_argument("--workers", help="threads for grid scenarios")
    run.add_argument("--fidelity-convention", choices=("overlap", "sqrt"))
    run.add_argument("--entropy-base", choices=("e", "2"))
    return common


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="qubot-sim",
        description="Lindblad simulations of a self-correcting two-spin qubot.",
    )
    parser.add_argument(
        "--version", action="version", version=f"qubot-sim {__version__}"
    )
    commands = parser.add_subparsers(dest="scenario", metavar="SCENARIO", required=True)
    common = _common_options()
    helps = {
        Scenario.TRANSIENT: "concurrence and entropies against time",
        Scenario.STABILIZATION: "stabilization time against forgetness rate",
        Scenario.SWEEP: "steady-state heatmaps over (Gamma, gamma)",
        Scenario.BLOCH: "contraction of the logical Bloch sphere",
        Scenario.PHOTODISSOCIATION: "singlet fidelity under photodissociation",
        Scenario.VALIDATE: "operating-point report",
    }
    for scenario, text in helps.items():
        commands.add_parser(
            scenario.value, parents=[common], help=text, description=text
        )
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, str]:
    overrides = {
        key: str(getattr(args, dest))
        for dest, key in OVERRIDE_FLAGS.items()
        if getattr(args, dest, None) is not None
    }
    if args.svg:
        overrides["emit_svg"] = "true"
    return overrides


def configure_logging(level: Optional[str]) -> None:
    name = (level or os.environ.get("QUBOT_LOG_LEVEL", "INFO")).upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.INFO),
        format="%(asctime)s %(levelname)s %(message)s",
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except UsageError as e:
        sys.stderr.write(e.usage)
        sys.stderr.write(f"qubot-sim: error: {e}\n")
        return 1

    configure_logging(args.log_level)
    try:
        overrides = collect_overrides(args)
        config = load_config(args.config, overrides, scenario=args.scenario)
    except (ConfigError, OSError) as e:
        logger.debug("Configuration rejected", exc_info=True)
        sys.stderr.write(f"qubot-sim: error: {e}\n")
        return 1

    response = scenario_handlers.run_scenario(config)
    if response.success:
        print(response.content)
    else:
        first_line: List[str] = response.content.splitlines() or [""]
        sys.stderr.write(f"qubot-sim: error: {first_line[0]}\n")
    return response.exit_code


if __name__ == "__main__":
    sys.exit(main())
