"""
Handlers for running qubot scenarios and reporting their outcome.
"""
import logging
import time
from typing import Any, Callable, Dict, Tuple

from qubot_sim.config import RunConfig, Scenario
from qubot_sim.errors import ConfigError, NumericalFailure
from qubot_sim.experiments import (
    BlochSnapshot,
    run_bloch_evolution,
    run_photodissociation,
    run_stabilization_sweep,
    run_steady_sweep,
    run_transient,
    run_validation,
    steady_metrics,
)
from qubot_sim.handlers import output_handlers
from qubot_sim.models import ScenarioResponse

logger = logging.getLogger(__name__)

Summary = Tuple[str, Dict[str, Any]]


def _execute(
    config: RunConfig,
    runner: Callable[[RunConfig], Any],
    summarize: Callable[[Any], Summary],
) -> ScenarioResponse:
    """
    Run, persist and summarize one scenario; failures become unsuccessful
    responses.
    """
    name = config.scenario.value
    started = time.perf_counter()
    try:
        result = runner(config)
        written = output_handlers.write_outputs(
            result, config, wall_clock_seconds=time.perf_counter() - started
        )
        text, details = summarize(result)
        files = "\n".join(f"  {path}" for path in written)
        return ScenarioResponse(
            content=f"{text}\n\nWrote:\n{files}",
            metadata={
                "success": True,
                "exit_code": 0,
                "scenario": name,
                "files": [str(p) for p in written],
                **details,
            },
        )
    except NumericalFailure as e:
        logger.error(f"Numerical failure in {name} scenario: {e}")
        return ScenarioResponse(
            content=f"Numerical failure in the {name} scenario: {e}",
            metadata={"success": False, "error": str(e), "exit_code": 2},
        )
    except ConfigError as e:
        logger.error(f"Invalid {name} run: {e}")
        return ScenarioResponse(
            content=f"Invalid {name} run: {e}",
            metadata={"success": False, "error": str(e), "exit_code": 1},
        )
    except Exception as e:
        logger.exception(f"Error running the {name} scenario")
        return ScenarioResponse(
            content=f"An error occurred while running the {name} scenario: {str(e)}",
            metadata={"success": False, "error": str(e), "exit_code": 1},
        )


def run_transient_scenario(config: RunConfig) -> ScenarioResponse:
    """
    Concurrence and entropies of the qubot against free spins over time.

    Args:
        config: validated run configuration

    Returns:
        ScenarioResponse with the final-sample values
    """
    logger.info("Running transient scenario")

    def runner(cfg: RunConfig) -> Any:
        return run_transient(
            cfg.params,
            cfg.t_end,
            cfg.sample_dt,
            cfg.entropy_base.log_base,
            cfg.fidelity_convention,
        )

    def summarize(result: Any) -> Summary:
        last, (_, c_free) = result.samples[-1], result.baseline[-1]
        text = (
            f"Transient to t={last.time:g}: C_qubot={last.concurrence_ab:.6g} "
            f"C_free={c_free:.6g} S_AB={last.entropy_ab:.6g} "
            f"S_L={last.entropy_loop:.6g}"
        )
        return text, {"final": {"C_qubot": last.concurrence_ab, "C_free": c_free}}

    return _execute(config, runner, summarize)


def run_stabilization_scenario(config: RunConfig) -> ScenarioResponse:
    """Stabilization time against forgetness rate for each dephasing rate."""
    logger.info("Running stabilization scenario")

    def runner(cfg: RunConfig) -> Any:
        return run_stabilization_sweep(
            cfg.gamma_dephasing_values,
            cfg.gamma_forget_values,
            correction_time=cfg.params.correction_time,
            delta=cfg.params.delta,
            environment=cfg.params.environment,
            t_end=cfg.stabilization_t_end,
            sample_dt=cfg.stabilization_sample_dt,
            workers=cfg.workers,
        )

    def summarize(result: Any) -> Summary:
        points = [p for curve in result.curves.values() for p in curve]
        missing = sum(1 for p in points if p.t_o is None)
        text = (
            f"Stabilization times for {len(result.curves)} dephasing rates, "
            f"{len(points)} points ({missing} not stabilized)"
        )
        return text, {"points": len(points), "not_stabilized": missing}

    return _execute(config, runner, summarize)


def run_sweep_scenario(config: RunConfig) -> ScenarioResponse:
    """Steady-state heatmaps over the (Gamma, gamma) grid."""
    logger.info("Running sweep scenario")

    def runner(cfg: RunConfig) -> Any:
        return run_steady_sweep(
            cfg.gamma_dephasing_grid,
            cfg.gamma_forget_grid,
            correction_time=cfg.params.correction_time,
            delta=cfg.params.delta,
            environment=cfg.params.environment,
            entropy_base=cfg.entropy_base.log_base,
            fidelity_convention=cfg.fidelity_convention,
            workers=cfg.workers,
        )

    def summarize(result: Any) -> Summary:
        cells = len(result.gamma_dephasing_grid) * len(result.gamma_forget_grid)
        text = f"Steady-state sweep over {cells} cells ({len(result.errors)} failed)"
        return text, {"cells": cells, "failed_cells": len(result.errors)}

    return _execute(config, runner, summarize)


def run_bloch_scenario(config: RunConfig) -> ScenarioResponse:
    """Contraction of a golden-spiral set of logical states on the Bloch sphere."""
    logger.info("Running bloch scenario")

    def runner(cfg: RunConfig) -> Any:
        return run_bloch_evolution(
            cfg.params, cfg.snapshot_times, cfg.n_points, cfg.workers
        )

    def summarize(result: Any) -> Summary:
        snapshots: list[BlochSnapshot] = result
        spreads = {f"{s.time:g}": s.spread() for s in snapshots}
        text = "Bloch-sphere spread by time: " + ", ".join(
            f"t={t}: {v:.4g}" for t, v in spreads.items()
        )
        return text, {"spread": spreads}

    return _execute(config, runner, summarize)


def run_photodissociation_scenario(config: RunConfig) -> ScenarioResponse:
    """Singlet fidelity of qubot and free spins under photodissociation."""
    logger.info("Running photodissociation scenario")

    def runner(cfg: RunConfig) -> Any:
        return run_photodissociation(
            cfg.params, cfg.t_end, cfg.sample_dt, cfg.fidelity_convention
        )

    def summarize(result: Any) -> Summary:
        f_qubot, f_free = result.qubot_fidelity[-1], result.free_fidelity[-1]
        text = (
            f"Photodissociation to t={result.times[-1]:g}: "
            f"F_qubot={f_qubot:.6g} F_free={f_free:.6g}"
        )
        return text, {"final": {"F_qubot": f_qubot, "F_free": f_free}}

    return _execute(config, runner, summarize)


def run_validate_scenario(config: RunConfig) -> ScenarioResponse:
    """Check the operating point against the protective, gap and bound conditions."""
    logger.info("Running validate scenario")

    def runner(cfg: RunConfig) -> Any:
        return run_validation(cfg.params)

    def summarize(report: Any) -> Summary:
        findings = report.as_dict()
        lines = []
        for name in ("protective", "feasible", "bounded"):
            finding = findings[name]
            flag = "true" if finding["holds"] else "false"
            note = " (marginal)" if finding["marginal"] else ""
            lines.append(f"{name}: {flag}{note} margin={finding['margin']:.6g}")
        hardware = findings["hardware"]
        lines.append(
            f"hardware: {'true' if hardware['satisfied'] else 'false'} "
            f"required gap {hardware['required_gap_hz']:.6g} Hz"
        )
        steady = steady_metrics(config.params, config.entropy_base.log_base)
        lines.append(
            f"steady state: C={steady['concurrence']:.6g} "
            f"F={steady['fidelity_overlap']:.6g} S_AB={steady['entropy_ab']:.6g}"
        )
        return "\n".join(lines), {"report": findings, "steady_state": steady}

    return _execute(config, runner, summarize)


HANDLERS: Dict[Scenario, Callable[[RunConfig], ScenarioResponse]] = {
    Scenario.TRANSIENT: run_transient_scenario,
    Scenario.STABILIZATION: run_stabilization_scenario,
    Scenario.SWEEP: run_sweep_scenario,
    Scenario.BLOCH: run_bloch_scenario,
    Scenario.PHOTODISSOCIATION: run_photodissociation_scenario,
    Scenario.VALIDATE: run_validate_scenario,
}


def run_scenario(config: RunConfig) -> ScenarioResponse:
    return HANDLERS[config.scenario](config)
