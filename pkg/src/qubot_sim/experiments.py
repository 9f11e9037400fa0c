"""
Scenario runners for the qubot figures: transients, stabilization times, steady-state
heatmaps, Bloch-sphere contraction and the photodissociation environment.

Runners return in-memory results; persistence lives in
`qubot_sim.handlers.output_handlers`. Grid points are independent and may run on a
thread pool; results always come back in grid order.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from qubot_sim.channels import (
    Environment,
    ModelParams,
    ValidationReport,
    validate_operating_point,
)
from qubot_sim.dynamics import (
    Liouvillian,
    evolve,
    model_liouvillian,
    propagate,
    steady_state_nullspace,
)
from qubot_sim.errors import NumericalFailure, ValidationError
from qubot_sim.hilbert import (
    Subsystem,
    bloch_state,
    initial_qubot_state,
    partial_trace,
    singlet_state,
    with_loop_ground,
)
from qubot_sim.metrics import (
    FidelityConvention,
    MetricSample,
    bloch_vector,
    fidelity_to_singlet,
    logical_concurrence,
    logical_concurrence_wootters,
    sample_metrics,
    stabilization_time,
    von_neumann_entropy,
)

logger = logging.getLogger(__name__)

DEFAULT_STABILIZATION_GAMMAS = (0.25, 0.5, 1.0, 2.0)
DEFAULT_FORGET_RANGE = tuple(0.5 + 0.25 * k for k in range(11))
DEFAULT_SWEEP_GRID = tuple(float(x) for x in np.linspace(0.05, 2.5, 50))
DEFAULT_SNAPSHOT_TIMES = (0.0, 0.4, 0.8, 2.0)
DEFAULT_BLOCH_POINTS = 200
STABILIZATION_T_END = 60.0
STABILIZATION_SAMPLE_DT = 0.05

T = TypeVar("T")
R = TypeVar("R")


def _ordered_map(func: Callable[[T], R], items: Sequence[T], workers: int) -> List[R]:
    """Map in order, on a thread pool when ``workers`` > 1."""
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# Transients


@dataclass(frozen=True)
class TransientResult:
    params: ModelParams
    samples: List[MetricSample]
    baseline: List[Tuple[float, float]]


def run_transient(
    params: ModelParams,
    t_end: float,
    sample_dt: float,
    entropy_base: float = math.e,
    fidelity_convention: FidelityConvention = FidelityConvention.OVERLAP,
) -> TransientResult:
    """
    Evolve ρ(0) = |s⟩⟨s| ⊗ |Φ₀⟩⟨Φ₀| and a pair of free spins starting
    in the singlet.
    """
    logger.info(
        f"Transient: Gamma={params.gamma_dephasing} gamma={params.gamma_forget} "
        f"r={params.recovery_rate} t_end={t_end}"
    )
    qubot = evolve(initial_qubot_state(), params, t_end, sample_dt)
    free = evolve(singlet_state(), params, t_end, sample_dt)

    samples = [
        sample_metrics(t, rho, entropy_base, fidelity_convention)
        for t, rho in zip(qubot.times, qubot.states)
    ]
    baseline = [
        (float(t), logical_concurrence_wootters(rho))
        for t, rho in zip(free.times, free.states)
    ]
    return TransientResult(params=params, samples=samples, baseline=baseline)


# Stabilization times


@dataclass(frozen=True)
class StabilizationPoint:
    gamma_dephasing: float
    gamma_forget: float
    recovery_rate: float
    c_infinity: Optional[float]
    t_o: Optional[float]
    error: Optional[str] = None


@dataclass(frozen=True)
class StabilizationResult:
    correction_time: float
    curves: Dict[float, List[StabilizationPoint]]


def stabilization_point(
    params: ModelParams,
    t_end: float = STABILIZATION_T_END,
    sample_dt: float = STABILIZATION_SAMPLE_DT,
) -> StabilizationPoint:
    """C∞ from the null-space steady state, t_o from the integrated transient."""
    try:
        steady = steady_state_nullspace(model_liouvillian(params))
        c_inf = logical_concurrence(partial_trace(steady, Subsystem.AB))
        trajectory = evolve(initial_qubot_state(), params, t_end, sample_dt)
        series = [
            (float(t), logical_concurrence(partial_trace(rho, Subsystem.AB)))
            for t, rho in zip(trajectory.times, trajectory.states)
        ]
        t_o = stabilization_time(series, c_inf)
    except NumericalFailure as e:
        logger.warning(
            f"No stabilization time for Gamma={params.gamma_dephasing} "
            f"gamma={params.gamma_forget}: {e}"
        )
        return StabilizationPoint(
            params.gamma_dephasing,
            params.gamma_forget,
            params.recovery_rate,
            c_infinity=None,
            t_o=None,
            error=str(e),
        )
    return StabilizationPoint(
        params.gamma_dephasing, params.gamma_forget, params.recovery_rate, c_inf, t_o
    )


def run_stabilization_sweep(
    gamma_dephasing_values: Sequence[float] = DEFAULT_STABILIZATION_GAMMAS,
    gamma_forget_range: Sequence[float] = DEFAULT_FORGET_RANGE,
    correction_time: float = 0.0,
    delta: float = 1.0,
    environment: Environment = Environment.DEPHASING,
    t_end: float = STABILIZATION_T_END,
    sample_dt: float = STABILIZATION_SAMPLE_DT,
    workers: int = 1,
) -> StabilizationResult:
    """Stabilization time t_o against γ for each Γ, with r = (t_c + 1/γ)⁻¹."""
    if any(g <= 0.0 for g in gamma_forget_range):
        raise ValidationError(
            "gamma_forget_values", "all forgetness rates must be positive"
        )
    logger.info(
        f"Stabilization sweep: {len(gamma_dephasing_values)} x "
        f"{len(gamma_forget_range)} points, t_c={correction_time}"
    )
    grid = [
        ModelParams.derived(gd, gf, correction_time, delta, environment)
        for gd in gamma_dephasing_values
        for gf in gamma_forget_range
    ]
    points = _ordered_map(
        lambda p: stabilization_point(p, t_end, sample_dt), grid, workers
    )

    curves: Dict[float, List[StabilizationPoint]] = {}
    for point in points:
        curves.setdefault(point.gamma_dephasing, []).append(point)
    return StabilizationResult(correction_time=correction_time, curves=curves)


# Steady-state heatmaps


@dataclass(frozen=True)
class SteadyRecord:
    concurrence: float
    entropy_ab: float
    entropy_loop: float
    fidelity: float


@dataclass(frozen=True)
class SweepResult:
    gamma_dephasing_grid: List[float]
    gamma_forget_grid: List[float]
    records: List[List[Optional[SteadyRecord]]]
    errors: Dict[Tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.records) != len(self.gamma_dephasing_grid) or any(
            len(row) != len(self.gamma_forget_grid) for row in self.records
        ):
            raise ValueError("sweep records do not match the grid dimensions")


def steady_record(
    params: ModelParams,
    entropy_base: float = math.e,
    fidelity_convention: FidelityConvention = FidelityConvention.OVERLAP,
) -> SteadyRecord:
    steady = steady_state_nullspace(model_liouvillian(params))
    sample = sample_metrics(0.0, steady, entropy_base, fidelity_convention)
    return SteadyRecord(
        concurrence=sample.concurrence_ab,
        entropy_ab=sample.entropy_ab,
        entropy_loop=sample.entropy_loop,
        fidelity=sample.fidelity_singlet,
    )


def run_steady_sweep(
    gamma_dephasing_grid: Sequence[float] = DEFAULT_SWEEP_GRID,
    gamma_forget_grid: Sequence[float] = DEFAULT_SWEEP_GRID,
    correction_time: float = 0.0,
    delta: float = 1.0,
    environment: Environment = Environment.DEPHASING,
    entropy_base: float = math.e,
    fidelity_convention: FidelityConvention = FidelityConvention.OVERLAP,
    workers: int = 1,
) -> SweepResult:
    """Steady-state C(AB), S(AB), S(L) and singlet fidelity over a (Γ, γ) grid."""
    for key, grid in (
        ("gamma_dephasing_grid", gamma_dephasing_grid),
        ("gamma_forget_grid", gamma_forget_grid),
    ):
        if not grid:
            raise ValidationError(key, "sweep grids must be non-empty")
        if any(g <= 0.0 for g in grid):
            raise ValidationError(key, "sweep rates must be positive")
    logger.info(
        f"Steady sweep: {len(gamma_dephasing_grid)} x {len(gamma_forget_grid)} points, "
        f"t_c={correction_time}"
    )

    cells = [
        (i, j, ModelParams.derived(gd, gf, correction_time, delta, environment))
        for i, gd in enumerate(gamma_dephasing_grid)
        for j, gf in enumerate(gamma_forget_grid)
    ]

    Outcome = Tuple[Optional[SteadyRecord], Optional[str]]

    def solve(cell: Tuple[int, int, ModelParams]) -> Outcome:
        try:
            return steady_record(cell[2], entropy_base, fidelity_convention), None
        except NumericalFailure as e:
            logger.warning(f"Steady state failed at cell {cell[:2]}: {e}")
            return None, str(e)

    outcomes = _ordered_map(solve, cells, workers)

    records: List[List[Optional[SteadyRecord]]] = [
        [None] * len(gamma_forget_grid) for _ in gamma_dephasing_grid
    ]
    errors: Dict[Tuple[int, int], str] = {}
    for (i, j, _), (record, error) in zip(cells, outcomes):
        records[i][j] = record
        if error is not None:
            errors[(i, j)] = error
    return SweepResult(
        gamma_dephasing_grid=[float(g) for g in gamma_dephasing_grid],
        gamma_forget_grid=[float(g) for g in gamma_forget_grid],
        records=records,
        errors=errors,
    )


# Bloch-sphere contraction


@dataclass(frozen=True)
class BlochSnapshot:
    time: float
    points: List[Tuple[float, float, float]]

    def spread(self) -> float:
        """Largest pairwise distance between points."""
        pts = np.asarray(self.points, dtype=np.float64)
        if len(pts) < 2:
            return 0.0
        diffs = pts[:, None, :] - pts[None, :, :]
        return float(np.max(np.linalg.norm(diffs, axis=-1)))

    def centroid(self) -> Tuple[float, float, float]:
        x, y, z = np.mean(np.asarray(self.points, dtype=np.float64), axis=0)
        return float(x), float(y), float(z)


def golden_spiral(n_points: int) -> List[Tuple[float, float]]:
    """Quasi-uniform (θ, φ) angles on the sphere."""
    if n_points < 1:
        raise ValueError(f"n_points must be positive, got {n_points}")
    golden_angle = math.pi * (3.0 - math.sqrt(5.0))
    angles = []
    for k in range(n_points):
        z = 1.0 - 2.0 * (k + 0.5) / n_points
        angles.append((math.acos(z), (k * golden_angle) % (2.0 * math.pi)))
    return angles


def run_bloch_evolution(
    params: ModelParams,
    snapshot_times: Sequence[float] = DEFAULT_SNAPSHOT_TIMES,
    n_points: int = DEFAULT_BLOCH_POINTS,
    workers: int = 1,
) -> List[BlochSnapshot]:
    """
    Evolve a golden-spiral set of logical states ⊗ |Φ₀⟩⟨Φ₀| and record Bloch
    vectors.
    """
    times = [float(t) for t in snapshot_times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("snapshot times must be strictly increasing")
    logger.info(f"Bloch evolution: {n_points} points, snapshots at {times}")

    generator: Liouvillian = model_liouvillian(params)

    def track(angles: Tuple[float, float]) -> List[Tuple[float, float, float]]:
        start = with_loop_ground(bloch_state(*angles))
        states = propagate(start, params, times, liouvillian=generator)
        return [bloch_vector(partial_trace(rho, Subsystem.AB)) for rho in states]

    tracks = _ordered_map(track, golden_spiral(n_points), workers)
    return [
        BlochSnapshot(time=t, points=[track_[k] for track_ in tracks])
        for k, t in enumerate(times)
    ]


# Photodissociation environment


@dataclass(frozen=True)
class PhotodissociationResult:
    params: ModelParams
    times: List[float]
    qubot_fidelity: List[float]
    free_fidelity: List[float]


def run_photodissociation(
    params: ModelParams,
    t_end: float,
    sample_dt: float,
    fidelity_convention: FidelityConvention = FidelityConvention.OVERLAP,
) -> PhotodissociationResult:
    """
    Singlet fidelity of the qubot and of free spins when P replaces the dephasing
    jumps.
    """
    if params.environment is not Environment.PHOTODISSOCIATION:
        raise ValidationError(
            "environment",
            "the photodissociation scenario needs environment=photodissociation",
        )
    logger.info(
        f"Photodissociation: Gamma={params.gamma_dephasing} "
        f"gamma={params.gamma_forget} r={params.recovery_rate} t_end={t_end}"
    )
    qubot = evolve(initial_qubot_state(), params, t_end, sample_dt)
    free = evolve(singlet_state(), params, t_end, sample_dt)
    return PhotodissociationResult(
        params=params,
        times=[float(t) for t in qubot.times],
        qubot_fidelity=[
            fidelity_to_singlet(partial_trace(rho, Subsystem.AB)).select(
                fidelity_convention
            )
            for rho in qubot.states
        ],
        free_fidelity=[
            fidelity_to_singlet(rho).select(fidelity_convention) for rho in free.states
        ],
    )


def run_validation(params: ModelParams) -> ValidationReport:
    logger.info(f"Validating operating point {params}")
    return validate_operating_point(params)


def steady_metrics(
    params: ModelParams, entropy_base: float = math.e
) -> Dict[str, float]:
    """Steady-state C(AB), entropies and both singlet-fidelity conventions."""
    steady = steady_state_nullspace(model_liouvillian(params))
    rho_ab = partial_trace(steady, Subsystem.AB)
    rho_loop = partial_trace(steady, Subsystem.L)
    fidelity = fidelity_to_singlet(rho_ab)
    return {
        "concurrence": logical_concurrence_wootters(rho_ab),
        "entropy_ab": von_neumann_entropy(rho_ab, base=entropy_base),
        "entropy_loop": von_neumann_entropy(rho_loop, base=entropy_base),
        "fidelity_overlap": fidelity.overlap,
        "fidelity_sqrt": fidelity.sqrt_overlap,
    }

