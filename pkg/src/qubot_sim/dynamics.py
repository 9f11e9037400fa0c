"""
Time integration and steady states of the qubot master equation.

Vectorization is column stacking, vec(AρB) = (Bᵀ ⊗ A) vec(ρ). Integration is
classical fixed-step RK4 with h·(Γ + γ + r + Δ) ≤ 0.01. Because the generator is
linear and time independent, one RK4 step acting on vec(ρ) is multiplication by

    T(h) = I + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24

so the step map is built once and raised to the number of steps per sample interval.
States are never renormalized; drift beyond tolerance raises InvariantViolated.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from qubot_sim.channels import JumpOperator, ModelParams, model_generator
from qubot_sim.errors import (
    DegenerateSteadyState,
    DimensionMismatch,
    InvariantViolated,
    NoConvergence,
    Singular,
)
from qubot_sim.hilbert import COMPOSITE_DIM, TRACE_TOL, DensityMatrix
from qubot_sim.linalg import (
    HERMITIAN_TOL,
    ComplexMatrix,
    as_matrix,
    dagger,
    hermiticity_defect,
    hermitize,
    solve_linear,
)

logger = logging.getLogger(__name__)

STEP_BOUND = 0.01
RESIDUAL_TOL = 1e-10

STEADY_SAMPLE_DT = 0.1
STEADY_WINDOW = 10
STEADY_TOL = 1e-12
STEADY_T_MAX = 1e4
# Full eigenvalue checks are done every this many samples during steady-state searches.
STEADY_CHECK_EVERY = 10


def vec(rho: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    return np.asarray(rho, dtype=np.complex128).reshape(-1, order="F")


def unvec(v: npt.ArrayLike, dim: int) -> ComplexMatrix:
    return np.asarray(v, dtype=np.complex128).reshape((dim, dim), order="F")


@dataclass(frozen=True, eq=False)
class Liouvillian:
    matrix: ComplexMatrix = field(repr=False)

    def __post_init__(self) -> None:
        m = as_matrix(self.matrix)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        """Dimension of the underlying Hilbert space."""
        return math.isqrt(self.matrix.shape[0])

    def apply(self, rho: "DensityMatrix | npt.ArrayLike") -> ComplexMatrix:
        state = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)
        return unvec(self.matrix @ vec(state), self.dim)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: npt.NDArray[np.float64] = field(repr=False)
    states: List[DensityMatrix] = field(repr=False)
    params: ModelParams

    def __post_init__(self) -> None:
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def final_state(self) -> DensityMatrix:
        return self.states[-1]


def build_liouvillian(h: npt.ArrayLike, jumps: Sequence[JumpOperator]) -> Liouvillian:
    """Matrix of the Lindblad generator acting on column-stacked density matrices."""
    hamiltonian = as_matrix(h)
    dim = hamiltonian.shape[0]
    if hamiltonian.shape[1] != dim or any(j.matrix.shape != (dim, dim) for j in jumps):
        raise DimensionMismatch(
            "Hamiltonian and jump operators must share one dimension"
        )

    eye = np.eye(dim, dtype=np.complex128)
    lv = -1j * (np.kron(eye, hamiltonian) - np.kron(hamiltonian.T, eye))
    for jump in jumps:
        op = jump.matrix
        rate = dagger(op) @ op
        lv += np.kron(op.conj(), op)
        lv -= 0.5 * (np.kron(eye, rate) + np.kron(rate.T, eye))
    return Liouvillian(lv)


def model_liouvillian(params: ModelParams, with_loop: bool = True) -> Liouvillian:
    h, jumps = model_generator(params, with_loop=with_loop)
    return build_liouvillian(h, jumps)


def stable_step(params: ModelParams) -> float:
    return STEP_BOUND / params.total_rate


def rk4_step_matrix(liouvillian: Liouvillian, h: float) -> ComplexMatrix:
    """Matrix of one classical RK4 step of size h for ρ̇ = Lρ."""
    hl = h * liouvillian.matrix
    step = np.eye(hl.shape[0], dtype=np.complex128)
    term = step
    for order in range(1, 5):
        term = term @ hl / order
        step = step + term
    return step


class Propagator:
    """Advances vectorized states across intervals made of whole RK4 steps."""

    def __init__(self, liouvillian: Liouvillian, step_limit: float) -> None:
        if step_limit <= 0.0:
            raise ValueError(f"step limit must be positive, got {step_limit}")
        self.liouvillian = liouvillian
        self.step_limit = step_limit
        self._cache: Dict[float, ComplexMatrix] = {}

    def steps_for(self, interval: float) -> Tuple[int, float]:
        n = max(1, math.ceil(interval / self.step_limit - 1e-9))
        return n, interval / n

    def over(self, interval: float) -> ComplexMatrix:
        if interval <= 0.0:
            raise ValueError(f"interval must be positive, got {interval}")
        cached = self._cache.get(interval)
        if cached is None:
            n, h = self.steps_for(interval)
            cached = np.linalg.matrix_power(rk4_step_matrix(self.liouvillian, h), n)
            self._cache[interval] = cached
        return cached


def check_state(rho: DensityMatrix, time: float, full: bool = True) -> DensityMatrix:
    """Trace and Hermiticity on every call, positivity when ``full``."""
    drift = abs(rho.trace() - 1.0)
    if drift > TRACE_TOL:
        raise InvariantViolated(f"trace drift {drift:.3e} at t={time:.6g}")
    defect = hermiticity_defect(rho.matrix)
    if defect > HERMITIAN_TOL:
        raise InvariantViolated(f"Hermiticity defect {defect:.3e} at t={time:.6g}")
    if full:
        rho.check(f"t={time:.6g}")
    return rho


def _generator_for(rho0: DensityMatrix, params: ModelParams) -> Liouvillian:
    # dim-4 states run the full qubot model, dim-2 states the free-spin baseline
    return model_liouvillian(params, with_loop=rho0.dim == COMPOSITE_DIM)


def propagate(
    rho0: DensityMatrix,
    params: ModelParams,
    times: Sequence[float],
    step_limit: Optional[float] = None,
    liouvillian: Optional[Liouvillian] = None,
) -> List[DensityMatrix]:
    """States at each of the ascending ``times`` (the first may be 0)."""
    grid = [float(t) for t in times]
    if any(t < 0.0 for t in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("times must be non-negative and strictly increasing")

    generator = liouvillian or _generator_for(rho0, params)
    propagator = Propagator(generator, step_limit or stable_step(params))
    dim = rho0.dim

    states: List[DensityMatrix] = []
    current, clock = vec(rho0.matrix), 0.0
    for t in grid:
        if t > clock:
            current = propagator.over(t - clock) @ current
            clock = t
        states.append(check_state(DensityMatrix(unvec(current, dim)), t))
    return states


def evolve(
    rho0: DensityMatrix,
    params: ModelParams,
    t_end: float,
    sample_dt: float,
    max_step: Optional[float] = None,
) -> Trajectory:
    """
    Integrate the master equation from ``rho0`` and sample every ``sample_dt``.

    When ``t_end`` is not a multiple of ``sample_dt`` the last sample is taken at
    ``t_end`` after a shorter interval.

    A dim-4 ``rho0`` evolves under the full qubot model; a dim-2 ``rho0`` under the
    free-spin baseline (environment only, no loop).
    """
    if t_end <= 0.0 or sample_dt <= 0.0:
        raise ValueError(
            f"t_end and sample_dt must be positive, got {t_end}, {sample_dt}"
        )

    count = int(math.floor(t_end / sample_dt + 1e-9))
    times = sample_dt * np.arange(count + 1, dtype=np.float64)
    remainder = t_end - float(times[-1])
    if remainder > 1e-9 * sample_dt:
        times = np.append(times, t_end)
    generator = _generator_for(rho0, params)
    propagator = Propagator(generator, max_step or stable_step(params))
    sample_map = propagator.over(sample_dt)
    logger.debug(
        f"evolve dim={rho0.dim} t_end={t_end} samples={len(times)} "
        f"steps/sample={propagator.steps_for(sample_dt)[0]}"
    )

    dim = rho0.dim
    current = vec(rho0.matrix)
    states = [check_state(DensityMatrix(rho0.matrix), 0.0)]
    for t in times[1 : count + 1]:
        current = sample_map @ current
        states.append(check_state(DensityMatrix(unvec(current, dim)), float(t)))
    if len(times) > count + 1:
        current = propagator.over(remainder) @ current
        states.append(check_state(DensityMatrix(unvec(current, dim)), t_end))
    return Trajectory(times=times, states=states, params=params)


def steady_state_nullspace(liouvillian: Liouvillian) -> DensityMatrix:
    """
    Unique fixed point of the generator.

    Replaces the equation for ρ₀₀ by the trace condition and solves the resulting
    system; a singular system means the null space is not one dimensional.
    """
    dim = liouvillian.dim
    system = np.array(liouvillian.matrix, dtype=np.complex128)
    system[0, :] = vec(np.eye(dim))
    rhs = np.zeros(dim * dim, dtype=np.complex128)
    rhs[0] = 1.0

    try:
        solution = solve_linear(system, rhs)
    except Singular as e:
        raise DegenerateSteadyState(f"steady state is not unique: {e}") from e

    residual = float(np.max(np.abs(liouvillian.matrix @ solution)))
    if residual > RESIDUAL_TOL:
        raise DegenerateSteadyState(
            f"steady-state residual {residual:.3e} above tolerance"
        )

    rho = unvec(solution, dim)
    return DensityMatrix(hermitize(rho)).check("steady state")


def steady_state_by_integration(
    rho0: DensityMatrix,
    params: ModelParams,
    sample_dt: float = STEADY_SAMPLE_DT,
    window: int = STEADY_WINDOW,
    tolerance: float = STEADY_TOL,
    t_max: float = STEADY_T_MAX,
) -> DensityMatrix:
    """
    Integrate until ρ changes by less than ``tolerance`` (max entry) across ``window``
    consecutive samples.

    Raises:
        NoConvergence: not settled by ``t_max``
    """
    generator = _generator_for(rho0, params)
    sample_map = Propagator(generator, stable_step(params)).over(sample_dt)
    dim = rho0.dim

    current = vec(rho0.matrix)
    quiet = 0
    limit = int(math.ceil(t_max / sample_dt))
    for k in range(1, limit + 1):
        advanced = sample_map @ current
        change = float(np.max(np.abs(advanced - current)))
        current = advanced
        t = k * sample_dt
        full = k % STEADY_CHECK_EVERY == 0
        check_state(DensityMatrix(unvec(current, dim)), t, full=full)

        quiet = quiet + 1 if change < tolerance else 0
        if quiet >= window:
            logger.debug(f"steady state reached by integration at t={t:.6g}")
            return check_state(DensityMatrix(unvec(current, dim)), t)

    raise NoConvergence(f"no steady state within t={t_max:g}")
