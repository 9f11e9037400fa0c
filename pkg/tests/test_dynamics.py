import math

import numpy as np
import pytest
from conftest import random_density_matrix
from scipy.linalg import expm

from qubot_sim.channels import (
    LOOP_LOWER,
    LOOP_Z,
    Environment,
    JumpOperator,
    ModelParams,
    lindblad_rhs,
    model_generator,
)
from qubot_sim.dynamics import (
    Liouvillian,
    Propagator,
    build_liouvillian,
    evolve,
    model_liouvillian,
    propagate,
    rk4_step_matrix,
    stable_step,
    steady_state_by_integration,
    steady_state_nullspace,
    unvec,
    vec,
)
from qubot_sim.errors import DegenerateSteadyState, DimensionMismatch, NoConvergence
from qubot_sim.hilbert import (
    KET_PHI0,
    DensityMatrix,
    Subsystem,
    bloch_state,
    initial_qubot_state,
    partial_trace,
    projector,
    singlet_state,
    with_loop_ground,
)
from qubot_sim.linalg import hermiticity_defect
from qubot_sim.metrics import logical_concurrence, trace_distance


def _exact(liouvillian: Liouvillian, rho0: DensityMatrix, t: float) -> np.ndarray:
    return unvec(expm(t * liouvillian.matrix) @ vec(rho0.matrix), rho0.dim)


def test_vec_is_column_stacking():
    a = np.array([[1, 2], [3, 4]])
    np.testing.assert_array_equal(vec(a), [1, 3, 2, 4])
    np.testing.assert_array_equal(unvec(vec(a), 2), a)


def test_liouvillian_matches_direct_rhs(rng, reference_params):
    h, jumps = model_generator(reference_params)
    liouvillian = build_liouvillian(h, jumps)
    assert liouvillian.matrix.shape == (16, 16)
    for _ in range(50):
        rho = random_density_matrix(rng, 4)
        diff = liouvillian.apply(rho) - lindblad_rhs(h, jumps, rho)
        assert np.max(np.abs(diff)) <= 1e-12


def test_liouvillian_preserves_trace(reference_params):
    liouvillian = model_liouvillian(reference_params)
    trace_row = vec(np.eye(4)).conj() @ liouvillian.matrix
    np.testing.assert_allclose(trace_row, 0.0, atol=1e-14)


def test_build_liouvillian_dimension_check(reference_params):
    _, jumps = model_generator(reference_params)
    with pytest.raises(DimensionMismatch):
        build_liouvillian(np.zeros((2, 2)), jumps)


def test_rk4_step_matrix_is_fourth_order_taylor(reference_params):
    liouvillian = model_liouvillian(reference_params)
    h = 1e-3
    step = rk4_step_matrix(liouvillian, h)
    np.testing.assert_allclose(step, expm(h * liouvillian.matrix), atol=1e-12)


def test_propagator_splits_intervals():
    propagator = Propagator(Liouvillian(np.zeros((4, 4))), 0.01)
    assert propagator.steps_for(0.1) == (10, pytest.approx(0.01))
    n, h = propagator.steps_for(0.105)
    assert n == 11 and h <= 0.01
    with pytest.raises(ValueError):
        propagator.over(0.0)


def test_evolve_matches_matrix_exponential(reference_params):
    trajectory = evolve(
        initial_qubot_state(), reference_params, t_end=2.0, sample_dt=0.1
    )
    liouvillian = model_liouvillian(reference_params)
    assert len(trajectory) == 21
    assert trajectory.times[-1] == pytest.approx(2.0)
    for t, rho in zip(trajectory.times[::5], trajectory.states[::5]):
        exact = _exact(liouvillian, initial_qubot_state(), float(t))
        assert np.max(np.abs(rho.matrix - exact)) < 1e-9


def test_evolve_ends_exactly_at_t_end(reference_params):
    trajectory = evolve(
        initial_qubot_state(), reference_params, t_end=1.0, sample_dt=0.3
    )
    np.testing.assert_allclose(trajectory.times, [0.0, 0.3, 0.6, 0.9, 1.0], atol=1e-12)
    exact = _exact(model_liouvillian(reference_params), initial_qubot_state(), 1.0)
    assert np.max(np.abs(trajectory.final_state.matrix - exact)) < 1e-9

    short = evolve(singlet_state(), reference_params, t_end=0.05, sample_dt=0.1)
    np.testing.assert_allclose(short.times, [0.0, 0.05])


def test_step_halving_shows_fourth_order(reference_params):
    liouvillian = model_liouvillian(reference_params)
    rho0 = initial_qubot_state()
    exact = _exact(liouvillian, rho0, 1.0)

    def error(step: float) -> float:
        final = evolve(rho0, reference_params, 1.0, 0.5, max_step=step).final_state
        return float(np.max(np.abs(final.matrix - exact)))

    ratio = error(0.05) / error(0.025)
    assert 12.0 < ratio < 20.0


def test_trajectory_invariants(reference_params):
    trajectory = evolve(
        initial_qubot_state(), reference_params, t_end=5.0, sample_dt=0.05
    )
    for rho in trajectory.states:
        assert abs(rho.trace() - 1.0) <= 1e-8
        assert hermiticity_defect(rho.matrix) <= 1e-10
        assert rho.min_eigenvalue() >= -1e-8


def test_free_spin_dephasing_is_exponential(reference_params):
    times = np.linspace(0.0, 5.0, 500)
    states = propagate(singlet_state(), reference_params, times)
    for t, rho in zip(times, states):
        assert logical_concurrence(rho) == pytest.approx(math.exp(-t), abs=1e-6)


def test_propagate_rejects_unsorted_times(reference_params):
    with pytest.raises(ValueError):
        propagate(singlet_state(), reference_params, [0.0, 1.0, 0.5])


def test_evolve_rejects_bad_arguments(reference_params):
    with pytest.raises(ValueError):
        evolve(singlet_state(), reference_params, t_end=0.0, sample_dt=0.1)


def test_stable_step_respects_bound(reference_params):
    step = stable_step(reference_params)
    assert step * reference_params.total_rate == pytest.approx(0.01)


def test_nullspace_steady_state_reference_point(reference_params):
    steady = steady_state_nullspace(model_liouvillian(reference_params))
    steady.check()
    rho_ab = partial_trace(steady, Subsystem.AB)
    assert logical_concurrence(rho_ab) == pytest.approx(0.6, abs=1e-9)
    assert np.max(np.abs(model_liouvillian(reference_params).apply(steady))) < 1e-10


def test_nullspace_degenerate_without_dissipation():
    params = ModelParams(gamma_dephasing=0.0, gamma_forget=0.0, recovery_rate=0.0)
    with pytest.raises(DegenerateSteadyState):
        steady_state_nullspace(model_liouvillian(params))


def test_nullspace_degenerate_under_dephasing_only():
    params = ModelParams(gamma_dephasing=1.0, gamma_forget=0.0, recovery_rate=0.0)
    with pytest.raises(DegenerateSteadyState):
        steady_state_nullspace(model_liouvillian(params))


def test_forgetness_alone_relaxes_loop_to_ground():
    loop_hamiltonian = 0.5 * LOOP_Z
    forget = JumpOperator(math.sqrt(1.5) * LOOP_LOWER, "F")
    steady = steady_state_nullspace(build_liouvillian(loop_hamiltonian, [forget]))
    np.testing.assert_allclose(steady.matrix, projector(KET_PHI0), atol=1e-12)


def test_integration_raises_when_not_settled(reference_params):
    with pytest.raises(NoConvergence):
        steady_state_by_integration(initial_qubot_state(), reference_params, t_max=1.0)


@pytest.mark.slow
def test_steady_states_agree_on_random_parameters(rng):
    for _ in range(20):
        gamma_d, gamma_f, r = rng.uniform(0.1, 2.5, size=3)
        params = ModelParams(
            gamma_dephasing=gamma_d, gamma_forget=gamma_f, recovery_rate=r
        )
        by_nullspace = steady_state_nullspace(model_liouvillian(params))
        by_integration = steady_state_by_integration(initial_qubot_state(), params)
        assert trace_distance(by_nullspace, by_integration) <= 1e-6


@pytest.mark.slow
def test_integration_forgets_the_initial_bloch_state(rng, reference_params):
    expected = steady_state_nullspace(model_liouvillian(reference_params))
    for _ in range(20):
        theta, phi = math.acos(rng.uniform(-1.0, 1.0)), rng.uniform(0.0, 2.0 * math.pi)
        start = with_loop_ground(bloch_state(theta, phi))
        steady = steady_state_by_integration(start, reference_params)
        assert trace_distance(steady, expected) <= 1e-6


def test_photodissociation_free_spin_fidelity_decays(reference_params):
    params = reference_params.model_copy(
        update={"environment": Environment.PHOTODISSOCIATION}
    )
    trajectory = evolve(singlet_state(), params, t_end=3.0, sample_dt=0.5)
    for t, rho in zip(trajectory.times, trajectory.states):
        assert rho.matrix[0, 0].real == pytest.approx(0.5, abs=1e-12)
        overlap = 0.5 - rho.matrix[0, 1].real
        assert overlap == pytest.approx(math.exp(-t), abs=1e-6)
