import numpy as np
import pydantic
import pytest
from conftest import random_density_matrix

from qubot_sim.channels import (
    Environment,
    ModelParams,
    apply_kraus,
    correction_cycle,
    dephasing_jumps,
    discrete_dephasing,
    discrete_forgetness,
    discrete_photodissociation,
    discrete_recovery,
    forgetness_jump,
    hardware_feasibility,
    jump_rate_operator,
    lindblad_rhs,
    loop_hamiltonian,
    model_generator,
    photodissociation_jump,
    recovery_jumps,
    recovery_rate,
    validate_operating_point,
)
from qubot_sim.errors import DimensionMismatch, InvalidProbability, ZeroForgetness
from qubot_sim.hilbert import (
    KET_PHI1,
    KET_S,
    KET_T,
    DensityMatrix,
    Subsystem,
    initial_qubot_state,
    partial_trace,
    projector,
    singlet_state,
    triplet_state,
    with_loop_ground,
)
from qubot_sim.metrics import trace_distance


def test_recovery_rate():
    assert recovery_rate(0.0, 1.5) == pytest.approx(1.5)
    assert recovery_rate(1.0, 1.0) == pytest.approx(0.5)
    with pytest.raises(ZeroForgetness):
        recovery_rate(0.0, 0.0)
    with pytest.raises(ValueError):
        recovery_rate(-1.0, 1.0)


def test_model_params_validation():
    with pytest.raises(pydantic.ValidationError):
        ModelParams(gamma_dephasing=-1.0, gamma_forget=1.0, recovery_rate=1.0)
    with pytest.raises(pydantic.ValidationError):
        ModelParams(gamma_dephasing=1.0, gamma_forget=1.0, recovery_rate=1.0, delta=0.0)
    with pytest.raises(pydantic.ValidationError):
        ModelParams(gamma_dephasing=1.0, gamma_forget=1.0, recovery_rate=1.0, spin=1)


def test_derived_params_use_correction_time():
    params = ModelParams.derived(0.5, 2.0, correction_time=0.5)
    assert params.recovery_rate == pytest.approx(1.0)
    assert params.total_rate == pytest.approx(0.5 + 2.0 + 1.0 + 1.0)


def test_jump_operators_shapes_and_rates():
    d0, d1 = dephasing_jumps(2.0)
    np.testing.assert_allclose(
        jump_rate_operator([d0, d1]), 2.0 * np.eye(4), atol=1e-14
    )
    r0, r1 = recovery_jumps(1.5)
    np.testing.assert_allclose(
        jump_rate_operator([r0, r1]), 1.5 * np.eye(4), atol=1e-14
    )
    f = forgetness_jump(1.0)
    assert f.dim == 4
    assert dephasing_jumps(1.0, with_loop=False)[0].dim == 2
    assert photodissociation_jump(1.0, with_loop=False).dim == 2


def test_recovery_corrects_triplet_and_flips_loop():
    _, r1 = recovery_jumps(1.0)
    out = r1.matrix @ with_loop_ground(triplet_state()).matrix @ r1.matrix.conj().T
    expected = np.kron(projector(KET_S), projector(KET_PHI1))
    np.testing.assert_allclose(out, expected, atol=1e-14)


def test_loop_hamiltonian_is_traceless():
    h = loop_hamiltonian(2.0)
    np.testing.assert_allclose(np.diag(h).real, [1.0, -1.0, 1.0, -1.0])
    with pytest.raises(ValueError):
        loop_hamiltonian(0.0)


def test_model_generator_free_spin_baseline(reference_params):
    h, jumps = model_generator(reference_params, with_loop=False)
    assert h.shape == (2, 2) and not np.any(h)
    assert [j.label for j in jumps] == ["D0", "D1"]

    photo = reference_params.model_copy(
        update={"environment": Environment.PHOTODISSOCIATION}
    )
    h, jumps = model_generator(photo)
    assert h.shape == (4, 4)
    assert [j.label for j in jumps] == ["P", "R0", "R1", "F"]


def test_lindblad_rhs_is_traceless_and_hermitian(rng, reference_params):
    h, jumps = model_generator(reference_params)
    rho = random_density_matrix(rng, 4)
    drho = lindblad_rhs(h, jumps, rho)
    assert abs(np.trace(drho)) < 1e-12
    np.testing.assert_allclose(drho, drho.conj().T, atol=1e-12)


def test_lindblad_rhs_dimension_mismatch(reference_params):
    h, jumps = model_generator(reference_params)
    with pytest.raises(DimensionMismatch):
        lindblad_rhs(h, jumps, singlet_state())


def test_apply_kraus_rejects_incomplete_sets():
    with pytest.raises(ValueError):
        apply_kraus(singlet_state(), [0.5 * np.eye(2)])
    with pytest.raises(DimensionMismatch):
        apply_kraus(singlet_state(), [np.eye(4)])


def test_discrete_dephasing_on_singlet():
    out = discrete_dephasing(singlet_state(), 0.3)
    expected = 0.7 * projector(KET_S) + 0.15 * (projector(KET_S) + projector(KET_T))
    np.testing.assert_allclose(out.matrix, expected, atol=1e-14)
    with pytest.raises(InvalidProbability):
        discrete_dephasing(singlet_state(), 1.5)
    with pytest.raises(DimensionMismatch):
        discrete_dephasing(initial_qubot_state(), 0.1)


def test_discrete_photodissociation_moves_singlet_weight():
    out = discrete_photodissociation(singlet_state(), 0.25)
    np.testing.assert_allclose(
        out.matrix, 0.75 * projector(KET_S) + 0.25 * projector(KET_T), atol=1e-14
    )
    np.testing.assert_allclose(
        discrete_photodissociation(triplet_state(), 0.25).matrix,
        projector(KET_T),
        atol=1e-14,
    )


def test_discrete_recovery_and_forgetness():
    corrected = discrete_recovery(with_loop_ground(triplet_state()))
    np.testing.assert_allclose(
        corrected.matrix, np.kron(projector(KET_S), projector(KET_PHI1)), atol=1e-14
    )
    reset = discrete_forgetness(corrected, 1.0)
    assert trace_distance(reset, initial_qubot_state()) < 1e-12
    half = discrete_forgetness(corrected, 0.5)
    loop = partial_trace(half, Subsystem.L).matrix
    assert loop[1, 1].real == pytest.approx(0.5)


@pytest.mark.parametrize("p", [0.0, 0.3, 1.0])
def test_correction_cycle_with_full_reset_restores_singlet(p):
    out = correction_cycle(initial_qubot_state(), p, 1.0)
    assert trace_distance(out, initial_qubot_state()) < 1e-12


def test_correction_cycle_without_reset_keeps_syndrome():
    p = 0.4
    out = correction_cycle(initial_qubot_state(), p, 0.0)
    loop = partial_trace(out, Subsystem.L).matrix
    assert loop[1, 1].real == pytest.approx(p / 2)
    rho_ab = partial_trace(out, Subsystem.AB)
    assert trace_distance(rho_ab, singlet_state()) < 1e-12


def test_correction_cycle_photodissociation():
    out = correction_cycle(
        initial_qubot_state(), 0.2, 0.0, Environment.PHOTODISSOCIATION
    )
    loop = partial_trace(out, Subsystem.L).matrix
    assert loop[1, 1].real == pytest.approx(0.2)


def test_discrete_maps_preserve_states(rng):
    rho = random_density_matrix(rng, 4)
    outputs = (
        discrete_recovery(rho),
        discrete_forgetness(rho, 0.3),
        correction_cycle(rho, 0.2, 0.5),
    )
    for out in outputs:
        assert isinstance(out, DensityMatrix)
        out.check()


def test_validate_operating_point_protective_region():
    report = validate_operating_point(
        ModelParams(gamma_dephasing=0.1, gamma_forget=1.0, recovery_rate=1.0)
    )
    assert report.protective.holds
    assert report.protective.margin == pytest.approx(0.5)
    assert report.feasible.holds
    assert report.bounded.holds and report.bounded.marginal


def test_validate_operating_point_outside_region(reference_params):
    report = validate_operating_point(reference_params)
    assert not report.protective.holds
    assert not report.feasible.holds
    assert not report.bounded.holds
    assert report.as_dict()["protective"]["holds"] is False


def test_hardware_feasibility_worked_example():
    estimate = hardware_feasibility()
    assert estimate.max_error_rate_hz == pytest.approx(5e3)
    assert estimate.required_gap_hz == pytest.approx(25e3)
    assert estimate.satisfied
    assert not hardware_feasibility(gap_hz=1e4).satisfied
