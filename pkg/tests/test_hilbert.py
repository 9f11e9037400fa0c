import math

import numpy as np
import pytest
from conftest import random_density_matrix

from qubot_sim.errors import DimensionMismatch, InvariantViolated
from qubot_sim.hilbert import (
    KET_PHI0,
    KET_S,
    KET_T,
    DensityMatrix,
    Subsystem,
    bloch_state,
    embed_logical_to_two_spin,
    initial_qubot_state,
    partial_trace,
    projector,
    project_two_spin_to_logical,
    pure_state,
    singlet_state,
    triplet_state,
    with_loop_ground,
)
from qubot_sim.linalg import kron


def test_singlet_and_triplet_are_orthogonal():
    assert abs(np.vdot(KET_S, KET_T)) < 1e-15
    assert singlet_state().purity() == pytest.approx(1.0)
    overlap = np.trace(singlet_state().matrix @ triplet_state().matrix)
    assert overlap == pytest.approx(0.0)


def test_density_matrix_is_read_only():
    rho = singlet_state()
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 2.0


def test_density_matrix_rejects_bad_shapes():
    with pytest.raises(DimensionMismatch):
        DensityMatrix(np.eye(3) / 3)
    with pytest.raises(DimensionMismatch):
        DensityMatrix(np.ones(4))


def test_check_flags_each_invariant():
    with pytest.raises(InvariantViolated, match="trace"):
        DensityMatrix(np.eye(2)).check()
    with pytest.raises(InvariantViolated, match="Hermiticity"):
        DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]])).check()
    with pytest.raises(InvariantViolated, match="negative"):
        DensityMatrix(np.diag([1.2, -0.2])).check()
    assert singlet_state().check() is not None


def test_pure_state_normalizes():
    rho = pure_state([1.0, 1.0])
    np.testing.assert_allclose(rho.matrix, projector(KET_T), atol=1e-15)


def test_bloch_state_poles_and_singlet():
    np.testing.assert_allclose(
        bloch_state(0.0, 0.0).matrix, np.diag([1.0, 0.0]), atol=1e-15
    )
    np.testing.assert_allclose(
        bloch_state(math.pi / 2, math.pi).matrix, singlet_state().matrix, atol=1e-15
    )


def test_initial_state_reduces_to_singlet_and_loop_ground():
    rho = initial_qubot_state()
    assert rho.dim == 4
    logical = partial_trace(rho, Subsystem.AB).matrix
    np.testing.assert_allclose(logical, singlet_state().matrix)
    loop = partial_trace(rho, Subsystem.L).matrix
    np.testing.assert_allclose(loop, projector(KET_PHI0))


def test_partial_trace_of_product_state(rng):
    a = random_density_matrix(rng, 2)
    b = random_density_matrix(rng, 2)
    rho = DensityMatrix(kron(a.matrix, b.matrix))
    logical = partial_trace(rho, Subsystem.AB).matrix
    np.testing.assert_allclose(logical, a.matrix, atol=1e-14)
    loop = partial_trace(rho, Subsystem.L).matrix
    np.testing.assert_allclose(loop, b.matrix, atol=1e-14)


def test_partial_trace_needs_composite_state():
    with pytest.raises(DimensionMismatch):
        partial_trace(singlet_state(), Subsystem.AB)


def test_with_loop_ground_needs_logical_state():
    with pytest.raises(DimensionMismatch):
        with_loop_ground(initial_qubot_state())


def test_embedding_uses_antiparallel_block(rng):
    rho = random_density_matrix(rng, 2)
    full = embed_logical_to_two_spin(rho)
    assert full.matrix[0, 0] == 0.0 and full.matrix[3, 3] == 0.0
    np.testing.assert_allclose(full.matrix[1:3, 1:3], rho.matrix)
    np.testing.assert_allclose(project_two_spin_to_logical(full).matrix, rho.matrix)
