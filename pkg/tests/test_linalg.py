import numpy as np
import pytest
from conftest import random_density_matrix, random_hermitian, random_matrix

from qubot_sim.errors import DimensionMismatch, NotHermitian, NotPSD, Singular
from qubot_sim.linalg import (
    dagger,
    eigvalsh,
    hermitian_eig,
    hermiticity_defect,
    kron,
    psd_sqrt,
    solve_linear,
)


@pytest.mark.parametrize("dim", [1, 2, 4, 8, 16])
def test_hermitian_eig_matches_numpy(rng, dim):
    h = random_hermitian(rng, dim)
    evals, vecs = hermitian_eig(h)

    np.testing.assert_allclose(evals, np.linalg.eigvalsh(h), atol=1e-10)
    assert np.all(np.diff(evals) >= 0.0)
    np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(dim), atol=1e-10)
    np.testing.assert_allclose(vecs @ np.diag(evals) @ vecs.conj().T, h, atol=1e-10)


def test_hermitian_eig_of_diagonal_matrix_is_sorted():
    evals, vecs = hermitian_eig(np.diag([3.0, -1.0, 2.0]))
    np.testing.assert_allclose(evals, [-1.0, 2.0, 3.0])
    np.testing.assert_allclose(np.abs(vecs), np.eye(3)[:, [1, 2, 0]])


def test_hermitian_eig_degenerate_spectrum(rng):
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    h = q @ np.diag([1.0, 1.0, 1.0, -2.0]) @ q.conj().T
    np.testing.assert_allclose(eigvalsh(h), [-2.0, 1.0, 1.0, 1.0], atol=1e-10)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_hermitian_eig_rejects_non_square_and_oversized():
    with pytest.raises(DimensionMismatch):
        hermitian_eig(np.zeros((2, 3)))
    with pytest.raises(DimensionMismatch):
        hermitian_eig(np.eye(17))


def test_non_finite_entries_are_rejected():
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_dagger_and_defect(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    np.testing.assert_allclose(dagger(a), a.conj().T)
    assert hermiticity_defect(a + a.conj().T) == pytest.approx(0.0, abs=1e-15)
    assert hermiticity_defect(a) > 0.0


def test_kron_puts_left_factor_on_major_index():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    b = np.eye(2)
    out = kron(a, b)
    assert out[0, 2] == 1.0
    assert out[1, 3] == 1.0
    assert out[0, 1] == 0.0


def test_kron_is_associative_and_bilinear(rng):
    a, b, c = (random_matrix(rng, 2) for _ in range(3))
    np.testing.assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-12)
    alpha, beta = 0.3 - 1.2j, 2.5
    np.testing.assert_allclose(
        kron(alpha * a + beta * b, c),
        alpha * kron(a, c) + beta * kron(b, c),
        atol=1e-12,
    )
    np.testing.assert_allclose(
        kron(a, alpha * b + beta * c),
        alpha * kron(a, b) + beta * kron(a, c),
        atol=1e-12,
    )


def test_kron_mixed_product(rng):
    a, b, c, d = (random_matrix(rng, 2) for _ in range(4))
    np.testing.assert_allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)


def test_psd_sqrt_squares_back(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    root = psd_sqrt(rho)
    np.testing.assert_allclose(root @ root, rho, atol=1e-9)
    assert np.all(eigvalsh(root) >= -1e-12)


def test_psd_sqrt_commutes_with_input(rng):
    for dim in (2, 4):
        rho = random_density_matrix(rng, dim).matrix
        root = psd_sqrt(rho)
        assert np.max(np.abs(root @ rho - rho @ root)) <= 1e-9


def test_psd_sqrt_clamps_round_off_negatives():
    root = psd_sqrt(np.diag([1.0, -1e-12]))
    np.testing.assert_allclose(root, np.diag([1.0, 0.0]), atol=1e-15)


def test_psd_sqrt_rejects_negative_matrix():
    with pytest.raises(NotPSD):
        psd_sqrt(np.diag([1.0, -0.1]))


def test_solve_linear_matches_numpy(rng):
    a = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    b = rng.normal(size=16) + 1j * rng.normal(size=16)
    np.testing.assert_allclose(solve_linear(a, b), np.linalg.solve(a, b), atol=1e-10)


def test_solve_linear_needs_pivoting():
    x = solve_linear(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([2.0, 3.0]))
    np.testing.assert_allclose(x, [3.0, 2.0])


def test_solve_linear_singular():
    with pytest.raises(Singular):
        solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 0.0]))


def test_solve_linear_rhs_length():
    with pytest.raises(DimensionMismatch):
        solve_linear(np.eye(3), np.ones(2))
