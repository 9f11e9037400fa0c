"""
Dense complex linear algebra for the small matrices of the qubot model.

Matrices are numpy complex128 arrays (row-major). Dimensions never exceed 16, so the
eigensolver is a cyclic Jacobi sweep and linear systems use partial-pivot elimination.
"""
import logging
import math
from typing import Tuple

import numpy as np
import numpy.typing as npt

from qubot_sim.errors import DimensionMismatch, NotHermitian, NotPSD, Singular

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
RealVector = npt.NDArray[np.float64]

MAX_DIM = 16
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-8
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
SINGULAR_TOL = 1e-13


def as_matrix(a: npt.ArrayLike) -> ComplexMatrix:
    """Copy ``a`` into a complex128 matrix and reject non-finite entries."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got an array of shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _require_square(a: ComplexMatrix) -> int:
    rows, cols = a.shape
    if rows != cols:
        raise DimensionMismatch(f"expected a square matrix, got {rows}x{cols}")
    if rows > MAX_DIM:
        raise DimensionMismatch(f"dimension {rows} exceeds the supported {MAX_DIM}")
    return rows


def dagger(a: npt.ArrayLike) -> ComplexMatrix:
    m = as_matrix(a)
    return m.conj().T


def hermitize(a: npt.ArrayLike) -> ComplexMatrix:
    m = as_matrix(a)
    return 0.5 * (m + dagger(m))


def hermiticity_defect(a: npt.ArrayLike) -> float:
    """Largest entry of |a - a†|."""
    m = np.asarray(a)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    """Kronecker product; the left factor is the major index."""
    return np.kron(as_matrix(a), as_matrix(b))


def _max_off_diagonal(work: ComplexMatrix) -> float:
    off = work - np.diag(np.diag(work))
    return float(np.max(np.abs(off))) if off.size else 0.0


def _jacobi_rotate(work: ComplexMatrix, vecs: ComplexMatrix, p: int, q: int) -> None:
    apq = work[p, q]
    mag = abs(apq)
    if mag == 0.0:
        return

    # Phase the pair so the pivot is real, then apply the symmetric Schur rotation.
    phase = apq / mag
    tau = (work[q, q].real - work[p, p].real) / (2.0 * mag)
    t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c
    rot = np.array(
        [[c, s], [-s * phase.conjugate(), c * phase.conjugate()]],
        dtype=np.complex128,
    )

    pair = [p, q]
    work[:, pair] = work[:, pair] @ rot
    work[pair, :] = rot.conj().T @ work[pair, :]
    work[p, q] = 0.0
    work[q, p] = 0.0
    work[p, p] = work[p, p].real
    work[q, q] = work[q, q].real
    vecs[:, pair] = vecs[:, pair] @ rot


def hermitian_eig(h: npt.ArrayLike) -> Tuple[RealVector, ComplexMatrix]:
    """
    Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Args:
        h: Hermitian matrix, ``|h - h†|_max <= 1e-10``

    Returns:
        Eigenvalues in ascending order and the matching eigenvectors as columns of a
        unitary matrix, so that ``h = V diag(w) V†``.
    """
    a = as_matrix(h)
    n = _require_square(a)
    defect = hermiticity_defect(a)
    if defect > HERMITIAN_TOL:
        raise NotHermitian(f"matrix is not Hermitian (defect {defect:.3e})")

    work = hermitize(a)
    vecs = np.eye(n, dtype=np.complex128)
    threshold = JACOBI_TOL * max(1.0, float(np.max(np.abs(work))) if n else 1.0)

    sweeps = 0
    while sweeps < JACOBI_MAX_SWEEPS and _max_off_diagonal(work) >= threshold:
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(work, vecs, p, q)
        sweeps += 1
    logger.debug(f"Jacobi converged after {sweeps} sweeps for n={n}")

    evals = work.diagonal().real.copy()
    order = np.argsort(evals, kind="stable")
    return evals[order], vecs[:, order]


def eigvalsh(h: npt.ArrayLike) -> RealVector:
    return hermitian_eig(h)[0]


def psd_sqrt(rho: npt.ArrayLike) -> ComplexMatrix:
    """Principal square root of a positive semidefinite Hermitian matrix."""
    evals, vecs = hermitian_eig(rho)
    if evals.size and evals[0] < -PSD_TOL:
        raise NotPSD(f"matrix has a negative eigenvalue {evals[0]:.3e}")
    roots = np.sqrt(np.clip(evals, 0.0, None))
    return hermitize((vecs * roots) @ dagger(vecs))


def solve_linear(a: npt.ArrayLike, b: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """
    Solve ``a x = b`` by Gaussian elimination with partial pivoting.

    Raises:
        Singular: a pivot falls below 1e-13 times the largest entry of ``a``
    """
    m = as_matrix(a)
    n = _require_square(m)
    x = np.array(b, dtype=np.complex128).reshape(-1)
    if x.shape[0] != n:
        raise DimensionMismatch(
            f"right-hand side has length {x.shape[0]}, expected {n}"
        )

    scale = float(np.max(np.abs(m))) if n else 0.0
    if scale == 0.0:
        raise Singular("matrix is zero")

    for k in range(n):
        pivot = k + int(np.argmax(np.abs(m[k:, k])))
        if abs(m[pivot, k]) < SINGULAR_TOL * scale:
            raise Singular(f"pivot {k} is below tolerance ({abs(m[pivot, k]):.3e})")
        if pivot != k:
            m[[k, pivot], :] = m[[pivot, k], :]
            x[[k, pivot]] = x[[pivot, k]]
        factors = m[k + 1 :, k] / m[k, k]
        m[k + 1 :, k:] -= np.outer(factors, m[k, k:])
        x[k + 1 :] -= factors * x[k]

    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - m[k, k + 1 :] @ x[k + 1 :]) / m[k, k]
    return x
