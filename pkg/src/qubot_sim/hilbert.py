"""
Composite Hilbert space of the qubot: logical qubit AB (major factor) ⊗ loop L
(minor factor).

Logical basis |0̄⟩ = |↑↓⟩, |1̄⟩ = |↓↑⟩; singlet |s⟩ = (|0̄⟩ - |1̄⟩)/√2
and triplet |t⟩ = (|0̄⟩ + |1̄⟩)/√2; loop basis |Φ₀⟩, |Φ₁⟩. Every channel
constructor relies on the (logical ⊗ loop) index ordering fixed here.

The two physical spins only appear through `embed_logical_to_two_spin`, which
feeds the Wootters concurrence. Two-spin ordering is
|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩.
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import numpy.typing as npt

from qubot_sim.errors import DimensionMismatch, InvariantViolated
from qubot_sim.linalg import (
    HERMITIAN_TOL,
    PSD_TOL,
    ComplexMatrix,
    as_matrix,
    eigvalsh,
    hermiticity_defect,
    hermitize,
    kron,
)

logger = logging.getLogger(__name__)

LOGICAL_DIM = 2
LOOP_DIM = 2
COMPOSITE_DIM = LOGICAL_DIM * LOOP_DIM
TRACE_TOL = 1e-8

KET_0BAR = np.array([1.0, 0.0], dtype=np.complex128)
KET_1BAR = np.array([0.0, 1.0], dtype=np.complex128)
KET_S = (KET_0BAR - KET_1BAR) / math.sqrt(2.0)
KET_T = (KET_0BAR + KET_1BAR) / math.sqrt(2.0)
KET_PHI0 = np.array([1.0, 0.0], dtype=np.complex128)
KET_PHI1 = np.array([0.0, 1.0], dtype=np.complex128)

IDENTITY_2 = np.eye(2, dtype=np.complex128)

# Positions of |↑↓⟩ and |↓↑⟩ in the two-spin basis.
ANTIPARALLEL_BLOCK = (1, 2)

for _ket in (KET_0BAR, KET_1BAR, KET_S, KET_T, KET_PHI0, KET_PHI1, IDENTITY_2):
    _ket.setflags(write=False)


class Subsystem(str, Enum):
    AB = "AB"
    L = "L"


def outer(ket: npt.ArrayLike, bra: npt.ArrayLike) -> ComplexMatrix:
    """|ket⟩⟨bra|"""
    return np.outer(np.asarray(ket), np.asarray(bra).conj())


def projector(ket: npt.ArrayLike) -> ComplexMatrix:
    return outer(ket, ket)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Read-only density matrix of dimension 2 (logical, loop or free spin pair) or 4
    (logical ⊗ loop, or two physical spins).

    Construction only checks shape and finiteness; `check` verifies the physical
    invariants (unit trace, Hermiticity, positivity).
    """

    matrix: ComplexMatrix = field(repr=False)

    def __post_init__(self) -> None:
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1] or m.shape[0] not in (LOGICAL_DIM, COMPOSITE_DIM):
            raise DimensionMismatch(f"density matrix must be 2x2 or 4x4, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def min_eigenvalue(self) -> float:
        return float(eigvalsh(hermitize(self.matrix))[0])

    def check(self, context: str = "") -> "DensityMatrix":
        """Raise InvariantViolated unless the state is a valid density matrix."""
        where = f" ({context})" if context else ""
        drift = abs(self.trace() - 1.0)
        if drift > TRACE_TOL:
            raise InvariantViolated(f"trace drift {drift:.3e}{where}")
        defect = hermiticity_defect(self.matrix)
        if defect > HERMITIAN_TOL:
            raise InvariantViolated(f"Hermiticity defect {defect:.3e}{where}")
        lowest = self.min_eigenvalue()
        if lowest < -PSD_TOL:
            raise InvariantViolated(f"negative eigenvalue {lowest:.3e}{where}")
        return self

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim}, trace={self.trace().real:.12g})"


def pure_state(ket: npt.ArrayLike) -> DensityMatrix:
    vector = np.asarray(ket, dtype=np.complex128)
    return DensityMatrix(projector(vector / np.linalg.norm(vector)))


def singlet_state() -> DensityMatrix:
    """|s⟩⟨s| in the {|0̄⟩, |1̄⟩} basis."""
    return DensityMatrix(projector(KET_S))


def triplet_state() -> DensityMatrix:
    return DensityMatrix(projector(KET_T))


def bloch_state(theta: float, phi: float) -> DensityMatrix:
    """Pure logical state cos(θ/2)|0̄⟩ + e^{iφ} sin(θ/2)|1̄⟩; -x̂ is the
    singlet."""
    phase = cmath.exp(1j * phi)
    ket = math.cos(theta / 2.0) * KET_0BAR + phase * math.sin(theta / 2.0) * KET_1BAR
    return DensityMatrix(projector(ket))


def with_loop_ground(rho_logical: DensityMatrix) -> DensityMatrix:
    """ρ ⊗ |Φ₀⟩⟨Φ₀|"""
    if rho_logical.dim != LOGICAL_DIM:
        raise DimensionMismatch(f"expected a logical state, got dim {rho_logical.dim}")
    return DensityMatrix(kron(rho_logical.matrix, projector(KET_PHI0)))


def initial_qubot_state() -> DensityMatrix:
    """ρ(0) = |s⟩⟨s| ⊗ |Φ₀⟩⟨Φ₀|"""
    return with_loop_ground(singlet_state())


def partial_trace(rho: DensityMatrix, keep: Subsystem) -> DensityMatrix:
    """Reduce a logical ⊗ loop state to the kept factor."""
    if rho.dim != COMPOSITE_DIM:
        raise DimensionMismatch(f"partial trace needs a dim-4 state, got dim {rho.dim}")
    blocks = rho.matrix.reshape(LOGICAL_DIM, LOOP_DIM, LOGICAL_DIM, LOOP_DIM)
    if Subsystem(keep) is Subsystem.AB:
        return DensityMatrix(np.einsum("ijkj->ik", blocks))
    return DensityMatrix(np.einsum("ijik->jk", blocks))


def embed_logical_to_two_spin(rho_logical: DensityMatrix) -> DensityMatrix:
    """Place a logical 2x2 state in the {|↑↓⟩, |↓↑⟩} block of the two-spin
    space."""
    if rho_logical.dim != LOGICAL_DIM:
        raise DimensionMismatch(f"expected a logical state, got dim {rho_logical.dim}")
    full = np.zeros((4, 4), dtype=np.complex128)
    full[np.ix_(ANTIPARALLEL_BLOCK, ANTIPARALLEL_BLOCK)] = rho_logical.matrix
    return DensityMatrix(full)


def project_two_spin_to_logical(rho_two_spin: DensityMatrix) -> DensityMatrix:
    """Inverse of `embed_logical_to_two_spin`: keep the antiparallel block."""
    if rho_two_spin.dim != 4:
        raise DimensionMismatch(
            f"expected a two-spin state, got dim {rho_two_spin.dim}"
        )
    block = np.ix_(ANTIPARALLEL_BLOCK, ANTIPARALLEL_BLOCK)
    return DensityMatrix(rho_two_spin.matrix[block])
