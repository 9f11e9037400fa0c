"""
Entanglement, entropy, fidelity and Bloch-vector measures on qubot states.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from qubot_sim.errors import DimensionMismatch, NotStabilized
from qubot_sim.hilbert import (
    KET_S,
    LOGICAL_DIM,
    DensityMatrix,
    Subsystem,
    embed_logical_to_two_spin,
    partial_trace,
)
from qubot_sim.linalg import eigvalsh, hermitize, psd_sqrt

logger = logging.getLogger(__name__)

ENTROPY_CUTOFF = 1e-12
STABILIZATION_RELATIVE = 1e-3
STABILIZATION_ABSOLUTE = 1e-6
ROUNDOFF_EIGENVALUE = 1e-15

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y)


class FidelityConvention(str, Enum):
    OVERLAP = "overlap"
    SQRT = "sqrt"


class EntropyBase(str, Enum):
    E = "e"
    TWO = "2"

    @property
    def log_base(self) -> float:
        return math.e if self is EntropyBase.E else 2.0


class Fidelity(NamedTuple):
    overlap: float
    sqrt_overlap: float

    def select(self, convention: FidelityConvention) -> float:
        if FidelityConvention(convention) is FidelityConvention.SQRT:
            return self.sqrt_overlap
        return self.overlap


@dataclass(frozen=True)
class MetricSample:
    time: float
    concurrence_ab: float
    entropy_ab: float
    entropy_loop: float
    fidelity_singlet: float


def _require_logical(rho: DensityMatrix) -> None:
    if rho.dim != LOGICAL_DIM:
        raise DimensionMismatch(f"expected a logical (dim 2) state, got dim {rho.dim}")


def concurrence(rho_two_spin: DensityMatrix) -> float:
    """
    Wootters concurrence of a two-spin state.

    λᵢ are the square roots of the eigenvalues of √ρ ρ̃ √ρ with
    ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y); C = max(0, λ₁ - λ₂ - λ₃ - λ₄).
    """
    if rho_two_spin.dim != 4:
        raise DimensionMismatch(
            f"concurrence needs a two-spin state, got dim {rho_two_spin.dim}"
        )
    rho = rho_two_spin.matrix
    root = psd_sqrt(rho)
    flipped = SPIN_FLIP @ rho.conj() @ SPIN_FLIP
    evals = eigvalsh(hermitize(root @ flipped @ root))
    # round-off eigenvalues are zeroed before the square root
    floor = ROUNDOFF_EIGENVALUE * max(float(np.max(evals)), 0.0)
    evals = np.where(evals > floor, evals, 0.0)
    lambdas = np.sort(np.sqrt(evals))[::-1]
    value = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]
    return float(min(1.0, max(0.0, value)))


def logical_concurrence(rho_logical: DensityMatrix) -> float:
    """C = 2|⟨0̄|ρ|1̄⟩|, exact for states supported on the antiparallel block."""
    _require_logical(rho_logical)
    return float(min(1.0, 2.0 * abs(rho_logical.matrix[0, 1])))


def logical_concurrence_wootters(rho_logical: DensityMatrix) -> float:
    return concurrence(embed_logical_to_two_spin(rho_logical))


def von_neumann_entropy(rho: DensityMatrix, base: float = 2.0) -> float:
    """S = -Σ λ log λ, skipping eigenvalues below 1e-12."""
    evals = eigvalsh(rho.matrix)
    kept = evals[evals > ENTROPY_CUTOFF]
    if kept.size == 0:
        return 0.0
    entropy = -float(np.sum(kept * np.log(kept))) / math.log(base)
    return max(0.0, entropy)


def fidelity_to_singlet(rho_logical: DensityMatrix) -> Fidelity:
    _require_logical(rho_logical)
    overlap = float(np.real(KET_S.conj() @ rho_logical.matrix @ KET_S))
    overlap = min(1.0, max(0.0, overlap))
    return Fidelity(overlap=overlap, sqrt_overlap=math.sqrt(overlap))


def bloch_vector(rho_logical: DensityMatrix) -> Tuple[float, float, float]:
    """Logical Pauli expectations; +x̂ is the triplet, -x̂ the singlet."""
    _require_logical(rho_logical)
    m = rho_logical.matrix
    return (
        float(np.real(np.trace(SIGMA_X @ m))),
        float(np.real(np.trace(SIGMA_Y @ m))),
        float(np.real(np.trace(SIGMA_Z @ m))),
    )


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    if rho.dim != sigma.dim:
        raise DimensionMismatch(
            f"states differ in dimension ({rho.dim} vs {sigma.dim})"
        )
    evals = eigvalsh(hermitize(rho.matrix - sigma.matrix))
    return 0.5 * float(np.sum(np.abs(evals)))


def stabilization_time(
    concurrence_series: Sequence[Tuple[float, float]], c_infinity: float
) -> float:
    """
    Earliest sample time from which C stays within 0.1% of C∞ for the rest of the
    series. When C∞ < 1e-6 the criterion is |C - C∞| ≤ 1e-6 instead.

    Raises:
        NotStabilized: the last sample does not meet the criterion
    """
    if not concurrence_series:
        raise NotStabilized("empty concurrence series")

    if c_infinity < STABILIZATION_ABSOLUTE:
        def settled(c: float) -> bool:
            return abs(c - c_infinity) <= STABILIZATION_ABSOLUTE
    else:
        def settled(c: float) -> bool:
            return abs(c - c_infinity) / c_infinity <= STABILIZATION_RELATIVE

    onset = None
    for time, value in reversed(concurrence_series):
        if not settled(value):
            break
        onset = time
    if onset is None:
        last_time, last_value = concurrence_series[-1]
        raise NotStabilized(
            f"concurrence {last_value:.6g} at t={last_time:.6g} is not within "
            f"tolerance of C_inf={c_infinity:.6g}"
        )
    return float(onset)


def sample_metrics(
    time: float,
    rho: DensityMatrix,
    entropy_base: float = math.e,
    fidelity_convention: FidelityConvention = FidelityConvention.OVERLAP,
) -> MetricSample:
    """C(AB), S(AB), S(L) and singlet fidelity of a logical ⊗ loop state."""
    rho_ab = partial_trace(rho, Subsystem.AB)
    rho_loop = partial_trace(rho, Subsystem.L)
    return MetricSample(
        time=float(time),
        concurrence_ab=logical_concurrence_wootters(rho_ab),
        entropy_ab=von_neumann_entropy(rho_ab, base=entropy_base),
        entropy_loop=von_neumann_entropy(rho_loop, base=entropy_base),
        fidelity_singlet=fidelity_to_singlet(rho_ab).select(fidelity_convention),
    )
