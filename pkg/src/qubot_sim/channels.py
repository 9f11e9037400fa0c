"""
Generator of the qubot master equation and the discrete maps it is the continuum
limit of.

All rates are in units of the loop gap Δ and times in units of Δ⁻¹. The generator
is

    ρ̇ = -i[H, ρ] + Σ_a (L_a ρ L_a† - ½{L_a†L_a, ρ})

with H = 1 ⊗ (Δ/2)Z on the loop and jump operators from the environment (dephasing
D₀, D₁ or photodissociation P), recovery (R₀, R₁) and forgetness (F).
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from qubot_sim.errors import DimensionMismatch, InvalidProbability, ZeroForgetness
from qubot_sim.hilbert import (
    IDENTITY_2,
    KET_0BAR,
    KET_1BAR,
    KET_PHI0,
    KET_PHI1,
    KET_S,
    KET_T,
    LOGICAL_DIM,
    DensityMatrix,
    outer,
    projector,
)
from qubot_sim.linalg import ComplexMatrix, as_matrix, dagger, hermitize, kron

logger = logging.getLogger(__name__)

KRAUS_TOL = 1e-10

# Operating-point thresholds: γ > 5Γ protects the e-bit, Δ ≥ 5Γ is feasible and
# γ ≤ Δ is the erasure bound.
PROTECTIVE_RATIO = 5.0
FEASIBLE_RATIO = 5.0

# Worked hardware example: ultracold molecule lifetime and circuit gap.
MOLECULE_LIFETIME_S = 200e-6
CIRCUIT_GAP_HZ = 1e9

LOOP_Z = projector(KET_PHI0) - projector(KET_PHI1)
LOOP_X = outer(KET_PHI0, KET_PHI1) + outer(KET_PHI1, KET_PHI0)
LOOP_LOWER = outer(KET_PHI0, KET_PHI1)


class Environment(str, Enum):
    DEPHASING = "dephasing"
    PHOTODISSOCIATION = "photodissociation"


class ModelParams(BaseModel):
    """Rates of the qubot model in units of Δ."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    gamma_dephasing: float = Field(ge=0.0, description="Γ, environment error rate")
    gamma_forget: float = Field(ge=0.0, description="γ, loop reset rate")
    recovery_rate: float = Field(ge=0.0, description="r, correction rate")
    correction_time: float = Field(default=0.0, ge=0.0, description="t_c")
    delta: float = Field(default=1.0, gt=0.0, description="Δ, loop gap")
    environment: Environment = Environment.DEPHASING

    @classmethod
    def derived(
        cls,
        gamma_dephasing: float,
        gamma_forget: float,
        correction_time: float = 0.0,
        delta: float = 1.0,
        environment: Environment = Environment.DEPHASING,
    ) -> "ModelParams":
        """Build parameters with r = (t_c + 1/γ)⁻¹."""
        return cls(
            gamma_dephasing=gamma_dephasing,
            gamma_forget=gamma_forget,
            recovery_rate=recovery_rate(correction_time, gamma_forget),
            correction_time=correction_time,
            delta=delta,
            environment=environment,
        )

    @property
    def total_rate(self) -> float:
        return (
            self.gamma_dephasing + self.gamma_forget + self.recovery_rate + self.delta
        )


@dataclass(frozen=True, eq=False)
class JumpOperator:
    matrix: ComplexMatrix = field(repr=False)
    label: str

    def __post_init__(self) -> None:
        m = as_matrix(self.matrix)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])


def _on_logical(op: npt.ArrayLike, with_loop: bool) -> ComplexMatrix:
    return kron(op, IDENTITY_2) if with_loop else as_matrix(op)


def _require_rate(name: str, value: float) -> None:
    if value < 0.0 or not math.isfinite(value):
        raise ValueError(f"{name} must be a finite non-negative rate, got {value}")


def loop_hamiltonian(delta: float = 1.0) -> ComplexMatrix:
    """H = 1 ⊗ (Δ/2)(|Φ₀⟩⟨Φ₀| - |Φ₁⟩⟨Φ₁|)"""
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    return kron(IDENTITY_2, 0.5 * delta * LOOP_Z)


def dephasing_jumps(
    gamma_dephasing: float, with_loop: bool = True
) -> List[JumpOperator]:
    """
    D₀ = √Γ |0̄⟩⟨0̄| ⊗ 1, D₁ = √Γ |1̄⟩⟨1̄| ⊗ 1

    Bare 2x2 operators when ``with_loop`` is False.
    """
    _require_rate("Gamma", gamma_dephasing)
    amp = math.sqrt(gamma_dephasing)
    return [
        JumpOperator(amp * _on_logical(projector(KET_0BAR), with_loop), "D0"),
        JumpOperator(amp * _on_logical(projector(KET_1BAR), with_loop), "D1"),
    ]


def recovery_jumps(r: float) -> List[JumpOperator]:
    """R₀ = √r |s⟩⟨s| ⊗ 1, R₁ = √r |s⟩⟨t| ⊗ X"""
    _require_rate("r", r)
    amp = math.sqrt(r)
    return [
        JumpOperator(amp * kron(projector(KET_S), IDENTITY_2), "R0"),
        JumpOperator(amp * kron(outer(KET_S, KET_T), LOOP_X), "R1"),
    ]


def forgetness_jump(gamma_forget: float) -> JumpOperator:
    """F = √γ 1 ⊗ |Φ₀⟩⟨Φ₁|"""
    _require_rate("gamma", gamma_forget)
    return JumpOperator(math.sqrt(gamma_forget) * kron(IDENTITY_2, LOOP_LOWER), "F")


def photodissociation_jump(
    gamma_dephasing: float, with_loop: bool = True
) -> JumpOperator:
    """P = √Γ |t⟩⟨s| ⊗ 1"""
    _require_rate("Gamma", gamma_dephasing)
    return JumpOperator(
        math.sqrt(gamma_dephasing) * _on_logical(outer(KET_T, KET_S), with_loop), "P"
    )


def recovery_rate(t_c: float, gamma: float) -> float:
    """r = (t_c + 1/γ)⁻¹, the inverse of one full correct-and-reset cycle."""
    if t_c < 0.0:
        raise ValueError(f"correction time must be non-negative, got {t_c}")
    if gamma == 0.0:
        raise ZeroForgetness(
            "the recovery rate is undefined for a zero forgetness rate"
        )
    _require_rate("gamma", gamma)
    return 1.0 / (t_c + 1.0 / gamma)


def environment_jumps(
    params: ModelParams, with_loop: bool = True
) -> List[JumpOperator]:
    if params.environment is Environment.PHOTODISSOCIATION:
        return [photodissociation_jump(params.gamma_dephasing, with_loop)]
    return dephasing_jumps(params.gamma_dephasing, with_loop)


def model_generator(
    params: ModelParams, with_loop: bool = True
) -> Tuple[ComplexMatrix, List[JumpOperator]]:
    """
    Hamiltonian and jump operators for a parameter set.

    With ``with_loop`` False this is the free-spin baseline: the bare logical qubit
    under the environment jumps only, with no Hamiltonian (the spin free Hamiltonian is
    omitted throughout).
    """
    if not with_loop:
        free_h = np.zeros((LOGICAL_DIM, LOGICAL_DIM), dtype=np.complex128)
        return free_h, environment_jumps(params, with_loop=False)
    jumps = environment_jumps(params)
    jumps.extend(recovery_jumps(params.recovery_rate))
    jumps.append(forgetness_jump(params.gamma_forget))
    return loop_hamiltonian(params.delta), jumps


def jump_rate_operator(jumps: Sequence[JumpOperator]) -> ComplexMatrix:
    """Σ_a L_a†L_a"""
    if not jumps:
        raise ValueError("no jump operators given")
    zero = np.zeros_like(jumps[0].matrix)
    return sum((dagger(j.matrix) @ j.matrix for j in jumps), start=zero)


def lindblad_rhs(
    h: npt.ArrayLike,
    jumps: Sequence[JumpOperator],
    rho: "DensityMatrix | npt.ArrayLike",
) -> ComplexMatrix:
    """Right-hand side -i[H, ρ] + Σ_a (L ρ L† - ½ L†L ρ - ½ ρ L†L)."""
    hamiltonian = as_matrix(h)
    state = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)
    dim = state.shape[0]
    shapes = [hamiltonian.shape] + [j.matrix.shape for j in jumps]
    if any(shape != state.shape for shape in shapes):
        raise DimensionMismatch(
            f"generator and state dimensions differ (state dim {dim})"
        )

    drho = -1j * (hamiltonian @ state - state @ hamiltonian)
    for jump in jumps:
        op = jump.matrix
        op_dag = dagger(op)
        rate = op_dag @ op
        drho += op @ state @ op_dag - 0.5 * (rate @ state + state @ rate)
    return drho


# Discrete maps


def _check_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise InvalidProbability(f"probability must lie in [0, 1], got {p}")


def apply_kraus(
    rho: DensityMatrix, kraus_ops: Sequence[npt.ArrayLike]
) -> DensityMatrix:
    """ρ ↦ Σ_k K ρ K† for a complete Kraus set."""
    ops = [as_matrix(k) for k in kraus_ops]
    if any(k.shape != rho.matrix.shape for k in ops):
        raise DimensionMismatch(f"Kraus operators do not match state dim {rho.dim}")
    zero = np.zeros_like(rho.matrix)
    completeness = sum((dagger(k) @ k for k in ops), start=zero)
    if np.max(np.abs(completeness - np.eye(rho.dim))) > KRAUS_TOL:
        raise ValueError("Kraus operators are not trace preserving")
    out = sum((k @ rho.matrix @ dagger(k) for k in ops), start=zero)
    return DensityMatrix(hermitize(out))


def dephasing_kraus(p: float) -> List[ComplexMatrix]:
    _check_probability(p)
    return [
        math.sqrt(1.0 - p) * IDENTITY_2,
        math.sqrt(p) * projector(KET_0BAR),
        math.sqrt(p) * projector(KET_1BAR),
    ]


def photodissociation_kraus(p: float) -> List[ComplexMatrix]:
    _check_probability(p)
    return [
        math.sqrt(1.0 - p) * projector(KET_S) + projector(KET_T),
        math.sqrt(p) * outer(KET_T, KET_S),
    ]


def discrete_dephasing(rho: DensityMatrix, p: float) -> DensityMatrix:
    """
    One use of the dephasing environment on the logical qubit.

    On the singlet this gives (1-p)|s⟩⟨s| + p(|s⟩⟨s| + |t⟩⟨t|)/2.
    Composing n uses with p = Γt/n approaches the dephasing dynamics at time t.
    """
    if rho.dim != LOGICAL_DIM:
        raise DimensionMismatch(
            f"discrete dephasing acts on the logical qubit, got dim {rho.dim}"
        )
    return apply_kraus(rho, dephasing_kraus(p))


def discrete_photodissociation(rho: DensityMatrix, p: float) -> DensityMatrix:
    """Singlet decays to the triplet with probability p; the triplet is left alone."""
    if rho.dim != LOGICAL_DIM:
        raise DimensionMismatch(
            f"discrete photodissociation acts on the logical qubit, got dim {rho.dim}"
        )
    return apply_kraus(rho, photodissociation_kraus(p))


def discrete_recovery(rho: DensityMatrix) -> DensityMatrix:
    """One loop interaction: |s⟩|Φ⟩ is untouched, |t⟩|Φ⟩ ↦ |s⟩ X|Φ⟩."""
    return apply_kraus(
        rho,
        [kron(projector(KET_S), IDENTITY_2), kron(outer(KET_S, KET_T), LOOP_X)],
    )


def discrete_forgetness(rho: DensityMatrix, q: float) -> DensityMatrix:
    """Amplitude damping of the loop with reset probability q."""
    _check_probability(q)
    keep = projector(KET_PHI0) + math.sqrt(1.0 - q) * projector(KET_PHI1)
    return apply_kraus(
        rho, [kron(IDENTITY_2, keep), kron(IDENTITY_2, math.sqrt(q) * LOOP_LOWER)]
    )


def correction_cycle(
    rho: DensityMatrix,
    p: float,
    q: float,
    environment: Environment = Environment.DEPHASING,
) -> DensityMatrix:
    """Environment error on the logical factor, then recovery, then loop reset."""
    kraus = (
        photodissociation_kraus(p)
        if Environment(environment) is Environment.PHOTODISSOCIATION
        else dephasing_kraus(p)
    )
    damaged = apply_kraus(rho, [kron(k, IDENTITY_2) for k in kraus])
    return discrete_forgetness(discrete_recovery(damaged), q)


# Operating point


@dataclass(frozen=True)
class HardwareEstimate:
    lifetime_s: float
    gap_hz: float
    max_error_rate_hz: float
    required_gap_hz: float
    satisfied: bool


def hardware_feasibility(
    lifetime_s: float = MOLECULE_LIFETIME_S, gap_hz: float = CIRCUIT_GAP_HZ
) -> HardwareEstimate:
    """Γ ≤ τ⁻¹ turns Δ ≳ 5Γ into Δ > 5τ⁻¹."""
    if lifetime_s <= 0.0:
        raise ValueError(f"lifetime must be positive, got {lifetime_s}")
    max_rate = 1.0 / lifetime_s
    required = FEASIBLE_RATIO * max_rate
    return HardwareEstimate(
        lifetime_s=lifetime_s,
        gap_hz=gap_hz,
        max_error_rate_hz=max_rate,
        required_gap_hz=required,
        satisfied=gap_hz > required,
    )


@dataclass(frozen=True)
class Finding:
    holds: bool
    margin: float
    marginal: bool


@dataclass(frozen=True)
class ValidationReport:
    params: ModelParams
    protective: Finding
    feasible: Finding
    bounded: Finding
    hardware: HardwareEstimate = field(default_factory=hardware_feasibility)

    def as_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for name in ("protective", "feasible", "bounded"):
            finding: Finding = getattr(self, name)
            out[name] = {
                "holds": finding.holds,
                "margin": finding.margin,
                "marginal": finding.marginal,
            }
        out["hardware"] = {
            "lifetime_s": self.hardware.lifetime_s,
            "gap_hz": self.hardware.gap_hz,
            "max_error_rate_hz": self.hardware.max_error_rate_hz,
            "required_gap_hz": self.hardware.required_gap_hz,
            "satisfied": self.hardware.satisfied,
        }
        return out


def validate_operating_point(
    params: ModelParams, hardware: Optional[HardwareEstimate] = None
) -> ValidationReport:
    """
    Check γ > 5Γ (protective), Δ ≥ 5Γ (feasible gap) and γ ≤ Δ (erasure
    bound).

    Margins are the signed slack of each inequality; equality is flagged marginal.
    """
    gamma_d, gamma_f, delta = params.gamma_dephasing, params.gamma_forget, params.delta

    protective_margin = gamma_f - PROTECTIVE_RATIO * gamma_d
    feasible_margin = delta - FEASIBLE_RATIO * gamma_d
    bounded_margin = delta - gamma_f

    report = ValidationReport(
        params=params,
        protective=Finding(
            protective_margin > 0.0, protective_margin, protective_margin == 0.0
        ),
        feasible=Finding(
            feasible_margin >= 0.0, feasible_margin, feasible_margin == 0.0
        ),
        bounded=Finding(bounded_margin >= 0.0, bounded_margin, bounded_margin == 0.0),
        hardware=hardware or hardware_feasibility(),
    )
    logger.debug(f"Operating point {params}: {report.as_dict()}")
    return report
