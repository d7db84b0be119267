"""
Resonance Conditions

The nine ways a centre line or sideband of qubit 1 (Delta_1, Delta_1 +- W_1)
can line up with one of qubit 2. Each condition knows its sideband indices,
which W_1/W_2 ratios would switch on a competing interaction, what gate the
resulting interaction generates, and how to build that interaction.

For a resonant pair (s1, s2) at detuning mu the second-order exchange is

    V_qq = -J k1 k2 (O1 O2^dagger + h.c.),   J = g1 g2 / (4 mu)

with O the sideband operator (sigma_z, sigma_+, sigma_-) and k the sideband
weight (sin theta, -(1 - cos theta), 1 + cos theta).
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Tuple, Union
import logging
import math

import numpy as np

from .exceptions import UnsupportedError, ValidationError
from .magnus import SIDEBAND_OPERATORS, sideband_weights
from .models import SystemParams
from .operators import BasisDescriptor, OperatorMatrix, TWO_QUBIT, pauli

logger = logging.getLogger(__name__)


class GateKind(str, Enum):
    CONTROLLED_PHASE = 'controlled-phase'
    CNOT = 'CNOT'
    ISWAP = 'iSWAP'
    DOUBLE_EXCITATION = 'double-excitation'


@dataclass(frozen=True)
class ConditionSpec:
    number: int
    s1: int
    s2: int
    forbidden_ratios: Tuple[Fraction, ...]
    gate: GateKind
    resonance_text: str
    constraint_text: str
    interaction_text: str
    gate_text: str


def _ratios(*values) -> Tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)


_HALF = Fraction(1, 2)


class ResonanceCondition(Enum):
    RC1 = ConditionSpec(1, 0, 0, _ratios(1, -1), GateKind.CONTROLLED_PHASE,
                        'Δ₁=Δ₂', 'W₁≠±W₂', '−2𝒥σ₁ᶻσ₂ᶻ', 'Controlled-phase (U_φ)')
    RC2 = ConditionSpec(2, 0, 1, _ratios(1, -1, 2, -2), GateKind.CNOT,
                        'Δ₁=Δ₂⁺', 'W₁≠±W₂,±2W₂', '𝒥σ₁ᶻσ₂ˣ', 'CNOT')
    RC3 = ConditionSpec(3, 0, -1, _ratios(1, -1, 2, -2), GateKind.CNOT,
                        'Δ₁=Δ₂⁻', 'W₁≠±W₂,±2W₂', '−𝒥σ₁ᶻσ₂ˣ', 'CNOT')
    RC4 = ConditionSpec(4, 1, 0, _ratios(1, -1, _HALF, -_HALF), GateKind.CNOT,
                        'Δ₁⁺=Δ₂', 'W₁≠±W₂,±W₂/2', '𝒥σ₁ˣσ₂ᶻ', 'CNOT')
    RC5 = ConditionSpec(5, -1, 0, _ratios(1, -1, _HALF, -_HALF), GateKind.CNOT,
                        'Δ₁⁻=Δ₂', 'W₁≠±W₂,±W₂/2', '−𝒥σ₁ˣσ₂ᶻ', 'CNOT')
    RC6 = ConditionSpec(6, 1, 1, _ratios(1, 2, _HALF), GateKind.ISWAP,
                        'Δ₁⁺=Δ₂⁺', 'W₁≠W₂,2W₂,W₂/2', '−𝒥(σ₁⁺σ₂⁻+σ₁⁻σ₂⁺)', 'iSWAP (U_iSW)')
    RC7 = ConditionSpec(7, -1, -1, _ratios(1, 2, _HALF), GateKind.ISWAP,
                        'Δ₁⁻=Δ₂⁻', 'W₁≠W₂,2W₂,W₂/2', '−𝒥(σ₁⁺σ₂⁻+σ₁⁻σ₂⁺)', 'iSWAP (U_iSW)')
    RC8 = ConditionSpec(8, 1, -1, _ratios(-1, -2, -_HALF), GateKind.DOUBLE_EXCITATION,
                        'Δ₁⁺=Δ₂⁻', 'W₁≠−W₂,−2W₂,−W₂/2', '𝒥(σ₁⁺σ₂⁺+σ₁⁻σ₂⁻)', 'Double-excitation (U_iDE)')
    RC9 = ConditionSpec(9, -1, 1, _ratios(-1, -2, -_HALF), GateKind.DOUBLE_EXCITATION,
                        'Δ₁⁻=Δ₂⁺', 'W₁≠−W₂,−2W₂,−W₂/2', '𝒥(σ₁⁺σ₂⁺+σ₁⁻σ₂⁻)', 'Double-excitation (U_iDE)')

    @property
    def number(self) -> int:
        return self.value.number

    @property
    def sidebands(self) -> Tuple[int, int]:
        return self.value.s1, self.value.s2

    @property
    def gate(self) -> GateKind:
        return self.value.gate

    @property
    def label(self) -> str:
        return f"rc{self.number}"

    @classmethod
    def parse(cls, value: Union[str, int, 'ResonanceCondition']) -> 'ResonanceCondition':
        """
        Accepts 7, '7', 'rc7' or 'RC7'.
        """
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        if text.startswith('rc'):
            text = text[2:]
        try:
            number = int(text)
        except ValueError:
            raise ValidationError(f"Unknown resonance condition '{value}'", relation='condition in rc1..rc9')
        for cond in cls:
            if cond.number == number:
                return cond
        raise ValidationError(f"Unknown resonance condition '{value}'", relation='condition in rc1..rc9')

    def resonant_index(self, sys: SystemParams) -> int:
        """w = p_1 + s_1 q_1, the resonant detuning in units of eta."""
        s1, _ = self.sidebands
        return sys.p[0] + s1 * sys.q[0]

    def holds(self, sys: SystemParams) -> bool:
        s1, s2 = self.sidebands
        return sys.p[0] + s1 * sys.q[0] == sys.p[1] + s2 * sys.q[1]

    def violated_constraints(self, sys: SystemParams) -> List[str]:
        """
        W_1/W_2 ratios that would make another pair resonant at the same time.
        """
        q1, q2 = sys.q
        if q2 == 0:
            return ["W₂ = 0"]
        ratio = Fraction(q1, q2)
        return [f"W₁/W₂ = {ratio}" for forbidden in self.value.forbidden_ratios if ratio == forbidden]

    def constraints_satisfied(self, sys: SystemParams) -> bool:
        return not self.violated_constraints(sys)

    def describe(self) -> Dict[str, str]:
        spec = self.value
        return {
            'R': spec.number,
            'resonance': spec.resonance_text,
            'constraints': spec.constraint_text,
            'interaction': spec.interaction_text,
            'gate': spec.gate_text,
        }


def table_rows() -> List[Dict[str, str]]:
    return [cond.describe() for cond in ResonanceCondition]


def classify_resonance(sys: SystemParams) -> List[Tuple[ResonanceCondition, bool]]:
    """
    Every condition whose equality holds on the grid, with whether its
    W-constraints are met.
    """
    matches = []
    for cond in ResonanceCondition:
        if cond.holds(sys):
            matches.append((cond, cond.constraints_satisfied(sys)))
    logger.info(f"Resonance conditions holding: {[c.label for c, _ in matches] or 'none'}")
    return matches


def two_photon_resonances(sys: SystemParams) -> List[Tuple[int, int]]:
    """
    Sideband pairs with mu_1 = -mu_2. These give resonant O1 O2 a^dagger^2
    terms that leave the fixed-photon-number subspace.
    """
    pairs = []
    for s1 in (0, 1, -1):
        for s2 in (0, 1, -1):
            if sys.p[0] + s1 * sys.q[0] == -(sys.p[1] + s2 * sys.q[1]):
                pairs.append((s1, s2))
    return pairs


def interaction_operator(s1: int, s2: int, weight: complex) -> np.ndarray:
    """
    -weight * O1 O2^dagger + h.c. on the 4-dim two-qubit space.
    """
    o1 = pauli(SIDEBAND_OPERATORS[s1], 1).data
    o2 = pauli(SIDEBAND_OPERATORS[s2], 2).data
    x = -weight * (o1 @ o2.conj().T)
    return x + x.conj().T


def coupling_strength(sys: SystemParams, cond: ResonanceCondition) -> float:
    """J = g1 g2 / (4 Delta) with Delta the resonant detuning (rad/ns)."""
    w = cond.resonant_index(sys)
    if w == 0:
        raise ValidationError("Resonant detuning is zero; J is undefined", relation='Delta != 0')
    mu = sys.sideband(1, cond.sidebands[0])
    return sys.qubits[0].g * sys.qubits[1].g / (4.0 * mu)


def _require_zero_phases(sys: SystemParams):
    if any(qb.phase != 0 for qb in sys.qubits):
        raise UnsupportedError(
            "Effective-theory operations assume zero drive phases", relation='phi_j = 0'
        )


def build_vqq(sys: SystemParams, cond: ResonanceCondition,
              check_constraints: bool = True) -> Tuple[OperatorMatrix, float]:
    """
    Qubit-qubit interaction for one resonance condition at general delta_j.

    Args:
        sys: system on the integer grid
        cond: the resonance condition to build
        check_constraints: reject when a competing pair is also resonant

    Returns:
        (V_qq on the two-qubit space, J in rad/ns)
    """
    _require_zero_phases(sys)
    if not cond.holds(sys):
        raise ValidationError(
            f"Resonance condition {cond.number} does not hold for p={sys.p}, q={sys.q}",
            relation=cond.value.resonance_text,
        )
    violations = cond.violated_constraints(sys)
    if check_constraints and violations:
        raise ValidationError(
            f"Resonance condition {cond.number} constraint violated: {', '.join(violations)}",
            relation=cond.value.constraint_text,
        )

    J = coupling_strength(sys, cond)
    s1, s2 = cond.sidebands
    k1 = sideband_weights(sys.qubits[0].theta)[s1]
    k2 = sideband_weights(sys.qubits[1].theta)[s2]
    data = interaction_operator(s1, s2, J * k1 * k2)
    return OperatorMatrix(data, BasisDescriptor(TWO_QUBIT)), J


def vqq_table_form(cond: ResonanceCondition, J: float) -> OperatorMatrix:
    """
    The resonant-drive (delta = 0) interaction listed for the condition.
    """
    s1, s2 = cond.sidebands
    k = sideband_weights(math.pi / 2)
    # Round away the 1e-17 left by cos(pi/2)
    weight = J * round(k[s1]) * round(k[s2])
    return OperatorMatrix(interaction_operator(s1, s2, weight), BasisDescriptor(TWO_QUBIT))


def vqq_all(sys: SystemParams) -> OperatorMatrix:
    """
    Sum of V_qq over every condition that holds, constraints ignored. This
    is the full qubit-qubit part of the second-order term.
    """
    total = np.zeros((4, 4), dtype=complex)
    for cond, _ in classify_resonance(sys):
        op, _ = build_vqq(sys, cond, check_constraints=False)
        total += op.data
    return OperatorMatrix(total, BasisDescriptor(TWO_QUBIT))
