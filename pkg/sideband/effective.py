"""
Effective Two-Qubit Theory

Everything downstream of V_qq: the drive-induced dispersive shifts, the
fixed-photon-number effective Hamiltonian, the ideal gates, the
shift-cancellation constraints for the iSWAP and double-excitation
conditions, and the closed-form fidelities F_s that measure how much the
shifts spoil the gate.

Frequencies are angular (rad/ns) everywhere in here. The two-qubit block is
ordered {ee, eg, ge, gg}.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Tuple
import logging
import math

import numpy as np

from .exceptions import UnsupportedError, ValidationError
from .magnus import h_integral
from .models import DrivenQubitParams, SystemParams, TWO_PI, to_mhz
from .operators import (
    BasisDescriptor, OperatorMatrix, TWO_QUBIT, HERMITIAN_TOL, expm, parse_two_qubit_label, pauli,
)
from .resonance import (
    GateKind, ResonanceCondition, build_vqq, coupling_strength, vqq_table_form,
)

logger = logging.getLogger(__name__)

# Relative tolerance for the shift-cancellation constraints
CONSTRAINT_TOL = 1e-2
_POLE_TOL = 1e-12

# Two-state blocks that V_qq leaves invariant, per condition
_BLOCKS = {
    ResonanceCondition.RC1: (('ee', 'eg'), ('ge', 'gg')),
    ResonanceCondition.RC4: (('ee', 'ge'), ('eg', 'gg')),
    ResonanceCondition.RC7: (('eg', 'ge'), ('ee', 'gg')),
    ResonanceCondition.RC9: (('ee', 'gg'), ('eg', 'ge')),
}

# Initial state each compact gate-time formula is written for
GATE_TIME_STATES = {
    ResonanceCondition.RC4: 'eg',
    ResonanceCondition.RC7: 'eg',
    ResonanceCondition.RC9: 'ee',
}


@dataclass(frozen=True)
class ShiftCoefficients:
    """
    Coefficients of sigma_j^z (a^dagger a + 1/2) in rad/ns, valid for any
    delta_j. At delta_j = 0 they reduce to resonant_shift().
    """
    chi1: float
    chi2: float

    def to_mhz(self) -> Dict[str, float]:
        return {'chi1_mhz': to_mhz(self.chi1), 'chi2_mhz': to_mhz(self.chi2)}


def _check_poles(Delta: float, W: float, j: int = 1):
    scale = max(abs(Delta), abs(W), 1.0)
    if abs(Delta) <= _POLE_TOL * scale:
        raise ValidationError(f"Delta_{j} = 0", relation='Delta_j != 0')
    if abs(W - abs(Delta)) <= _POLE_TOL * scale:
        raise ValidationError(f"W_{j} = |Delta_{j}|", relation='W_j != |Delta_j|')
    if abs(W - abs(2.0 * Delta)) <= _POLE_TOL * scale:
        raise ValidationError(f"W_{j} = |2 Delta_{j}|", relation='W_j != |2 Delta_j|')


def lambda_coefficient(qubit: DrivenQubitParams, Delta: float, j: int = 1) -> float:
    """
    Coefficient of sigma^z (a^dagger a + 1/2) for one driven qubit:

        -g^2 (delta^2 + 2 Delta delta + W^2) / (2 W (Delta^2 - W^2))
    """
    W = qubit.dressed_splitting
    _check_poles(Delta, W, j)
    d = qubit.delta
    return -qubit.g ** 2 * (d * d + 2.0 * Delta * d + W * W) / (2.0 * W * (Delta * Delta - W * W))


def resonant_shift(qubit: DrivenQubitParams, Delta: float, j: int = 1) -> float:
    """chi = -g^2 Omega / (Delta^2 - 4 Omega^2), the delta = 0 form."""
    _check_poles(Delta, 2.0 * qubit.rabi, j)
    return -qubit.g ** 2 * qubit.rabi / (Delta * Delta - 4.0 * qubit.rabi ** 2)


def lambda_from_integrals(qubit: DrivenQubitParams, Delta: float, tau: float) -> Tuple[float, float]:
    """
    Assembles the sigma^z a^dagger a and sigma^z coefficients term by term
    from the double integrals h(mu, mu).

    Returns:
        (coefficient of sigma^z a^dagger a, coefficient of sigma^z); these
        should equal (Lambda, Lambda/2).
    """
    W = qubit.dressed_splitting
    _check_poles(Delta, W)
    half = 0.5 * qubit.theta
    s4 = math.sin(half) ** 4
    c4 = math.cos(half) ** 4
    g2 = qubit.g ** 2

    # number-dependent part plus its Hermitian conjugate
    number_part = g2 * (s4 * h_integral(-Delta - W, -Delta - W, tau)
                        - c4 * h_integral(-Delta + W, -Delta + W, tau))
    constant_part = -0.5 * g2 * (s4 * h_integral(Delta + W, Delta + W, tau)
                                 - c4 * h_integral(Delta - W, Delta - W, tau))
    return 2.0 * number_part.real, 2.0 * constant_part.real


def dispersive_shifts(sys: SystemParams) -> ShiftCoefficients:
    """
    Drive-induced dispersive shifts for both qubits.
    """
    chi1, chi2 = (lambda_coefficient(sys.qubits[j - 1], sys.cavity_detuning(j), j) for j in (1, 2))
    shifts = ShiftCoefficients(chi1, chi2)
    logger.debug(f"Dispersive shifts: {shifts.to_mhz()}")
    return shifts


def one_qubit_term_classes(Delta: float, W: float) -> FrozenSet[str]:
    """
    Which one-qubit second-order term families survive for a given
    (Delta, W). Works in any units, including grid integers.
    """
    def same(a, b):
        return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)

    terms = {'σᶻa†a', 'σᶻ'}
    if same(W, 2.0 * Delta):
        terms |= {'σ⁺a²', 'σ⁻a†²'}
    if same(W, -2.0 * Delta):
        terms |= {'σ⁺a†²', 'σ⁻a²'}
    if same(Delta, 0.0):
        terms |= {'σᶻa²', 'σᶻa†²'}
    if same(W, 0.0):
        terms |= {'σ⁺a†a', 'σ⁻a†a', 'σ⁺', 'σ⁻'}
    return frozenset(terms)


def shift_operator(shifts: ShiftCoefficients, n: int) -> OperatorMatrix:
    """Lambda_n = (n + 1/2)(chi1 sigma_1^z + chi2 sigma_2^z) on the two-qubit space."""
    if n < 0:
        raise ValidationError(f"Photon number must be non-negative, got {n}", relation='n >= 0')
    data = (n + 0.5) * (shifts.chi1 * pauli('z', 1).data + shifts.chi2 * pauli('z', 2).data)
    return OperatorMatrix(data, BasisDescriptor(TWO_QUBIT))


def build_effective_hamiltonian(sys: SystemParams, cond: ResonanceCondition, n: int = 0) -> OperatorMatrix:
    """
    H_eff in the n-photon subspace: V_qq + Lambda_n.
    """
    vqq, _ = build_vqq(sys, cond)
    h_eff = vqq + shift_operator(dispersive_shifts(sys), n)
    error = h_eff.hermitian_error()
    if error > HERMITIAN_TOL:
        raise ValidationError(f"Effective Hamiltonian is not Hermitian ({error:.3e})", relation='H = H^dagger')
    return h_eff


def u_iswap() -> OperatorMatrix:
    data = np.eye(4, dtype=complex)
    data[1:3, 1:3] = [[0, 1j], [1j, 0]]
    return OperatorMatrix(data, BasisDescriptor(TWO_QUBIT))


def u_double_excitation() -> OperatorMatrix:
    data = np.eye(4, dtype=complex)
    data[0, 0] = data[3, 3] = 0
    data[0, 3] = data[3, 0] = 1j
    return OperatorMatrix(data, BasisDescriptor(TWO_QUBIT))


def u_controlled_phase(phi: float) -> OperatorMatrix:
    return OperatorMatrix(np.diag([1, 1, 1, np.exp(1j * phi)]), BasisDescriptor(TWO_QUBIT))


def controlled_phase_sequence(J: float, tau_m: float) -> OperatorMatrix:
    """
    exp(2iJt) exp(-2iJt sigma_1^z) exp(-2iJt sigma_2^z) U_m with
    U_m = exp(-i V_qq t) for V_qq = -2J sigma_1^z sigma_2^z. The result is
    diag(1, 1, 1, exp(8iJt)).
    """
    u_m = expm(vqq_table_form(ResonanceCondition.RC1, J), tau_m)
    z1 = expm(pauli('z', 1), 2.0 * J * tau_m)
    z2 = expm(pauli('z', 2), 2.0 * J * tau_m)
    return (z1 @ z2 @ u_m) * np.exp(2j * J * tau_m)


def ideal_gate(cond: ResonanceCondition, tau_m: float, J: float) -> OperatorMatrix:
    """
    The gate V_qq generates in time tau_m for resonant driving.

    Condition 1 returns the dressed controlled-phase U_phi with phi = 8 J tau_m.
    Every other condition returns exp(-i V_qq tau_m), which is U_iSW for
    conditions 6/7 at J tau_m = pi/2 and U_iDE for 8/9 at J tau_m = -pi/2.
    """
    cond = ResonanceCondition.parse(cond)
    if cond.gate == GateKind.CONTROLLED_PHASE:
        return controlled_phase_sequence(J, tau_m)
    return expm(vqq_table_form(cond, J), tau_m)


@dataclass(frozen=True)
class ConstraintResidual:
    name: str
    expected: float
    actual: float
    tolerance: float = CONSTRAINT_TOL

    @property
    def residual(self) -> float:
        """Relative deviation, or absolute when nothing is expected."""
        if self.expected == 0:
            return abs(self.actual)
        return abs(self.actual - self.expected) / abs(self.expected)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'expected': self.expected,
            'actual': self.actual,
            'residual': self.residual,
            'passed': self.passed,
        }


@dataclass
class ConstraintReport:
    condition: ResonanceCondition
    holds: bool
    violations: List[str]
    gate_phase: float = 0.0
    residuals: List[ConstraintResidual] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.holds and not self.violations and all(r.passed for r in self.residuals)

    def to_dict(self) -> Dict:
        return {
            'condition': self.condition.label,
            'holds': self.holds,
            'violations': self.violations,
            'gate_phase': self.gate_phase,
            'residuals': [r.to_dict() for r in self.residuals],
            'passed': self.passed,
        }


def _ratio_target(cond: ResonanceCondition, w: int, q: Tuple[int, int]) -> float:
    q1, q2 = q
    if cond == ResonanceCondition.RC7:
        return (2.0 + w / q2) / (2.0 + w / q1)
    return (2.0 - w / q2) / (2.0 + w / q1)


def _product_target(cond: ResonanceCondition, w: int, m: int, eta: float) -> float:
    sign = 1.0 if cond == ResonanceCondition.RC7 else -1.0
    return sign * w / m * eta * eta


def check_constraints(sys: SystemParams, cond: ResonanceCondition) -> ConstraintReport:
    """
    Residuals of the conditions that make the gate clean.

    Conditions 7 and 9: the gate-time product g1 g2 = +-(w/m) eta^2, the
    shift-cancellation ratio for g2^2/g1^2, and J tau_m against +-pi/2.
    Condition 1: how far chi_j tau_m / 2pi sits from an integer.
    Every condition: whether the resonance holds and its W-constraints.
    """
    cond = ResonanceCondition.parse(cond)
    report = ConstraintReport(
        condition=cond,
        holds=cond.holds(sys),
        violations=cond.violated_constraints(sys),
    )
    if not report.holds:
        return report

    w = cond.resonant_index(sys)
    if w != 0:
        J = coupling_strength(sys, cond)
        report.gate_phase = J * sys.tau_m

    g1, g2 = sys.qubits[0].g, sys.qubits[1].g
    if cond in (ResonanceCondition.RC7, ResonanceCondition.RC9) and w != 0 and sys.m > 0:
        sign = 1.0 if cond == ResonanceCondition.RC7 else -1.0
        report.residuals.append(ConstraintResidual(
            'g1 g2 = ±(w/m) eta^2', _product_target(cond, w, sys.m, sys.eta), g1 * g2,
        ))
        if g1 > 0:
            report.residuals.append(ConstraintResidual(
                'g2^2/g1^2 shift cancellation', _ratio_target(cond, w, sys.q), (g2 / g1) ** 2,
            ))
        report.residuals.append(ConstraintResidual(
            'J tau_m = ±pi/2', sign * math.pi / 2, report.gate_phase,
        ))
    elif cond == ResonanceCondition.RC1:
        shifts = dispersive_shifts(sys)
        for j, chi in ((1, shifts.chi1), (2, shifts.chi2)):
            cycles = chi * sys.tau_m / TWO_PI
            report.residuals.append(ConstraintResidual(
                f'chi_{j} tau_m / 2pi integer', float(round(cycles)), cycles,
            ))
    logger.info(f"Constraint check for {cond.label}: passed={report.passed}")
    return report


def exact_couplings(sys: SystemParams, cond: ResonanceCondition) -> Tuple[float, float]:
    """
    Solves g1, g2 from the product and the ratio constraints together:
    g1 = sqrt(P / sqrt(R)), g2 = g1 sqrt(R).
    """
    cond = ResonanceCondition.parse(cond)
    if cond not in (ResonanceCondition.RC7, ResonanceCondition.RC9):
        raise UnsupportedError(
            f"Exact couplings are only defined for rc7 and rc9, not {cond.label}",
            relation='condition in {7, 9}',
        )
    if not cond.holds(sys):
        raise ValidationError(
            f"Resonance condition {cond.number} does not hold", relation=cond.value.resonance_text,
        )
    if sys.m <= 0:
        raise ValidationError("Gate periods must be positive", relation='m > 0')
    w = cond.resonant_index(sys)
    product = _product_target(cond, w, sys.m, sys.eta)
    ratio = _ratio_target(cond, w, sys.q)
    if product <= 0 or ratio <= 0:
        raise ValidationError(
            f"No real couplings: product {product:.3e}, ratio {ratio:.3e}",
            relation='g1 g2 > 0, g2^2/g1^2 > 0',
        )
    g1 = math.sqrt(product / math.sqrt(ratio))
    return g1, g1 * math.sqrt(ratio)


def exactify(sys: SystemParams, cond: ResonanceCondition) -> SystemParams:
    g1, g2 = exact_couplings(sys, cond)
    logger.info(f"Exact couplings: g1/2pi = {g1 / TWO_PI:.6g} GHz, g2/2pi = {g2 / TWO_PI:.6g} GHz")
    return sys.with_couplings(g1, g2)


def _block_propagator(h: np.ndarray, tau: float) -> np.ndarray:
    """
    exp(-i h tau) for a 2x2 Hermitian h = a I + b Sigma_z + Re(c) Sigma_x - Im(c) Sigma_y.
    """
    a = 0.5 * (h[0, 0] + h[1, 1]).real
    b = 0.5 * (h[0, 0] - h[1, 1]).real
    c = h[0, 1]
    omega = math.sqrt(b * b + abs(c) ** 2)
    cos = math.cos(omega * tau)
    sinc = math.sin(omega * tau) / omega if omega > 0 else tau
    u = np.array([
        [cos - 1j * b * sinc, -1j * c * sinc],
        [-1j * np.conj(c) * sinc, cos + 1j * b * sinc],
    ])
    return np.exp(-1j * a * tau) * u


def _blocks_for(cond: ResonanceCondition):
    if cond not in _BLOCKS:
        raise UnsupportedError(
            f"Closed-form F_s is only available for rc1, rc4, rc7 and rc9, not {cond.label}",
            relation='condition in {1, 4, 7, 9}',
        )
    return _BLOCKS[cond]


def fs_analytic(sys: SystemParams, cond: ResonanceCondition, initial_state: str = 'eg',
                n: int = 0, tau_m: float = None) -> float:
    """
    F_s = |<psi| U_m^dagger U'_m |psi>|^2 with U_m = exp(-i V_qq tau_m) and
    U'_m = exp(-i (V_qq + Lambda_n) tau_m), evaluated block by block.

    V_qq and Lambda_n are both block diagonal on two 2-state subspaces for
    the supported conditions, so each block is a closed-form 2x2 rotation.
    """
    cond = ResonanceCondition.parse(cond)
    blocks = _blocks_for(cond)
    tau_m = sys.tau_m if tau_m is None else tau_m
    k = parse_two_qubit_label(initial_state)

    vqq, _ = build_vqq(sys, cond)
    h_eff = vqq + shift_operator(dispersive_shifts(sys), n)
    for pair in blocks:
        rows = [parse_two_qubit_label(label) for label in pair]
        if k not in rows:
            continue
        index = np.ix_(rows, rows)
        u_ideal = _block_propagator(vqq.data[index], tau_m)
        u_shifted = _block_propagator(h_eff.data[index], tau_m)
        position = rows.index(k)
        overlap = (u_ideal.conj().T @ u_shifted)[position, position]
        return float(abs(overlap) ** 2)
    raise ValidationError(f"State '{initial_state}' is not in any block")


def fs_gate_time(sys: SystemParams, cond: ResonanceCondition, n: int = 0) -> float:
    """
    Compact F_s at the gate time (|J| tau_m = pi/2):

        4 J^2 / Om^2 sin^2(Om tau_m / 2)

    with Om^2 = ((2n+1) s)^2 + 4 J^2 and s = chi1 - chi2 (rc7), chi1 + chi2
    (rc9) or chi1 (rc4). Written for the initial states in GATE_TIME_STATES.
    """
    cond = ResonanceCondition.parse(cond)
    if cond not in GATE_TIME_STATES:
        raise UnsupportedError(
            f"No gate-time F_s formula for {cond.label}", relation='condition in {4, 7, 9}',
        )
    _require_resonant_drive(sys)
    shifts = dispersive_shifts(sys)
    J = coupling_strength(sys, cond)
    if cond == ResonanceCondition.RC7:
        split = shifts.chi1 - shifts.chi2
    elif cond == ResonanceCondition.RC9:
        split = shifts.chi1 + shifts.chi2
    else:
        split = shifts.chi1
    omega = math.hypot((2 * n + 1) * split, 2.0 * J)
    return 4.0 * J * J / (omega * omega) * math.sin(0.5 * omega * sys.tau_m) ** 2


def _require_resonant_drive(sys: SystemParams):
    for j, qubit in enumerate(sys.qubits, start=1):
        if abs(qubit.delta) > 1e-12 * max(qubit.dressed_splitting, 1.0):
            raise UnsupportedError(
                f"Gate-time formulas assume resonant driving (delta_{j} = 0)", relation='delta_j = 0',
            )


def shift_free_detuning(Delta: float, W: float) -> Tuple[float, ...]:
    """
    Real roots of delta^2 + 2 Delta delta + W^2 = 0, where the dispersive
    shift vanishes. Empty when Delta^2 < W^2; a single value at the double root.
    """
    discriminant = Delta * Delta - W * W
    if discriminant < 0:
        return ()
    if discriminant == 0:
        return (-Delta,)
    root = math.sqrt(discriminant)
    return tuple(sorted((-Delta - root, -Delta + root)))


def shift_free_drive(Delta: float, W: float) -> List[Tuple[float, float]]:
    """
    (delta, Omega) pairs that keep the dressed splitting W and cancel the
    dispersive shift. Only roots with |delta| <= W give a real Omega.
    """
    pairs = []
    for delta in shift_free_detuning(Delta, W):
        if abs(delta) <= W:
            pairs.append((delta, 0.5 * math.sqrt(W * W - delta * delta)))
    return pairs
