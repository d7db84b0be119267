"""
Qubit Mappings

This file turns device parameters into the canonical driven-qubit
parameters (omega, g, Omega) the rest of the package works with. Two
devices are covered: a double quantum dot spin qubit (one electron, with a
transverse field gradient) and a triple-dot resonant exchange (RX) qubit.

Inputs are energies as frequency/2pi in GHz. The DrivenQubitParams that come
out are angular like everywhere else. Only the sweet spot eps_0 = 0 is
supported.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
import logging
import math

import numpy as np
from scipy import linalg

from .exceptions import UnsupportedError, ValidationError
from .models import DrivenQubitParams, ParameterValidator

logger = logging.getLogger(__name__)

# Warning thresholds for the two-level reductions
DQD_RATIO_WARN = 0.1
DQD_SMALL_WARN = 0.1
RX_XI_WARN = 0.3

# Product basis of one DQD after the charge rotation: charge (+, -) x spin (up, down)
DQD_BASIS = ('+up', '+down', '-up', '-down')

SPIN_MODE = 'spin'
CHARGE_MODE = 'charge'


@dataclass(frozen=True)
class DqdParams:
    tunnel_2t: float
    bz: float
    bx: float
    g_charge: float
    drive_amp_F: float
    drive_freq: float
    drive_phase: float = 0.0
    eps0: float = 0.0

    def validate(self) -> List[str]:
        errors = []
        for name in ('tunnel_2t', 'bz', 'bx', 'g_charge', 'drive_amp_F', 'drive_freq', 'drive_phase', 'eps0'):
            if not ParameterValidator.is_finite(getattr(self, name)):
                errors.append(f"{name} must be a finite number")
        if errors:
            return errors
        if self.tunnel_2t <= 0:
            errors.append("Tunnel coupling must be positive [2t > 0]")
        if self.bx < 0:
            errors.append("Transverse gradient must be non-negative [B^x >= 0]")
        if self.g_charge < 0:
            errors.append("Charge-cavity coupling must be non-negative [g_c >= 0]")
        if self.drive_amp_F < 0:
            errors.append("Drive amplitude must be non-negative [F >= 0]")
        return errors


@dataclass(frozen=True)
class DqdSpectrum:
    """
    Eigen-decomposition of the rotated DQD Hamiltonian H'_d (GHz).

    Eigenvectors are columns in DQD_BASIS order for states |0>..|3>.
    """
    omegas: Tuple[float, float, float, float]
    W_cal: float
    V_cal: float
    phi_a: float
    phi_b: float
    dipoles: Dict[str, float]
    eigenvectors: np.ndarray = field(repr=False)
    numeric_eigenvalues: Tuple[float, ...] = ()

    @property
    def phi(self) -> float:
        return self.phi_b

    def approximate_dipoles(self) -> Dict[str, float]:
        """The Phi_a -> 0 forms: d01 = -d23 = sin(Phi/2), d02 = d13 = cos(Phi/2)."""
        s = math.sin(0.5 * self.phi_b)
        c = math.cos(0.5 * self.phi_b)
        return {'d01': s, 'd02': c, 'd13': c, 'd23': -s}

    def to_dict(self) -> Dict:
        return {
            'omega0_ghz': self.omegas[0],
            'omega1_ghz': self.omegas[1],
            'omega2_ghz': self.omegas[2],
            'omega3_ghz': self.omegas[3],
            'W_cal_ghz': self.W_cal,
            'V_cal_ghz': self.V_cal,
            'phi_a': self.phi_a,
            'phi_b': self.phi_b,
            'dipoles': dict(self.dipoles),
        }


def dqd_hamiltonian(p: DqdParams) -> np.ndarray:
    """
    H'_d = (2t tau^z + B^z s^z - B^x tau^x s^x) / 2 in DQD_BASIS.
    """
    tau_z = np.diag([1.0, -1.0])
    tau_x = np.array([[0.0, 1.0], [1.0, 0.0]])
    s_z = np.diag([1.0, -1.0])
    s_x = tau_x
    return 0.5 * (p.tunnel_2t * np.kron(tau_z, np.eye(2))
                  + p.bz * np.kron(np.eye(2), s_z)
                  - p.bx * np.kron(tau_x, s_x))


def _charge_dipole() -> np.ndarray:
    return np.kron(np.array([[0.0, 1.0], [1.0, 0.0]]), np.eye(2))


def dqd_spectrum(p: DqdParams) -> DqdSpectrum:
    """
    Analytic spectrum, eigenvectors and charge dipole elements of H'_d,
    plus the brute-force eigenvalues for cross-checking.
    """
    errors = p.validate()
    if errors:
        raise ValidationError(errors[0], relation=errors[0][errors[0].rfind('[') + 1:-1] if '[' in errors[0] else None)
    if p.eps0 != 0:
        raise UnsupportedError("Only the sweet spot eps_0 = 0 is supported", relation='eps_0 = 0')

    W_cal = math.hypot(p.tunnel_2t + p.bz, p.bx)
    V_cal = math.hypot(p.tunnel_2t - p.bz, p.bx)
    if V_cal == 0:
        raise ValidationError("Degenerate spectrum: V = 0 (2t = B^z and B^x = 0)", relation='V != 0')

    phi_a = math.atan2(p.bx, p.tunnel_2t + p.bz)
    phi_b = math.atan2(p.bx, p.tunnel_2t - p.bz)
    a, b = 0.5 * phi_a, 0.5 * phi_b

    index = {label: k for k, label in enumerate(DQD_BASIS)}
    vectors = np.zeros((4, 4))
    # |0> and |3> live on {+up, -down}; |1> and |2> on {+down, -up}
    vectors[index['+up'], 0], vectors[index['-down'], 0] = math.sin(a), math.cos(a)
    vectors[index['+down'], 1], vectors[index['-up'], 1] = math.sin(b), math.cos(b)
    vectors[index['+down'], 2], vectors[index['-up'], 2] = math.cos(b), -math.sin(b)
    vectors[index['+up'], 3], vectors[index['-down'], 3] = math.cos(a), -math.sin(a)

    dipoles = {
        'd01': math.sin(a + b),
        'd02': math.cos(a + b),
        'd13': math.cos(a + b),
        'd23': -math.sin(a + b),
    }
    numeric = tuple(float(x) for x in linalg.eigvalsh(dqd_hamiltonian(p)))

    return DqdSpectrum(
        omegas=(-0.5 * W_cal, -0.5 * V_cal, 0.5 * V_cal, 0.5 * W_cal),
        W_cal=W_cal,
        V_cal=V_cal,
        phi_a=phi_a,
        phi_b=phi_b,
        dipoles=dipoles,
        eigenvectors=vectors,
        numeric_eigenvalues=numeric,
    )


def dipole_matrix(spectrum: DqdSpectrum) -> np.ndarray:
    """<k|tau^x|l> in the eigenbasis, computed from the eigenvectors."""
    v = spectrum.eigenvectors
    return v.T @ _charge_dipole() @ v


def dqd_validity(p: DqdParams, spectrum: DqdSpectrum) -> List[str]:
    """Warnings for the spin-qubit two-level reduction."""
    messages = []
    if p.tunnel_2t <= p.bz:
        messages.append(f"2t = {p.tunnel_2t} GHz does not exceed B^z = {p.bz} GHz [2t > B^z]")
    ratio = (spectrum.W_cal - spectrum.V_cal) / (2.0 * spectrum.V_cal)
    if ratio > DQD_RATIO_WARN:
        messages.append(f"(W - V)/2V = {ratio:.3f} exceeds {DQD_RATIO_WARN} [(W - V)/2V << 1]")
    if p.drive_amp_F / spectrum.V_cal > DQD_SMALL_WARN:
        messages.append(f"F/V = {p.drive_amp_F / spectrum.V_cal:.3f} exceeds {DQD_SMALL_WARN} [F/V << 1]")
    if p.g_charge / spectrum.V_cal > DQD_SMALL_WARN:
        messages.append(f"g_c/V = {p.g_charge / spectrum.V_cal:.3f} exceeds {DQD_SMALL_WARN} [g_c/V << 1]")
    if math.sin(0.5 * spectrum.phi_b) < 0:
        messages.append("sin(Phi/2) < 0: drive phase shifted by pi and cavity phase redefined")
    return messages


def map_dqd(p: DqdParams, mode: str = SPIN_MODE) -> DrivenQubitParams:
    """
    Canonical parameters for a DQD.

    spin mode: omega = (W - V)/2, Omega = (F/2)|sin(Phi/2)|, g = g_c |sin(Phi/2)|.
    charge mode (B^z = B^x = 0): omega = 2t, Omega = F/2, g = g_c.
    """
    if mode == CHARGE_MODE:
        errors = p.validate()
        if errors:
            raise ValidationError(errors[0])
        if p.eps0 != 0:
            raise UnsupportedError("Only the sweet spot eps_0 = 0 is supported", relation='eps_0 = 0')
        if p.bz != 0 or p.bx != 0:
            raise ValidationError("Charge-qubit mapping needs B^z = B^x = 0", relation='B^z = B^x = 0')
        return DrivenQubitParams.from_ghz(p.tunnel_2t, p.drive_freq, p.g_charge, 0.5 * p.drive_amp_F, p.drive_phase)
    if mode != SPIN_MODE:
        raise ValidationError(f"Unknown DQD mapping mode '{mode}'", relation="mode in {spin, charge}")

    spectrum = dqd_spectrum(p)
    for message in dqd_validity(p, spectrum):
        logger.warning(message)

    half = math.sin(0.5 * spectrum.phi_b)
    phase = p.drive_phase + (math.pi if half < 0 else 0.0)
    omega = 0.5 * (spectrum.W_cal - spectrum.V_cal)
    return DrivenQubitParams.from_ghz(omega, p.drive_freq, p.g_charge * abs(half), 0.5 * p.drive_amp_F * abs(half), phase)


@dataclass(frozen=True)
class RxParams:
    tunnel_t: float
    delta_hubbard: float
    g_charge: float
    exchange_jl: Optional[float] = None
    exchange_jr: Optional[float] = None
    drive_freq: Optional[float] = None
    rabi: float = 0.0
    drive_phase: float = 0.0

    @property
    def xi(self) -> float:
        if self.delta_hubbard == 0:
            raise ValidationError("Hubbard gap must be non-zero", relation='Delta_hubbard != 0')
        return self.tunnel_t / self.delta_hubbard

    def validate(self) -> List[str]:
        errors = []
        if self.delta_hubbard == 0:
            return ["Hubbard gap must be non-zero [Delta_hubbard != 0]"]
        if not 0 <= self.xi < 1:
            errors.append(f"Charge admixture xi = {self.xi:.3f} outside [0, 1) [0 <= xi < 1]")
        if self.g_charge < 0:
            errors.append("Charge-cavity coupling must be non-negative [g_c >= 0]")
        if (self.exchange_jl is None) != (self.exchange_jr is None):
            errors.append("Give both exchange_jl and exchange_jr or neither [J_l, J_r]")
        return errors

    def warnings(self) -> List[str]:
        if self.xi > RX_XI_WARN:
            return [f"xi = {self.xi:.3f} exceeds {RX_XI_WARN} [perturbative admixture]"]
        return []


def rx_frequency(jl: float, jr: float) -> float:
    """omega = sqrt(J^2 + 3 j^2) with J = (J_l + J_r)/2, j = (J_l - J_r)/2."""
    J = 0.5 * (jl + jr)
    j = 0.5 * (jl - jr)
    return math.sqrt(J * J + 3.0 * j * j)


def exchange_pair(t: float, delta_hubbard: float, eps: float = 0.0) -> Tuple[float, float]:
    """J_l = t^2/(Delta + eps), J_r = t^2/(Delta - eps)."""
    return t * t / (delta_hubbard + eps), t * t / (delta_hubbard - eps)


def rx_coupling(p: RxParams) -> float:
    """g = (sqrt(3)/2) xi^2 g_c at eps_0 = 0 (GHz)."""
    return 0.5 * math.sqrt(3.0) * p.xi ** 2 * p.g_charge


def geff_derivative_form(p: RxParams, step: Optional[float] = None) -> float:
    """
    (g_c/2) sqrt((dJ/deps)^2 + 3 (dj/deps)^2) at eps = 0 by central
    differences of J_l and J_r (GHz).
    """
    h = step if step is not None else 1e-5 * abs(p.delta_hubbard)
    jl_plus, jr_plus = exchange_pair(p.tunnel_t, p.delta_hubbard, h)
    jl_minus, jr_minus = exchange_pair(p.tunnel_t, p.delta_hubbard, -h)
    dJ = 0.5 * ((jl_plus + jr_plus) - (jl_minus + jr_minus)) / (2.0 * h)
    dj = 0.5 * ((jl_plus - jr_plus) - (jl_minus - jr_minus)) / (2.0 * h)
    return 0.5 * p.g_charge * math.sqrt(dJ * dJ + 3.0 * dj * dj)


def map_rx(p: RxParams) -> DrivenQubitParams:
    """
    Canonical parameters for an RX qubit at eps_0 = 0.

    The frequency comes from J_l, J_r when given, otherwise from the
    symmetric point J_l = J_r = t^2/Delta. Without a drive frequency the
    qubit is taken as resonantly driven.
    """
    errors = p.validate()
    if errors:
        message = errors[0]
        raise ValidationError(message, relation=message[message.rfind('[') + 1:-1] if '[' in message else None)
    for message in p.warnings():
        logger.warning(message)

    if p.exchange_jl is not None:
        omega = rx_frequency(p.exchange_jl, p.exchange_jr)
    else:
        omega = rx_frequency(*exchange_pair(p.tunnel_t, p.delta_hubbard))
    drive = p.drive_freq if p.drive_freq is not None else omega
    return DrivenQubitParams.from_ghz(omega, drive, rx_coupling(p), p.rabi, p.drive_phase)
