"""
Parameter Models and Validation

This file holds the parameter records every other module passes around:
one driven qubit, the two-qubit-plus-cavity system on its integer grid, and
the decay rates. Frequencies are stored as angular frequencies in rad/ns;
the GHz (omega/2pi) values people type in are converted at the boundary by
the from_ghz helpers.

Validation follows the same idea as a form validator: validate() returns a
list of problems, warnings() returns the soft ones, and require_valid()
raises with the first failing relation.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple
import logging
import math

from .exceptions import ValidationError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# Relative/absolute tolerances
GRID_TOL = 1e-9
COUPLING_WARN_RATIO = 0.1
RWA_WARN_RATIO = 0.1


def ghz(value: float) -> float:
    """GHz (as omega/2pi) to rad/ns."""
    return TWO_PI * value


def to_ghz(value: float) -> float:
    """rad/ns to GHz (as omega/2pi)."""
    return value / TWO_PI


def to_mhz(value: float) -> float:
    return 1e3 * value / TWO_PI


def khz_to_rate(value: float, convention: str = 'linear') -> float:
    """
    Decay rate in kHz to 1/ns.

    'linear' reads the number as a plain rate, 'angular' as rate/2pi.
    """
    if convention == 'linear':
        return value * 1e-6
    if convention == 'angular':
        return TWO_PI * value * 1e-6
    raise ValidationError(f"Unknown rate convention '{convention}'", relation='rate convention')


class ParameterValidator:
    """
    Small checks shared by the parameter records.
    """

    @staticmethod
    def is_finite(value: float) -> bool:
        return isinstance(value, (int, float)) and math.isfinite(value)

    @staticmethod
    def on_grid(value: float, eta: float, tol: float = GRID_TOL) -> bool:
        """
        True when value is an integer multiple of eta (tolerance in grid units).
        """
        ratio = value / eta
        return abs(ratio - round(ratio)) <= tol

    @staticmethod
    def grid_index(value: float, eta: float) -> int:
        return int(round(value / eta))


@dataclass(frozen=True)
class DrivenQubitParams:
    """
    One parametrically driven qubit coupled to the cavity.

    omega: qubit frequency, omega_d: drive frequency, g: qubit-photon
    coupling, rabi: half the drive amplitude (Omega), phase: drive phase.
    All frequencies in rad/ns.
    """
    omega: float
    omega_d: float
    g: float
    rabi: float
    phase: float = 0.0

    @classmethod
    def from_ghz(cls, omega: float, omega_d: float, g: float, rabi: float, phase: float = 0.0):
        return cls(ghz(omega), ghz(omega_d), ghz(g), ghz(rabi), phase)

    @property
    def delta(self) -> float:
        """Qubit-drive detuning delta = omega - omega_d."""
        return self.omega - self.omega_d

    @property
    def dressed_splitting(self) -> float:
        """W = sqrt(delta^2 + 4 Omega^2)."""
        return math.hypot(self.delta, 2.0 * self.rabi)

    @property
    def theta(self) -> float:
        """Mixing angle with tan(theta) = 2 Omega / delta, in (0, pi)."""
        return math.atan2(2.0 * self.rabi, self.delta)

    def with_coupling(self, g: float) -> 'DrivenQubitParams':
        return replace(self, g=g)

    def validate(self) -> List[str]:
        errors = []
        for name in ('omega', 'omega_d', 'g', 'rabi', 'phase'):
            if not ParameterValidator.is_finite(getattr(self, name)):
                errors.append(f"{name} must be a finite number")
        if errors:
            return errors

        if self.rabi < 0:
            errors.append("Drive amplitude Omega must be non-negative [Omega >= 0]")
        if self.g < 0:
            errors.append("Coupling g must be non-negative [g >= 0]")
        if self.dressed_splitting <= 0:
            errors.append("Dressed splitting must be positive [W > 0]")
        return errors

    def warnings(self) -> List[str]:
        messages = []
        W = self.dressed_splitting
        if W > 0 and self.g / W > COUPLING_WARN_RATIO:
            messages.append(
                f"g/W = {self.g / W:.3f} exceeds {COUPLING_WARN_RATIO} [g << 2 Omega]"
            )
        return messages

    def to_ghz_dict(self) -> Dict[str, float]:
        return {
            'omega_ghz': to_ghz(self.omega),
            'drive_ghz': to_ghz(self.omega_d),
            'g_ghz': to_ghz(self.g),
            'rabi_ghz': to_ghz(self.rabi),
            'phase': self.phase,
            'delta_ghz': to_ghz(self.delta),
            'W_ghz': to_ghz(self.dressed_splitting),
            'theta': self.theta,
        }


@dataclass(frozen=True)
class SystemParams:
    """
    Two driven qubits, the cavity, and the integer grid.

    Delta_j = p_j * eta and W_j = q_j * eta must hold; the gate takes
    tau_m = m * tau with tau = 2 pi / eta. w is the resonant detuning in
    grid units once a resonance condition has been picked.
    """
    qubits: Tuple[DrivenQubitParams, DrivenQubitParams]
    omega_c: float
    eta: float
    p: Tuple[int, int]
    q: Tuple[int, int]
    m: int
    w: Optional[int] = None
    n_max: int = 2

    @classmethod
    def build(cls, qubits, omega_c: float, eta: float, m: int, n_max: int = 2,
              p: Optional[Tuple[int, int]] = None, q: Optional[Tuple[int, int]] = None,
              w: Optional[int] = None) -> 'SystemParams':
        """
        Derives missing grid integers from the frequencies. The result is not
        validated; call require_valid() on it.
        """
        if eta <= 0:
            raise ValidationError("Base frequency eta must be positive", relation='eta > 0')
        if p is None:
            p = tuple(ParameterValidator.grid_index(omega_c - qb.omega_d, eta) for qb in qubits)
        if q is None:
            q = tuple(ParameterValidator.grid_index(qb.dressed_splitting, eta) for qb in qubits)
        return cls(tuple(qubits), omega_c, eta, tuple(p), tuple(q), m, w, n_max)

    @classmethod
    def from_grid(cls, p: Tuple[int, int], q: Tuple[int, int], eta_ghz: float, omega_c_ghz: float,
                  g_ghz: Tuple[float, float], m: int, n_max: int = 2,
                  delta_ghz: Tuple[float, float] = (0.0, 0.0), w: Optional[int] = None) -> 'SystemParams':
        """
        Builds the system straight from grid integers: omega_d = omega_c - p eta,
        omega = omega_d + delta and Omega = sqrt((q eta)^2 - delta^2) / 2.
        """
        qubits = []
        for j in range(2):
            W = q[j] * eta_ghz
            if abs(delta_ghz[j]) > W:
                raise ValidationError(
                    f"|delta_{j + 1}| exceeds W_{j + 1}; no real drive amplitude",
                    relation='|delta_j| <= W_j',
                )
            drive = omega_c_ghz - p[j] * eta_ghz
            rabi = 0.5 * math.sqrt(max(W * W - delta_ghz[j] ** 2, 0.0))
            qubits.append(DrivenQubitParams.from_ghz(drive + delta_ghz[j], drive, g_ghz[j], rabi))
        return cls(tuple(qubits), ghz(omega_c_ghz), ghz(eta_ghz), tuple(p), tuple(q), m, w, n_max)

    @property
    def tau(self) -> float:
        """Magnus period tau = 2 pi / eta (ns)."""
        return TWO_PI / self.eta

    @property
    def tau_m(self) -> float:
        """Gate time m * tau (ns)."""
        return self.m * self.tau

    def cavity_detuning(self, j: int) -> float:
        """Delta_j = omega_c - omega_d_j for j in (1, 2)."""
        return self.omega_c - self.qubits[j - 1].omega_d

    def dressed(self, j: int) -> float:
        return self.qubits[j - 1].dressed_splitting

    def sideband(self, j: int, s: int) -> float:
        """Delta_j + s W_j for s in (-1, 0, +1)."""
        return self.cavity_detuning(j) + s * self.dressed(j)

    def with_couplings(self, g1: float, g2: float) -> 'SystemParams':
        qubits = (self.qubits[0].with_coupling(g1), self.qubits[1].with_coupling(g2))
        return replace(self, qubits=qubits)

    def with_n_max(self, n_max: int) -> 'SystemParams':
        return replace(self, n_max=n_max)

    def validate(self) -> List[str]:
        errors = []
        for j, qb in enumerate(self.qubits, start=1):
            errors.extend(f"qubit {j}: {message}" for message in qb.validate())
        if errors:
            return errors

        if self.eta <= 0:
            errors.append("Base frequency must be positive [eta > 0]")
            return errors
        if self.m < 0:
            errors.append("Gate periods must be non-negative [m >= 0]")
        if self.n_max < 0:
            errors.append("Fock truncation must be non-negative [n_max >= 0]")

        # Check that the first-order Magnus term can vanish
        for j in (1, 2):
            Delta = self.cavity_detuning(j)
            W = self.dressed(j)
            if not ParameterValidator.on_grid(Delta, self.eta) or \
                    ParameterValidator.grid_index(Delta, self.eta) != self.p[j - 1]:
                errors.append(
                    f"Delta_{j}/eta = {Delta / self.eta:.12g} is not the integer p_{j} = {self.p[j - 1]} "
                    f"[Delta_j = p_j eta]"
                )
            if not ParameterValidator.on_grid(W, self.eta) or \
                    ParameterValidator.grid_index(W, self.eta) != self.q[j - 1]:
                errors.append(
                    f"W_{j}/eta = {W / self.eta:.12g} is not the integer q_{j} = {self.q[j - 1]} "
                    f"[W_j = q_j eta]"
                )
        return errors

    def well_definedness_errors(self) -> List[str]:
        """
        Poles of the second-order one-qubit terms. The effective theory is
        undefined on any of these.
        """
        errors = []
        for j in (1, 2):
            p, q = self.p[j - 1], self.q[j - 1]
            if p == 0:
                errors.append(f"Delta_{j} = 0 [Delta_j != 0]")
            if q == abs(p):
                errors.append(f"W_{j} = |Delta_{j}| [W_j != |Delta_j|]")
            if q == abs(2 * p):
                errors.append(f"W_{j} = |2 Delta_{j}| [W_j != |2 Delta_j|]")
        return errors

    def warnings(self) -> List[str]:
        messages = []
        for j, qb in enumerate(self.qubits, start=1):
            messages.extend(f"qubit {j}: {message}" for message in qb.warnings())
            ratio = abs(self.cavity_detuning(j)) / (self.omega_c + qb.omega_d)
            if ratio > RWA_WARN_RATIO:
                messages.append(
                    f"qubit {j}: |Delta|/(omega_c + omega_d) = {ratio:.3f} exceeds {RWA_WARN_RATIO} [RWA]"
                )
        return messages

    def require_valid(self, effective: bool = False) -> 'SystemParams':
        """
        Raises ValidationError naming the first failing relation. With
        effective=True the second-order poles are checked as well.
        """
        errors = self.validate()
        if effective and not errors:
            errors = self.well_definedness_errors()
        if errors:
            logger.error(f"Invalid system parameters: {errors}")
            message = errors[0]
            relation = message[message.rfind('[') + 1:-1] if message.endswith(']') else None
            raise ValidationError(message, relation=relation)
        for message in self.warnings():
            logger.warning(message)
        return self


@dataclass(frozen=True)
class DecayRates:
    """
    Qubit rates gamma_1, gamma_2 and cavity rate kappa, all in kHz.
    """
    gamma1: float = 0.0
    gamma2: float = 0.0
    kappa: float = 0.0
    convention: str = field(default='linear')

    def validate(self) -> List[str]:
        errors = []
        for name in ('gamma1', 'gamma2', 'kappa'):
            value = getattr(self, name)
            if not ParameterValidator.is_finite(value) or value < 0:
                errors.append(f"{name} must be a non-negative number [rates >= 0]")
        if self.convention not in ('linear', 'angular'):
            errors.append(f"Unknown rate convention '{self.convention}'")
        return errors

    def per_ns(self) -> Tuple[float, float, float]:
        """(gamma1, gamma2, kappa) in 1/ns."""
        errors = self.validate()
        if errors:
            raise ValidationError(errors[0], relation='rates >= 0')
        return (
            khz_to_rate(self.gamma1, self.convention),
            khz_to_rate(self.gamma2, self.convention),
            khz_to_rate(self.kappa, self.convention),
        )

    @property
    def is_closed(self) -> bool:
        return self.gamma1 == 0 and self.gamma2 == 0 and self.kappa == 0
