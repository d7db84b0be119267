"""
Magnus Expansion Pieces

This file handles the period-averaged integrals behind the effective
Hamiltonian: the single integral f(mu), the double integral h(mu, mu'), the
first-order term, and a brute-force second-order term computed by nested
Gauss-Legendre quadrature that the analytic formulas get checked against.

The interaction-picture Hamiltonian is written as a sum of Fourier
components V_I(t) = sum_k exp(i nu_k t) M_k, which is what both the
quadrature here and the propagators in dynamics.py consume.
"""

from functools import lru_cache
from typing import List, Optional, Tuple
import logging
import math

from django.conf import settings
import numpy as np
from scipy.special import roots_legendre

from .exceptions import ValidationError
from .models import DrivenQubitParams, SystemParams, TWO_PI
from .operators import (
    BasisDescriptor, COMPOSITE, OperatorMatrix, cavity_operator, fock_annihilation, pauli,
    photon_block,
)

logger = logging.getLogger(__name__)

# Sideband index -> dressed-qubit operator
SIDEBAND_OPERATORS = {0: 'z', 1: '+', -1: '-'}

_ZERO_PHASE = 1e-14
_ON_GRID = 1e-9


def sideband_weights(theta: float) -> dict:
    """
    Relative weights of the centre line and the two sidebands in A_j(t):
    sin(theta) for sigma_z, -(1 - cos theta) for sigma_+, (1 + cos theta) for sigma_-.
    """
    return {
        0: math.sin(theta),
        1: -(1.0 - math.cos(theta)),
        -1: 1.0 + math.cos(theta),
    }


def sideband_coefficients(qubit: DrivenQubitParams) -> dict:
    """
    Complex coefficients c_s with A_j(t) = sum_s c_s exp(i mu_s t) O_s.
    """
    weights = sideband_weights(qubit.theta)
    phase = np.exp(-1j * qubit.phase)
    return {s: 0.5 * qubit.g * weight * phase for s, weight in weights.items()}


def interaction_components(sys: SystemParams) -> List[Tuple[float, np.ndarray]]:
    """
    Fourier components (nu, M) of V_I(t) = A a^dagger + A^dagger a on the
    composite space. Each sideband contributes a pair (+mu, c O a^dagger)
    and (-mu, conj(c) O^dagger a).
    """
    a = cavity_operator(fock_annihilation(sys.n_max)).data
    a_dag = a.conj().T
    components = []
    for j in (1, 2):
        coefficients = sideband_coefficients(sys.qubits[j - 1])
        for s in (0, 1, -1):
            c = coefficients[s]
            if c == 0:
                continue
            mu = sys.sideband(j, s)
            op = pauli(SIDEBAND_OPERATORS[s], j, sys.n_max).data
            raising = c * (op @ a_dag)
            components.append((mu, raising))
            components.append((-mu, raising.conj().T))
    return components


def f_integral(mu: float, tau: float) -> complex:
    """
    (1/tau) * integral_0^tau exp(i mu t) dt.

    Args:
        mu: angular frequency (rad/ns)
        tau: averaging period (ns)

    Returns:
        1 at mu = 0, otherwise (exp(i mu tau) - 1) / (i mu tau).
    """
    if tau <= 0:
        raise ValidationError("Averaging period must be positive", relation='tau > 0')
    x = mu * tau
    if abs(x) < _ZERO_PHASE:
        return 1.0 + 0j
    return complex(np.expm1(1j * x) / (1j * x))


def _grid_index(mu: float, tau: float):
    """Returns r when mu = r * 2pi/tau, otherwise None."""
    r = mu * tau / TWO_PI
    nearest = round(r)
    return int(nearest) if abs(r - nearest) <= _ON_GRID else None


def h_integral(mu: float, mu_prime: float, tau: float) -> complex:
    """
    h(mu, mu') = 1/(2 i tau) * int_0^tau dt int_0^t dt' exp(-i mu t) exp(i mu' t').

    On the grid (both arguments integer multiples of 2pi/tau) this is 0 for
    mu != mu' and -1/(2 mu) for mu = mu' != 0. Off the grid the general
    closed form is used. h(0, 0) is undefined.
    """
    if tau <= 0:
        raise ValidationError("Averaging period must be positive", relation='tau > 0')
    r = _grid_index(mu, tau)
    r_prime = _grid_index(mu_prime, tau)

    if r is not None and r_prime is not None:
        if r == 0 and r_prime == 0:
            raise ValidationError("h(mu, mu') is undefined for mu = mu' = 0", relation="mu, mu' != 0")
        if r == r_prime:
            return complex(-1.0 / (2.0 * mu))
        if r == 0:
            # The t' integral survives alone
            return complex(1.0 / (2.0 * mu_prime))
        if r_prime == 0:
            return complex(1.0 / (2.0 * mu))
        return 0j

    if abs(mu_prime * tau) < _ZERO_PHASE:
        if abs(mu * tau) < _ZERO_PHASE:
            raise ValidationError("h(mu, mu') is undefined for mu = mu' = 0", relation="mu, mu' != 0")
        x = mu * tau
        ramp = (np.exp(-1j * x) * (1.0 + 1j * x) - 1.0) / (mu * mu)
        return complex(ramp / (2j * tau))
    return complex(-(f_integral(mu_prime - mu, tau) - f_integral(-mu, tau)) / (2.0 * mu_prime))


@lru_cache(maxsize=8)
def _legendre(nodes: int):
    x, w = roots_legendre(nodes)
    return x, w


def _nested_weights(tau: float, nodes: int):
    """
    Outer nodes t, outer weights W, and for each outer node the inner
    nodes/weights on [0, t].
    """
    x, w = _legendre(nodes)
    t_outer = 0.5 * tau * (x + 1.0)
    w_outer = 0.5 * tau * w
    t_inner = np.outer(t_outer, 0.5 * (x + 1.0))
    w_inner = np.outer(t_outer, 0.5 * w)
    return t_outer, w_outer, t_inner, w_inner


def _node_count(nodes: Optional[int]) -> int:
    return settings.SIDEBAND_QUADRATURE_NODES if nodes is None else nodes


def h_integral_quadrature(mu: float, mu_prime: float, tau: float, nodes: Optional[int] = None) -> complex:
    """
    Same double integral as h_integral, evaluated by nested Gauss-Legendre
    with SIDEBAND_QUADRATURE_NODES points per axis unless nodes is given.
    """
    nodes = _node_count(nodes)
    t_outer, w_outer, t_inner, w_inner = _nested_weights(tau, nodes)
    inner = np.sum(w_inner * np.exp(1j * mu_prime * t_inner), axis=1)
    total = np.sum(w_outer * np.exp(-1j * mu * t_outer) * inner)
    return complex(total / (2j * tau))


def first_order_magnus(sys: SystemParams) -> OperatorMatrix:
    """
    Period average of V_I over tau = 2pi/eta. Vanishes on the integer grid.
    """
    basis = BasisDescriptor(COMPOSITE, sys.n_max)
    total = np.zeros((basis.dim, basis.dim), dtype=complex)
    for nu, op in interaction_components(sys):
        total += f_integral(nu, sys.tau) * op
    return OperatorMatrix(total, basis)


def second_order_magnus_numeric(sys: SystemParams, nodes: Optional[int] = None) -> OperatorMatrix:
    """
    Second-order Magnus term (1/(2 i tau)) int int [V_I(t), V_I(t')] computed
    by nested quadrature over every pair of Fourier components.

    This is the reference the analytic V_qq and dispersive shifts are
    compared with, so it does not use any of the grid shortcuts.
    """
    nodes = _node_count(nodes)
    components = interaction_components(sys)
    freqs = np.array([nu for nu, _ in components])
    t_outer, w_outer, t_inner, w_inner = _nested_weights(sys.tau, nodes)

    # inner[b, i] = int_0^{t_i} exp(i nu_b t') dt'
    inner = np.einsum('ij,bij->bi', w_inner, np.exp(1j * freqs[:, None, None] * t_inner[None, :, :]))
    outer = np.exp(1j * freqs[:, None] * t_outer[None, :]) * w_outer[None, :]
    weights = (outer @ inner.T) / (2j * sys.tau)

    dim = components[0][1].shape[0] if components else 4 * (sys.n_max + 1)
    total = np.zeros((dim, dim), dtype=complex)
    for a, (_, m_a) in enumerate(components):
        for b, (_, m_b) in enumerate(components):
            if a == b:
                continue
            total += weights[a, b] * (m_a @ m_b - m_b @ m_a)
    logger.debug(f"Numeric second-order term from {len(components)} components, {nodes} nodes")
    return OperatorMatrix(total, BasisDescriptor(COMPOSITE, sys.n_max))


def project_photon_block(op: OperatorMatrix, n: int, traceless: bool = False) -> OperatorMatrix:
    """
    4x4 block of a composite-space operator at photon number n.

    With traceless=True the multiple of the identity is removed, which is
    how the numeric second-order term is compared with V_qq + Lambda_n
    (the constant energy offsets are dropped from the analytic forms).
    """
    block = photon_block(op, n)
    if not traceless:
        return block
    data = block.data - np.trace(block.data) / block.dim * np.eye(block.dim)
    return OperatorMatrix(data, block.basis)
