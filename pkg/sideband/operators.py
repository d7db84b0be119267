"""
Operator Algebra

This file builds the dense operators on qubit 1 x qubit 2 x cavity.
Everything is a small complex numpy matrix (at most a few dozen rows), so I
kept it dense and wrapped each matrix with a basis descriptor that says how
the rows are ordered.

Ordering is fixed for the whole package: qubit 1, then qubit 2, then the
cavity, and each qubit lists the excited level first. The two-qubit block is
therefore {ee, eg, ge, gg}.
"""

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union
import logging

import numpy as np
from scipy import linalg

from .exceptions import ValidationError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12

# Level indices, excited first
EXCITED = 0
GROUND = 1

TWO_QUBIT_LABELS = ('ee', 'eg', 'ge', 'gg')

QUBIT = 'qubit'
TWO_QUBIT = 'two_qubit'
CAVITY = 'cavity'
COMPOSITE = 'composite'


@dataclass(frozen=True)
class BasisDescriptor:
    """
    Describes how an operator's rows are ordered.

    kind is one of qubit, two_qubit, cavity or composite. n_max only matters
    when a cavity factor is present.
    """
    kind: str
    n_max: int = 0

    qubit_order = ('qubit1', 'qubit2', 'cavity')
    level_order = ('e', 'g')

    def __post_init__(self):
        if self.kind not in (QUBIT, TWO_QUBIT, CAVITY, COMPOSITE):
            raise ValidationError(f"Unknown basis kind '{self.kind}'")
        if self.n_max < 0:
            raise ValidationError("Fock truncation must be non-negative", relation='n_max >= 0')

    @property
    def fock_levels(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        if self.kind == QUBIT:
            return 2
        if self.kind == TWO_QUBIT:
            return 4
        if self.kind == CAVITY:
            return self.fock_levels
        return 4 * self.fock_levels

    def index(self, label: str, n: int = 0) -> int:
        """
        Row index of a product state such as ('eg', 1) in this basis.
        """
        pair = parse_two_qubit_label(label)
        if self.kind == TWO_QUBIT:
            return pair
        if self.kind != COMPOSITE:
            raise ValidationError(f"Basis '{self.kind}' has no two-qubit labels")
        if not 0 <= n <= self.n_max:
            raise ValidationError(f"Photon number {n} outside 0..{self.n_max}", relation='0 <= n <= n_max')
        return pair * self.fock_levels + n

    def labels(self) -> List[str]:
        if self.kind == QUBIT:
            return list(self.level_order)
        if self.kind == TWO_QUBIT:
            return list(TWO_QUBIT_LABELS)
        if self.kind == CAVITY:
            return [str(n) for n in range(self.fock_levels)]
        return [f"{pair},{n}" for pair in TWO_QUBIT_LABELS for n in range(self.fock_levels)]


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """
    A dense complex square matrix plus the basis it is written in.
    The array is copied and frozen on construction.
    """
    data: np.ndarray
    basis: BasisDescriptor

    def __post_init__(self):
        array = np.array(self.data, dtype=complex)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ValidationError(f"Operator must be square, got shape {array.shape}")
        if array.shape[0] != self.basis.dim:
            raise ValidationError(
                f"Operator dimension {array.shape[0]} does not match {self.basis.kind} basis "
                f"of dimension {self.basis.dim}"
            )
        array.setflags(write=False)
        object.__setattr__(self, 'data', array)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def _check_same_basis(self, other: 'OperatorMatrix'):
        if self.basis != other.basis:
            raise ValidationError(
                f"Basis mismatch: {self.basis.kind}(n_max={self.basis.n_max}) vs "
                f"{other.basis.kind}(n_max={other.basis.n_max})"
            )

    def dag(self) -> 'OperatorMatrix':
        return OperatorMatrix(self.data.conj().T, self.basis)

    def __matmul__(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_same_basis(other)
        return OperatorMatrix(self.data @ other.data, self.basis)

    def __add__(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_same_basis(other)
        return OperatorMatrix(self.data + other.data, self.basis)

    def __sub__(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_same_basis(other)
        return OperatorMatrix(self.data - other.data, self.basis)

    def __neg__(self) -> 'OperatorMatrix':
        return OperatorMatrix(-self.data, self.basis)

    def __mul__(self, scalar: complex) -> 'OperatorMatrix':
        return OperatorMatrix(self.data * scalar, self.basis)

    __rmul__ = __mul__

    def commutator(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        return self @ other - other @ self

    def hermitian_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermitian_error() <= tol

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def allclose(self, other: 'OperatorMatrix', atol: float = 1e-12) -> bool:
        self._check_same_basis(other)
        return bool(np.max(np.abs(self.data - other.data)) <= atol)


def parse_two_qubit_label(label: str) -> int:
    """
    Turns 'eg' into its position in {ee, eg, ge, gg}.
    """
    text = label.strip().lower()
    if text not in TWO_QUBIT_LABELS:
        raise ValidationError(f"Two-qubit label must be one of {TWO_QUBIT_LABELS}, got '{label}'")
    return TWO_QUBIT_LABELS.index(text)


def identity(basis: BasisDescriptor) -> OperatorMatrix:
    return OperatorMatrix(np.eye(basis.dim, dtype=complex), basis)


def fock_annihilation(n_max: int) -> OperatorMatrix:
    """
    Truncated photon annihilation operator a with sqrt(n) on the superdiagonal.
    """
    basis = BasisDescriptor(CAVITY, n_max)
    data = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)
    return OperatorMatrix(data, basis)


def qubit_operator(kind: str) -> OperatorMatrix:
    """
    Single dressed-qubit operator in the (e, g) basis.
    """
    plus = np.array([[0, 1], [0, 0]], dtype=complex)
    minus = plus.T
    matrices = {
        'x': plus + minus,
        'y': -1j * plus + 1j * minus,
        'z': np.diag([1.0, -1.0]).astype(complex),
        '+': plus,
        '-': minus,
        'i': np.eye(2, dtype=complex),
    }
    # Accept the unicode minus too
    key = kind.replace('−', '-')
    if key not in matrices:
        raise ValidationError(f"Unknown qubit operator '{kind}'")
    return OperatorMatrix(matrices[key], BasisDescriptor(QUBIT))


def tensor(ops: Sequence[OperatorMatrix]) -> OperatorMatrix:
    """
    Kronecker product of factors given in (qubit 1, qubit 2, cavity) order.
    """
    kinds = tuple(op.basis.kind for op in ops)
    if kinds == (QUBIT,):
        basis = BasisDescriptor(QUBIT)
    elif kinds == (QUBIT, QUBIT):
        basis = BasisDescriptor(TWO_QUBIT)
    elif kinds in ((QUBIT, QUBIT, CAVITY), (TWO_QUBIT, CAVITY)):
        basis = BasisDescriptor(COMPOSITE, ops[-1].basis.n_max)
    elif kinds in ((TWO_QUBIT,), (CAVITY,), (COMPOSITE,)):
        return ops[0]
    else:
        raise ValidationError(
            f"Tensor factors {kinds} do not follow the (qubit 1, qubit 2, cavity) ordering",
            relation='dimension mismatch',
        )

    data = np.array([[1.0 + 0j]])
    for op in ops:
        data = np.kron(data, op.data)
    return OperatorMatrix(data, basis)


def pauli(kind: str, qubit: int, n_max: Union[int, None] = None) -> OperatorMatrix:
    """
    Pauli or ladder operator acting on one qubit.

    With n_max given the operator lives on the composite space; with
    n_max=None it lives on the bare 4-dim two-qubit space.
    """
    if qubit not in (1, 2):
        raise ValidationError(f"Qubit index must be 1 or 2, got {qubit}")
    op = qubit_operator(kind)
    eye = qubit_operator('i')
    factors = [op, eye] if qubit == 1 else [eye, op]
    if n_max is not None:
        factors.append(identity(BasisDescriptor(CAVITY, n_max)))
    return tensor(factors)


def cavity_operator(op: OperatorMatrix) -> OperatorMatrix:
    """
    Embeds a cavity operator into the composite space.
    """
    return tensor([identity(BasisDescriptor(TWO_QUBIT)), op])


def embed_two_qubit(op: OperatorMatrix, n_max: int) -> OperatorMatrix:
    """
    Two-qubit operator times the cavity identity.
    """
    return tensor([op, identity(BasisDescriptor(CAVITY, n_max))])


def projector(labels: Iterable[str]) -> OperatorMatrix:
    """
    Two-qubit projector such as P = |ee><ee| + |gg><gg|.
    """
    data = np.zeros((4, 4), dtype=complex)
    for label in labels:
        k = parse_two_qubit_label(label)
        data[k, k] = 1.0
    return OperatorMatrix(data, BasisDescriptor(TWO_QUBIT))


def block_pauli(kind: str, pair: Tuple[str, str]) -> OperatorMatrix:
    """
    Pauli-like operator on a two-state subspace of the two-qubit space.

    block_pauli('z', ('eg', 'ge')) is |eg><eg| - |ge><ge|, and 'x' gives the
    symmetric coupling |eg><ge| + |ge><eg|.
    """
    i = parse_two_qubit_label(pair[0])
    j = parse_two_qubit_label(pair[1])
    data = np.zeros((4, 4), dtype=complex)
    if kind == 'z':
        data[i, i] = 1.0
        data[j, j] = -1.0
    elif kind == 'x':
        data[i, j] = 1.0
        data[j, i] = 1.0
    else:
        raise ValidationError(f"Block operator kind must be 'x' or 'z', got '{kind}'")
    return OperatorMatrix(data, BasisDescriptor(TWO_QUBIT))


def photon_block(op: OperatorMatrix, n: int) -> OperatorMatrix:
    """
    The 4x4 block P_n op P_n for a fixed photon number n.
    """
    if op.basis.kind != COMPOSITE:
        raise ValidationError("Photon blocks only exist on the composite space")
    rows = [op.basis.index(label, n) for label in TWO_QUBIT_LABELS]
    return OperatorMatrix(op.data[np.ix_(rows, rows)], BasisDescriptor(TWO_QUBIT))


def basis_state(label: str, n: int, n_max: int) -> np.ndarray:
    """
    Product state |label, n> as a column vector on the composite space.
    """
    basis = BasisDescriptor(COMPOSITE, n_max)
    psi = np.zeros(basis.dim, dtype=complex)
    psi[basis.index(label, n)] = 1.0
    return psi


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """
    exp(-i h t) for a Hermitian array via its eigendecomposition.
    No hermiticity check; callers guarantee it.
    """
    energies, vectors = linalg.eigh(h)
    return (vectors * np.exp(-1j * energies * t)) @ vectors.conj().T


def expm(h: OperatorMatrix, t: float) -> OperatorMatrix:
    """
    Unitary exp(-i H t) for a Hermitian operator.

    Args:
        h: Hermitian operator (max|H - H^dagger| <= 1e-12)
        t: time in ns (H in rad/ns)

    Returns:
        The propagator in the same basis.
    """
    error = h.hermitian_error()
    if error > HERMITIAN_TOL:
        logger.error(f"Refusing to exponentiate non-Hermitian operator (error {error:.3e})")
        raise ValidationError(
            f"Operator is not Hermitian (max|H - H^dagger| = {error:.3e})",
            relation='H = H^dagger',
        )
    return OperatorMatrix(expm_hermitian(h.data, t), h.basis)
