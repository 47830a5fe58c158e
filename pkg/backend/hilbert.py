"""
Composite Hilbert-space bookkeeping: a 2- or 3-level atom tensored with a
truncated resonator Fock space, always in atom (x) resonator order.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import CutoffError, DomainError

logger = logging.getLogger(__name__)

DEFAULT_FOCK_CUTOFF = 40
HERMITIAN_TOL = 1e-12
TAIL_TOL = 1e-6

LEVEL_INDEX = {'g': 0, 'e': 1, 'f': 2}


@dataclass(frozen=True)
class SpaceDescriptor:
    atom_levels: int
    fock_cutoff: int
    ordering: str = "atom⊗resonator"

    @property
    def atom_dim(self) -> int:
        return self.atom_levels

    @property
    def dim(self) -> int:
        return self.atom_levels * self.fock_cutoff

    @property
    def is_resonator_only(self) -> bool:
        return self.atom_levels == 1

    def atom_identity(self) -> np.ndarray:
        return np.eye(self.atom_levels, dtype=complex)

    def fock_identity(self) -> np.ndarray:
        return np.eye(self.fock_cutoff, dtype=complex)


def make_space(atom_levels: int, fock_cutoff: int = DEFAULT_FOCK_CUTOFF) -> SpaceDescriptor:
    """
    Builds a composite space descriptor.
    Args:
        atom_levels: 2 for a qubit, 3 for a qutrit.
        fock_cutoff: Number of retained Fock states |0>..|N-1>.
    Returns:
        The SpaceDescriptor.
    """
    if atom_levels not in (2, 3):
        raise DomainError(f"atom_levels must be 2 or 3, got {atom_levels}")
    if int(fock_cutoff) != fock_cutoff or fock_cutoff < 2:
        raise DomainError(f"fock_cutoff must be an integer >= 2, got {fock_cutoff}")
    return SpaceDescriptor(int(atom_levels), int(fock_cutoff))


def resonator_only(fock_cutoff: int) -> SpaceDescriptor:
    """Descriptor for states living on the resonator factor alone."""
    if int(fock_cutoff) != fock_cutoff or fock_cutoff < 2:
        raise DomainError(f"fock_cutoff must be an integer >= 2, got {fock_cutoff}")
    return SpaceDescriptor(1, int(fock_cutoff))


class Operator:
    """Dense complex matrix tied to a space. Immutable once built."""

    __slots__ = ('matrix', 'space')

    def __init__(self, matrix, space: SpaceDescriptor):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != space.dim:
            raise DomainError(f"operator shape {m.shape} does not match space dimension {space.dim}")
        m.setflags(write=False)
        object.__setattr__(self, 'matrix', m)
        object.__setattr__(self, 'space', space)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    def _check(self, other: "Operator"):
        if not isinstance(other, Operator):
            return NotImplemented
        if other.space != self.space:
            raise DomainError("operators live on different spaces")

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.matrix + other.matrix, self.space)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.matrix - other.matrix, self.space)

    def __neg__(self):
        return Operator(-self.matrix, self.space)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        return Operator(complex(scalar) * self.matrix, self.space)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.matrix @ other.matrix, self.space)

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.space)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) < tol)

    def __repr__(self):
        return f"Operator(dim={self.space.dim}, space={self.space})"


class QuantumState:
    """Pure ket or density matrix, validated on construction."""

    __slots__ = ('kind', 'data', 'space')

    def __init__(self, kind: str, data, space: SpaceDescriptor, validate: bool = True):
        arr = np.array(data, dtype=complex)
        if kind == 'pure':
            if arr.shape != (space.dim,):
                raise DomainError(f"ket shape {arr.shape} does not match dimension {space.dim}")
            if validate:
                norm = np.linalg.norm(arr)
                if abs(norm - 1.0) > 1e-9:
                    raise DomainError(f"ket is not normalized (norm = {norm:.12g})")
        elif kind == 'mixed':
            if arr.shape != (space.dim, space.dim):
                raise DomainError(f"density matrix shape {arr.shape} does not match dimension {space.dim}")
            if validate:
                trace = np.trace(arr).real
                if abs(trace - 1.0) > 1e-9:
                    raise DomainError(f"density matrix trace is {trace:.12g}")
                if np.max(np.abs(arr - arr.conj().T)) > 1e-10:
                    raise DomainError("density matrix is not Hermitian")
                lam_min = np.linalg.eigvalsh(arr)[0]
                if lam_min < -1e-8:
                    raise DomainError(f"density matrix has negative eigenvalue {lam_min:.3e}")
        else:
            raise DomainError(f"unknown state kind '{kind}'")
        arr.setflags(write=False)
        object.__setattr__(self, 'kind', kind)
        object.__setattr__(self, 'data', arr)
        object.__setattr__(self, 'space', space)

    def __setattr__(self, name, value):
        raise AttributeError("QuantumState is immutable")

    @property
    def is_pure(self) -> bool:
        return self.kind == 'pure'

    def to_density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)

    def purity(self) -> float:
        if self.is_pure:
            return 1.0
        return float(np.real(np.trace(self.data @ self.data)))

    def __repr__(self):
        return f"QuantumState(kind={self.kind}, space={self.space})"


def ket(vector, space: SpaceDescriptor) -> QuantumState:
    return QuantumState('pure', vector, space)


def density(matrix, space: SpaceDescriptor) -> QuantumState:
    return QuantumState('mixed', matrix, space)


def normalized_ket(vector, space: SpaceDescriptor) -> QuantumState:
    v = np.asarray(vector, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise DomainError("cannot normalize the zero vector")
    return ket(v / norm, space)


# --- Resonator factor ---

def _fock_annihilation(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)


def annihilation(space: SpaceDescriptor) -> Operator:
    """Resonator lowering operator, identity on the atom; <n-1|a|n> = sqrt(n)."""
    return Operator(np.kron(space.atom_identity(), _fock_annihilation(space.fock_cutoff)), space)


def creation(space: SpaceDescriptor) -> Operator:
    return annihilation(space).dag()


def number_operator(space: SpaceDescriptor) -> Operator:
    n = np.diag(np.arange(space.fock_cutoff, dtype=float)).astype(complex)
    return Operator(np.kron(space.atom_identity(), n), space)


def parity_operator(space: SpaceDescriptor) -> Operator:
    """exp(i pi n) on the resonator factor."""
    p = np.diag((-1.0) ** np.arange(space.fock_cutoff)).astype(complex)
    return Operator(np.kron(space.atom_identity(), p), space)


# --- Atom factor ---

def atom_unit(space: SpaceDescriptor, row: int, col: int) -> np.ndarray:
    """Matrix unit |row><col| on the atom factor."""
    u = np.zeros((space.atom_levels, space.atom_levels), dtype=complex)
    u[row, col] = 1.0
    return u


def tensor(a_atom, b_resonator, space: SpaceDescriptor) -> Operator:
    """
    Kronecker product in the fixed atom (x) resonator ordering.
    Args:
        a_atom: Matrix on the atom factor (atom_levels x atom_levels).
        b_resonator: Matrix on the resonator factor (N x N).
        space: Target composite space.
    Returns:
        The composite Operator.
    """
    a = np.asarray(a_atom, dtype=complex)
    b = np.asarray(b_resonator, dtype=complex)
    if a.shape != (space.atom_levels, space.atom_levels):
        raise DomainError(f"atom factor has shape {a.shape}, expected {(space.atom_levels,) * 2}")
    if b.shape != (space.fock_cutoff, space.fock_cutoff):
        raise DomainError(f"resonator factor has shape {b.shape}, expected {(space.fock_cutoff,) * 2}")
    return Operator(np.kron(a, b), space)


def atom_operator(a_atom, space: SpaceDescriptor) -> Operator:
    return tensor(a_atom, space.fock_identity(), space)


def atom_projector(space: SpaceDescriptor, level) -> Operator:
    idx = LEVEL_INDEX[level] if isinstance(level, str) else int(level)
    if not 0 <= idx < space.atom_levels:
        raise DomainError(f"level {level} does not exist on a {space.atom_levels}-level atom")
    return atom_operator(atom_unit(space, idx, idx), space)


def sigma_z(space: SpaceDescriptor) -> Operator:
    """|e><e| - |g><g| (zero on |f>)."""
    return atom_operator(atom_unit(space, 1, 1) - atom_unit(space, 0, 0), space)


def sigma_x(space: SpaceDescriptor) -> Operator:
    return atom_operator(atom_unit(space, 1, 0) + atom_unit(space, 0, 1), space)


def sigma_y(space: SpaceDescriptor) -> Operator:
    """i(sigma_+ - sigma_-) with sigma_+ = |e><g|."""
    return atom_operator(1j * (atom_unit(space, 1, 0) - atom_unit(space, 0, 1)), space)


def atom_transition_ops(space: SpaceDescriptor, selection: str = 'cascade') -> dict:
    """
    Raising and lowering operators for the allowed atom transitions.
    Args:
        space: Composite space.
        selection: 'cascade', 'lambda' or 'vee'.
    Returns:
        For a qubit: {'sp', 'sm'}. For a qutrit: {'s1p', 's1m', 's2p', 's2m'}.
    """
    if selection not in ('cascade', 'lambda', 'vee'):
        raise DomainError(f"unknown selection rule '{selection}'")
    if space.atom_levels == 2:
        if selection != 'cascade':
            raise DomainError(f"selection '{selection}' needs a 3-level atom")
        sp = atom_operator(atom_unit(space, 1, 0), space)
        return {'sp': sp, 'sm': sp.dag()}
    if space.atom_levels != 3:
        raise DomainError("transition operators need an atom factor")

    g, e, f = 0, 1, 2
    if selection == 'cascade':
        first, second = (e, g), (f, e)
    elif selection == 'lambda':
        first, second = (f, g), (f, e)
    else:
        first, second = (e, g), (f, g)
    s1p = atom_operator(atom_unit(space, *first), space)
    s2p = atom_operator(atom_unit(space, *second), space)
    return {'s1p': s1p, 's1m': s1p.dag(), 's2p': s2p, 's2m': s2p.dag()}


# --- Displacement and coherent states ---

def cutoff_guard(alpha: complex, fock_cutoff: int):
    """Raises CutoffError unless |alpha|^2 + 5|alpha| + 10 <= N."""
    r = abs(alpha)
    need = r * r + 5.0 * r + 10.0
    if need > fock_cutoff:
        raise CutoffError(f"|alpha| = {r:.4g} needs a Fock cutoff of at least {int(np.ceil(need))}, "
                          f"have {fock_cutoff}")


def fock_displacement(alpha: complex, fock_cutoff: int) -> np.ndarray:
    """exp(alpha a^dag - alpha* a) on the resonator factor alone."""
    cutoff_guard(alpha, fock_cutoff)
    a = _fock_annihilation(fock_cutoff)
    generator = alpha * a.conj().T - np.conj(alpha) * a
    return expm(generator)


def displacement(alpha: complex, space: SpaceDescriptor) -> Operator:
    """D(alpha) acting on the resonator factor (identity on the atom)."""
    d = fock_displacement(alpha, space.fock_cutoff)
    return Operator(np.kron(space.atom_identity(), d), space)


def fock_vector(n: int, fock_cutoff: int) -> np.ndarray:
    if not 0 <= n < fock_cutoff:
        raise CutoffError(f"Fock state |{n}> outside cutoff {fock_cutoff}")
    v = np.zeros(fock_cutoff, dtype=complex)
    v[n] = 1.0
    return v


def coherent_vector(alpha: complex, fock_cutoff: int) -> np.ndarray:
    return fock_displacement(alpha, fock_cutoff)[:, 0]


def coherent_state(alpha: complex, space: SpaceDescriptor) -> QuantumState:
    """
    D(alpha)|0> on the resonator. On a composite space the atom is left in |g>.
    """
    vec = coherent_vector(alpha, space.fock_cutoff)
    if space.is_resonator_only:
        return normalized_ket(vec, space)
    atom = np.zeros(space.atom_levels, dtype=complex)
    atom[0] = 1.0
    return normalized_ket(np.kron(atom, vec), space)


def basis_state(space: SpaceDescriptor, level, n: int = 0) -> QuantumState:
    """Product state |level>|n>."""
    f = fock_vector(n, space.fock_cutoff)
    if space.is_resonator_only:
        return ket(f, space)
    idx = LEVEL_INDEX[level] if isinstance(level, str) else int(level)
    if not 0 <= idx < space.atom_levels:
        raise DomainError(f"level {level} does not exist on a {space.atom_levels}-level atom")
    atom = np.zeros(space.atom_levels, dtype=complex)
    atom[idx] = 1.0
    return ket(np.kron(atom, f), space)


def product_state(atom_vector, fock_vector_, space: SpaceDescriptor) -> QuantumState:
    atom = np.asarray(atom_vector, dtype=complex)
    if atom.shape != (space.atom_levels,):
        raise DomainError(f"atom vector has shape {atom.shape}")
    return normalized_ket(np.kron(atom, np.asarray(fock_vector_, dtype=complex)), space)


def fock_populations(state: QuantumState) -> np.ndarray:
    """Photon-number distribution, traced over the atom."""
    n = state.space.fock_cutoff
    if state.is_pure:
        amps = state.data.reshape(state.space.atom_levels, n)
        return np.sum(np.abs(amps) ** 2, axis=0)
    diag = np.real(np.diag(state.data)).reshape(state.space.atom_levels, n)
    return np.sum(diag, axis=0)


def check_fock_tail(state: QuantumState, tol: float = TAIL_TOL) -> float:
    """
    Population of the top two Fock levels; raises CutoffError above tol.
    """
    pops = fock_populations(state)
    tail = float(np.sum(pops[-2:]))
    if tail >= tol:
        raise CutoffError(f"top-two Fock population {tail:.3e} exceeds {tol:.0e}; "
                          f"raise fock_cutoff above {state.space.fock_cutoff}")
    return tail
