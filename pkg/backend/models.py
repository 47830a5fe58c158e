"""
Hamiltonians and open-system models of a driven atom coupled to a resonator.

Every Hamiltonian is a sum of tagged terms  H(t) = sum_k M_k exp(i nu_k t),
with the amplitude folded into M_k. Terms with nu_k = 0 form the static part.
Rotating-frame versions are derived by splitting each term by the frequency
shifts of the frame generator, so the rotating-wave approximation of any
model is exactly its static part.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import hilbert
from .dynamics import CollapseChannel
from .errors import DomainError, ValidityError
from .hilbert import Operator, SpaceDescriptor, atom_operator, atom_unit
from . import oracles

logger = logging.getLogger(__name__)

PASS_RATIO = 0.1
MARGINAL_RATIO = 0.33
HERMITIAN_CHECKS = 16
HERMITIAN_RTOL = 1e-11
FREQ_RTOL = 1e-10


# --- Parameter sets ---

@dataclass(frozen=True)
class QubitParams:
    omega_q: float
    omega_r: float
    omega_d: float
    g: float
    Omega: float

    def __post_init__(self):
        for name in ('omega_q', 'omega_r', 'omega_d'):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        for name in ('g', 'Omega'):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")

    @property
    def Delta(self) -> float:
        return self.omega_q - self.omega_d

    @property
    def delta(self) -> float:
        return self.omega_r - self.omega_d

    @property
    def epsilon(self) -> float:
        return float(np.hypot(self.Omega, self.Delta))


@dataclass(frozen=True)
class QutritParams:
    omega_eg: float
    omega_fe: float
    omega_r: float
    omega_d: float
    g1: float
    g2: float
    Omega1: float
    Omega2: float
    selection: str = 'cascade'
    mode: str = 'free'

    def __post_init__(self):
        for name in ('omega_eg', 'omega_fe', 'omega_r', 'omega_d'):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        for name in ('g1', 'g2', 'Omega1', 'Omega2'):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")
        if self.selection not in ('cascade', 'lambda', 'vee'):
            raise DomainError(f"unknown selection rule '{self.selection}'")
        if self.mode == 'harmonic':
            require_harmonic(self)
        elif self.mode == 'general':
            require_coupling_ratio(self)
        elif self.mode != 'free':
            raise DomainError(f"unknown qutrit mode '{self.mode}'")

    @property
    def xi(self) -> float:
        return self.omega_fe - self.omega_eg

    @property
    def Delta1(self) -> float:
        return self.omega_eg - self.omega_d

    @property
    def delta(self) -> float:
        return self.omega_r - self.omega_d

    @property
    def tilde_omega_f(self) -> float:
        return 2.0 * self.omega_fe + self.omega_eg

    @property
    def tilde_chi(self) -> float:
        return self.tilde_omega_f - 3.0 * self.omega_d

    @property
    def Sigma(self) -> float:
        # Lab |f> sits at tilde_omega_f/2 with |g> at -omega_eg/2. Rotating at omega_d on both
        # transitions shifts |f> by 3 omega_d/2, leaving Sigma/2; zero for a harmonic qutrit driven at omega_q.
        return self.tilde_omega_f - 3.0 * self.omega_d


def require_harmonic(p: QutritParams):
    """Checks g2 = sqrt2 g1, Omega2 = sqrt2 Omega1 and tilde_chi = 0."""
    r2 = np.sqrt(2.0)
    if not np.isclose(p.g2, r2 * p.g1, rtol=1e-9, atol=0.0):
        raise DomainError("harmonic qutrit needs g2 = sqrt(2) g1")
    if not np.isclose(p.Omega2, r2 * p.Omega1, rtol=1e-9, atol=0.0):
        raise DomainError("harmonic qutrit needs Omega2 = sqrt(2) Omega1")
    if abs(p.tilde_chi) > 1e-9 * p.omega_d:
        raise DomainError(f"harmonic qutrit needs tilde_chi = 0, got {p.tilde_chi:.6g} rad/s")


def require_coupling_ratio(p: QutritParams):
    """Checks g1/g2 = Omega1/Omega2, written as g1 Omega2 = g2 Omega1."""
    lhs, rhs = p.g1 * p.Omega2, p.g2 * p.Omega1
    if abs(lhs - rhs) > 1e-9 * max(abs(lhs), abs(rhs)):
        raise DomainError("qutrit couplings need g1/g2 = Omega1/Omega2")


def harmonic_qutrit_params(omega_q: float, omega_r: float, omega_d: float,
                           g1: float, Omega1: float, selection: str = 'cascade') -> QutritParams:
    """Perfectly harmonic qutrit: equal transition frequencies, sqrt(2) matrix elements."""
    return QutritParams(omega_eg=omega_q, omega_fe=omega_q, omega_r=omega_r, omega_d=omega_d,
                        g1=g1, g2=np.sqrt(2.0) * g1, Omega1=Omega1, Omega2=np.sqrt(2.0) * Omega1,
                        selection=selection, mode='harmonic')


@dataclass(frozen=True)
class DecoherenceParams:
    gamma1: float = 0.0
    gamma2: float = None
    gamma_phi: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        for name in ('gamma1', 'gamma2', 'gamma_phi', 'kappa'):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise DomainError(f"decoherence rate {name} must be non-negative")

    @property
    def resolved_gamma2(self) -> float:
        return 2.0 * self.gamma1 if self.gamma2 is None else self.gamma2

    @property
    def is_closed(self) -> bool:
        return self.gamma1 == 0 and self.resolved_gamma2 == 0 and self.gamma_phi == 0 and self.kappa == 0


@dataclass(frozen=True)
class SpuriousDriveParams:
    omega_prime: float = 0.0
    phi_prime: float = 0.0
    omega_c: float = 0.0
    phi_c: float = 0.0

    def __post_init__(self):
        if self.omega_prime < 0 or self.omega_c < 0:
            raise DomainError("spurious and cancellation strengths must be non-negative")
        for name in ('phi_prime', 'phi_c'):
            if not 0.0 <= getattr(self, name) < 2 * np.pi:
                raise DomainError(f"{name} must lie in [0, 2pi)")


# --- Time-dependent Hamiltonian ---

@dataclass(frozen=True)
class HamiltonianTerm:
    matrix: np.ndarray
    frequency: float = 0.0
    tag: str = 'static'


class TimeDependentHamiltonian:
    """
    H(t) = sum_k M_k exp(i nu_k t). Callable; returns an Operator.
    """

    def __init__(self, terms, space: SpaceDescriptor, name: str = '', check: bool = True):
        self.space = space
        self.name = name
        self.terms = []
        for term in terms:
            m = np.array(term.matrix, dtype=complex)
            if m.shape != (space.dim, space.dim):
                raise DomainError(f"term '{term.tag}' has shape {m.shape}, expected {(space.dim,) * 2}")
            if not np.any(m):
                continue
            m.setflags(write=False)
            self.terms.append(HamiltonianTerm(m, float(term.frequency), term.tag))
        if check:
            self.check_hermitian()

    def matrix_at(self, t: float) -> np.ndarray:
        h = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for term in self.terms:
            if term.frequency == 0.0:
                h += term.matrix
            else:
                h += np.exp(1j * term.frequency * t) * term.matrix
        return h

    def evaluate(self, t: float) -> Operator:
        return Operator(self.matrix_at(t), self.space)

    __call__ = evaluate

    def static_part(self) -> np.ndarray:
        h = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for term in self.terms:
            if term.frequency == 0.0:
                h += term.matrix
        return h

    def dynamic_terms(self) -> list:
        return [term for term in self.terms if term.frequency != 0.0]

    @property
    def is_static(self) -> bool:
        return not self.dynamic_terms()

    @property
    def max_frequency(self) -> float:
        return max((abs(term.frequency) for term in self.terms), default=0.0)

    def tagged(self, tag: str) -> np.ndarray:
        """Sum of the terms carrying a tag, evaluated at t = 0."""
        h = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for term in self.terms:
            if term.tag == tag:
                h += term.matrix
        return h

    def check_hermitian(self, samples: int = HERMITIAN_CHECKS, seed: int = 7):
        rng = np.random.default_rng(seed)
        horizon = 2 * np.pi / min((abs(t.frequency) for t in self.terms if t.frequency), default=1.0)
        for t in rng.uniform(0.0, 4.0 * horizon, size=samples):
            h = self.matrix_at(t)
            scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
            err = float(np.max(np.abs(h - h.conj().T), initial=0.0))
            if err > HERMITIAN_RTOL * scale:
                raise DomainError(f"Hamiltonian '{self.name}' is not Hermitian at t={t:.3e} s "
                                  f"(max deviation {err:.3e})")

    def __add__(self, other: "TimeDependentHamiltonian") -> "TimeDependentHamiltonian":
        if other.space != self.space:
            raise DomainError("Hamiltonians live on different spaces")
        return TimeDependentHamiltonian(self.terms + other.terms, self.space, name=self.name, check=False)

    def __repr__(self):
        return f"TimeDependentHamiltonian(name={self.name!r}, terms={len(self.terms)}, static={self.is_static})"


def _with_hc(matrix: np.ndarray, frequency: float, tag: str) -> list:
    """A term and its Hermitian conjugate."""
    return [HamiltonianTerm(matrix, frequency, tag),
            HamiltonianTerm(matrix.conj().T, -frequency, tag)]


def _cluster(values: np.ndarray, tol: float) -> np.ndarray:
    """Labels values so that sorted neighbours closer than tol share a cluster."""
    order = np.argsort(values, kind='stable')
    labels = np.empty(len(values), dtype=int)
    current = 0
    for pos, idx in enumerate(order):
        if pos and values[idx] - values[order[pos - 1]] > tol:
            current += 1
        labels[idx] = current
    return labels


def rotate_into_frame(H: TimeDependentHamiltonian, generator: Operator,
                      name: str = None) -> TimeDependentHamiltonian:
    """
    Moves a Hamiltonian into the frame generated by G:  e^{iGt} (H(t) - G) e^{-iGt}.
    Each term is split by the frequency differences of G, and terms whose total
    frequency vanishes become static. Surviving oscillating terms are tagged
    'counter-rotating' next to their original tag.
    Args:
        H: Hamiltonian to transform.
        generator: Hermitian frame generator G.
        name: Name of the resulting model.
    Returns:
        The rotated TimeDependentHamiltonian.
    """
    if not generator.is_hermitian(1e-9 * max(1.0, float(np.max(np.abs(generator.matrix))))):
        raise DomainError("frame generator must be Hermitian")
    g = generator.matrix
    if np.count_nonzero(g - np.diag(np.diag(g))) == 0:
        w, vecs = np.real(np.diag(g)), None
    else:
        w, vecs = np.linalg.eigh(g)
    tol = FREQ_RTOL * max(1.0, float(np.max(np.abs(w))))
    gaps = np.subtract.outer(w, w)

    terms = []
    for term in H.terms:
        m = term.matrix if vecs is None else vecs.conj().T @ term.matrix @ vecs
        cutoff = 1e-14 * float(np.max(np.abs(m)))
        mask = np.abs(m) > cutoff
        if not np.any(mask):
            continue
        shifts = term.frequency + gaps[mask]
        labels = _cluster(shifts, tol)
        rows, cols = np.nonzero(mask)
        for label in np.unique(labels):
            sel = labels == label
            nu = float(np.median(shifts[sel]))
            if abs(nu) <= tol:
                nu = 0.0
            part = np.zeros_like(m)
            part[rows[sel], cols[sel]] = m[rows[sel], cols[sel]]
            if vecs is not None:
                part = vecs @ part @ vecs.conj().T
            tag = term.tag if nu == 0.0 else f"{term.tag}:counter-rotating"
            terms.append(HamiltonianTerm(part, nu, tag))
    terms.append(HamiltonianTerm(-g, 0.0, 'frame'))
    return TimeDependentHamiltonian(terms, H.space, name=name or f"{H.name}|rotated")


# --- Qubit models ---

def _require_levels(space: SpaceDescriptor, levels: int):
    if space.atom_levels != levels:
        raise DomainError(f"model needs a {levels}-level atom, space has {space.atom_levels}")


def _qubit_ops(space: SpaceDescriptor) -> dict:
    ops = hilbert.atom_transition_ops(space, 'cascade')
    a = hilbert.annihilation(space).matrix
    return {
        'sp': ops['sp'].matrix, 'sm': ops['sm'].matrix,
        'sx': hilbert.sigma_x(space).matrix, 'sz': hilbert.sigma_z(space).matrix,
        'sy': hilbert.sigma_y(space).matrix,
        'a': a, 'ad': a.conj().T, 'n': hilbert.number_operator(space).matrix,
    }


def build_driven_qrm_lab(p: QubitParams, space: SpaceDescriptor) -> TimeDependentHamiltonian:
    """
    Driven quantum Rabi model in the laboratory frame:
    omega_q sz/2 + omega_r n + g sx (a + a^dag) + Omega cos(omega_d t) sx.
    """
    _require_levels(space, 2)
    o = _qubit_ops(space)
    terms = [
        HamiltonianTerm(p.omega_q * o['sz'] / 2 + p.omega_r * o['n'], 0.0, 'free'),
        HamiltonianTerm(p.g * o['sx'] @ (o['a'] + o['ad']), 0.0, 'coupling'),
        HamiltonianTerm(p.Omega / 2 * o['sx'], p.omega_d, 'drive'),
        HamiltonianTerm(p.Omega / 2 * o['sx'], -p.omega_d, 'drive'),
    ]
    return TimeDependentHamiltonian(terms, space, name='qrm_lab')


def drive_frame_generator(p, space: SpaceDescriptor, frame: str = 'symmetric') -> Operator:
    """
    Generator of the frame rotating with the drive.
    Qubit: omega_d (sz/2 + n). Qutrit 'symmetric' puts |f> at 3 omega_d/2 so both
    transitions rotate at omega_d; qutrit 'bare_f' puts |f> at tilde_omega_f/2.
    """
    n = hilbert.number_operator(space).matrix
    if isinstance(p, QubitParams):
        _require_levels(space, 2)
        return Operator(p.omega_d * (hilbert.sigma_z(space).matrix / 2 + n), space)
    _require_levels(space, 3)
    if frame not in ('symmetric', 'bare_f'):
        raise DomainError(f"unknown qutrit frame '{frame}'")
    f_energy = 1.5 * p.omega_d if frame == 'symmetric' else p.tilde_omega_f / 2
    atom = p.omega_d / 2 * (atom_unit(space, 1, 1) - atom_unit(space, 0, 0)) + f_energy * atom_unit(space, 2, 2)
    return Operator(atom_operator(atom, space).matrix + p.omega_d * n, space)


def dressing_generator(p, space: SpaceDescriptor) -> Operator:
    """
    Static atom part of the drive-frame RWA Hamiltonian plus delta n.
    The interaction picture used by the analytic states is taken w.r.t. this operator.
    """
    n = hilbert.number_operator(space).matrix
    if isinstance(p, QubitParams):
        _require_levels(space, 2)
        atom = p.Delta / 2 * hilbert.sigma_z(space).matrix + p.Omega / 2 * hilbert.sigma_x(space).matrix
        return Operator(atom + p.delta * n, space)
    _require_levels(space, 3)
    ops = hilbert.atom_transition_ops(space, p.selection)
    atom = (atom_operator(p.Delta1 / 2 * (atom_unit(space, 1, 1) - atom_unit(space, 0, 0))
                          + p.Sigma / 2 * atom_unit(space, 2, 2), space).matrix
            + p.Omega1 / 2 * (ops['s1p'] + ops['s1m']).matrix
            + p.Omega2 / 2 * (ops['s2p'] + ops['s2m']).matrix)
    return Operator(atom + p.delta * n, space)


def build_drive_frame_full(p: QubitParams, space: SpaceDescriptor) -> TimeDependentHamiltonian:
    """Lab model in the frame of the drive, counter-rotating terms kept and tagged."""
    lab = build_driven_qrm_lab(p, space)
    return rotate_into_frame(lab, drive_frame_generator(p, space), name='drive_frame')


def build_rwa_frame(p: QubitParams, space: SpaceDescriptor,
                    require_valid: bool = False) -> TimeDependentHamiltonian:
    """
    Static drive-frame Hamiltonian after the rotating-wave approximation:
    Delta sz/2 + delta n + g (s+ a + s- a^dag) + Omega sx/2.
    """
    _require_levels(space, 2)
    if require_valid:
        report = check_rwa_report(p)
        if report.failures():
            raise ValidityError(report.failures()[0].message(), report)
    o = _qubit_ops(space)
    terms = [
        HamiltonianTerm(p.Delta / 2 * o['sz'] + p.delta * o['n'], 0.0, 'free'),
        HamiltonianTerm(p.g * (o['sp'] @ o['a'] + o['sm'] @ o['ad']), 0.0, 'coupling'),
        HamiltonianTerm(p.Omega / 2 * o['sx'], 0.0, 'drive'),
    ]
    return TimeDependentHamiltonian(terms, space, name='rwa')


def _require_resonant(p: QubitParams):
    if abs(p.Delta) > 1e-12 * p.omega_q:
        raise DomainError(f"model needs Delta = 0, got {p.Delta:.6g} rad/s")


def _dressed_sigma_plus(space: SpaceDescriptor, Omega: float) -> list:
    """
    s+ in the interaction picture of Omega sx/2 as (matrix, frequency) pairs:
    (|+><+| - |-><-| + e^{i Omega t}|+><-| - e^{-i Omega t}|-><+|)/2.
    """
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / np.sqrt(2.0)
    k = np.outer(plus, minus).astype(complex)
    sx = atom_unit(space, 0, 1) + atom_unit(space, 1, 0)
    eye = space.fock_identity()
    return [(np.kron(sx / 2, eye), 0.0),
            (np.kron(k / 2, eye), Omega),
            (np.kron(-k.T / 2, eye), -Omega)]


def build_interaction_rwa(p: QubitParams, space: SpaceDescriptor) -> TimeDependentHamiltonian:
    """Interaction picture of the RWA model w.r.t. Omega sx/2 + delta n (Delta = 0)."""
    _require_levels(space, 2)
    _require_resonant(p)
    a = hilbert.annihilation(space).matrix
    terms = []
    for sp, nu in _dressed_sigma_plus(space, p.Omega):
        terms += _with_hc(p.g * sp @ a, nu - p.delta, 'coupling')
    return TimeDependentHamiltonian(terms, space, name='interaction_rwa')


def build_interaction_full(p: QubitParams, space: SpaceDescriptor) -> TimeDependentHamiltonian:
    """
    Exact interaction-picture model (Delta = 0): the RWA interaction plus the
    driving and interaction Bloch-Siegert terms oscillating near 2 omega_d.
    """
    _require_levels(space, 2)
    _require_resonant(p)
    a = hilbert.annihilation(space).matrix
    ad = a.conj().T
    eye = np.eye(space.dim, dtype=complex)
    terms = []
    for sp, nu in _dressed_sigma_plus(space, p.Omega):
        terms += _with_hc(p.g * sp @ a, nu - p.delta, 'coupling')
        terms += _with_hc(p.g * sp @ ad, nu + 2 * p.omega_d + p.delta, 'coupling:counter-rotating')
        terms += _with_hc(p.Omega / 2 * sp @ eye, nu + 2 * p.omega_d, 'drive:counter-rotating')
    return TimeDependentHamiltonian(terms, space, name='interaction_full')


def build_interaction_detuned_full(p: QubitParams, space: SpaceDescriptor) -> TimeDependentHamiltonian:
    """Exact interaction picture w.r.t. Delta sz/2 + Omega sx/2 + delta n, any Delta."""
    drive_frame = build_drive_frame_full(p, space)
    return rotate_into_frame(drive_frame, dressing_generator(p, space), name='interaction_detuned_full')


def build_effective_resonant(p: QubitParams, space: SpaceDescriptor) -> TimeDependentHamiltonian:
    """
    Conditional displacement (g/2)(|+><+| - |-><-|)(a^dag e^{i delta t} + a e^{-i delta t}).
    Static when delta = 0.
    """
    _require_levels(space, 2)
    _require_resonant(p)
    o = _qubit_ops(space)
    terms = _with_hc(p.g / 2 * o['sx'] @ o['ad'], p.delta, 'coupling')
    return TimeDependentHamiltonian(terms, space, name='effective')


def build_effective_detuned(p: QubitParams, space: SpaceDescriptor) -> TimeDependentHamiltonian:
    """
    Conditional displacement in the mixing-angle basis:
    (g Omega / 2 eps)(|+~><+~| - |-~><-~|)(a^dag e^{i delta t} + a e^{-i delta t}).
    """
    _require_levels(space, 2)
    basis = oracles.detuned_basis(p.Omega, p.Delta)
    z = np.outer(basis.plus_state, basis.plus_state.conj()) - np.outer(basis.minus_state, basis.minus_state.conj())
    ad = hilbert.creation(space).matrix
    scale = p.g * p.Omega / (2 * basis.epsilon)
    terms = _with_hc(scale * atom_operator(z, space).matrix @ ad, p.delta, 'coupling')
    return TimeDependentHamiltonian(terms, space, name='effective_detuned')


def build_deformation_hamiltonian(p: QubitParams, space: SpaceDescriptor) -> TimeDependentHamiltonian:
    """
    Drive-modulated remainder of the interaction picture (Delta = 0):
    (i g/2)[sy cos(Omega t) + sz sin(Omega t)](e^{i delta t} a^dag - e^{-i delta t} a).
    """
    _require_levels(space, 2)
    _require_resonant(p)
    o = _qubit_ops(space)
    # sy cos + sz sin = e^{i Omega t} A + e^{-i Omega t} A^dag
    A = (o['sy'] - 1j * o['sz']) / 2
    c = 1j * p.g / 2
    terms = [
        HamiltonianTerm(c * A @ o['ad'], p.Omega + p.delta, 'deformation'),
        HamiltonianTerm(-c * A @ o['a'], p.Omega - p.delta, 'deformation'),
        HamiltonianTerm(c * A.conj().T @ o['ad'], p.delta - p.Omega, 'deformation'),
        HamiltonianTerm(-c * A.conj().T @ o['a'], -p.Omega - p.delta, 'deformation'),
    ]
    return TimeDependentHamiltonian(terms, space, name='deformation')


def build_spurious_model(p: QubitParams, s: SpuriousDriveParams,
                         space: SpaceDescriptor) -> TimeDependentHamiltonian:
    """
    Lab model plus a direct resonator drive and its cancellation tone:
    [Omega' cos(omega_d t + phi') + Omega_c cos(omega_d t + phi_c)](a^dag + a).
    """
    lab = build_driven_qrm_lab(p, space)
    amp = (s.omega_prime * np.exp(1j * s.phi_prime) + s.omega_c * np.exp(1j * s.phi_c)) / 2
    if abs(amp) <= 1e-12 * max(s.omega_prime + s.omega_c, 1e-300):
        logger.debug("Cancellation tone removes the spurious resonator drive.")
        return TimeDependentHamiltonian(lab.terms, space, name='spurious', check=False)
    x = hilbert.annihilation(space).matrix
    x = x + x.conj().T
    extra = [HamiltonianTerm(amp * x, p.omega_d, 'spurious'),
             HamiltonianTerm(np.conj(amp) * x, -p.omega_d, 'spurious')]
    return TimeDependentHamiltonian(lab.terms + extra, space, name='spurious')


def inverse_capacitance_coupling(C) -> float:
    """
    Element (C^-1)_13 = (C12 C23 - C13 C22) / det C of a symmetric 3x3 capacitance matrix.
    """
    C = np.asarray(C, dtype=float)
    if C.shape != (3, 3):
        raise DomainError(f"capacitance matrix must be 3x3, got {C.shape}")
    if not np.allclose(C, C.T, rtol=0.0, atol=1e-12 * np.max(np.abs(C))):
        raise DomainError("capacitance matrix must be symmetric")
    det = np.linalg.det(C)
    if abs(det) <= 1e-12 * np.max(np.abs(C)) ** 3:
        raise DomainError("capacitance matrix is singular")
    return float((C[0, 1] * C[1, 2] - C[0, 2] * C[1, 1]) / det)


# --- Qutrit models ---

def _qutrit_ops(p: QutritParams, space: SpaceDescriptor) -> dict:
    _require_levels(space, 3)
    ops = {k: v.matrix for k, v in hilbert.atom_transition_ops(space, p.selection).items()}
    a = hilbert.annihilation(space).matrix
    ops.update(a=a, ad=a.conj().T, n=hilbert.number_operator(space).matrix)
    return ops


def build_qutrit_lab(p: QutritParams, space: SpaceDescriptor) -> TimeDependentHamiltonian:
    """
    Driven qutrit coupled to a resonator in the laboratory frame:
    H0 = omega_eg (|e><e| - |g><g|)/2 + tilde_omega_f |f><f|/2 + omega_r n,
    drive cos(omega_d t)[Omega1 (s1+ + s1-) + Omega2 (s2+ + s2-)],
    coupling [g1 (s1+ + s1-) + g2 (s2+ + s2-)](a^dag + a).
    """
    o = _qutrit_ops(p, space)
    atom = (p.omega_eg / 2 * (atom_unit(space, 1, 1) - atom_unit(space, 0, 0))
            + p.tilde_omega_f / 2 * atom_unit(space, 2, 2))
    x1 = o['s1p'] + o['s1m']
    x2 = o['s2p'] + o['s2m']
    drive = p.Omega1 / 2 * x1 + p.Omega2 / 2 * x2
    terms = [
        HamiltonianTerm(atom_operator(atom, space).matrix + p.omega_r * o['n'], 0.0, 'free'),
        HamiltonianTerm((p.g1 * x1 + p.g2 * x2) @ (o['a'] + o['ad']), 0.0, 'coupling'),
        HamiltonianTerm(drive, p.omega_d, 'drive'),
        HamiltonianTerm(drive, -p.omega_d, 'drive'),
    ]
    return TimeDependentHamiltonian(terms, space, name='qutrit_lab')


def build_qutrit_drive_frame_full(p: QutritParams, space: SpaceDescriptor,
                                  frame: str = 'bare_f') -> TimeDependentHamiltonian:
    """Qutrit lab model in a drive frame, all oscillating terms kept."""
    lab = build_qutrit_lab(p, space)
    return rotate_into_frame(lab, drive_frame_generator(p, space, frame), name=f'qutrit_drive_frame_{frame}')


def build_qutrit_rwa_harmonic(p: QutritParams, space: SpaceDescriptor) -> TimeDependentHamiltonian:
    """
    Harmonic-qutrit RWA model:
    Omega1 (s1+ + s1- + sqrt2 s2+ + sqrt2 s2-)/2 + delta n + g1 (s1+ + sqrt2 s2+) a + h.c.
    """
    require_harmonic(p)
    o = _qutrit_ops(p, space)
    r2 = np.sqrt(2.0)
    drive = p.Omega1 / 2 * (o['s1p'] + o['s1m'] + r2 * o['s2p'] + r2 * o['s2m'])
    coupling = p.g1 * (o['s1p'] + r2 * o['s2p']) @ o['a']
    terms = [
        HamiltonianTerm(drive, 0.0, 'drive'),
        HamiltonianTerm(p.delta * o['n'], 0.0, 'free'),
        HamiltonianTerm(coupling + coupling.conj().T, 0.0, 'coupling'),
    ]
    return TimeDependentHamiltonian(terms, space, name='qutrit_rwa')


def build_arbitrary_anharmonic(p: QutritParams, space: SpaceDescriptor) -> TimeDependentHamiltonian:
    """
    RWA model in the frame that treats both transitions alike:
    Delta1 (|e><e| - |g><g|)/2 + Sigma |f><f|/2 + delta n
      + Omega1 (s1+ + s1-)/2 + Omega2 (s2+ + s2-)/2 + (g1 s1+ + g2 s2+) a + h.c.
    """
    require_coupling_ratio(p)
    o = _qutrit_ops(p, space)
    atom = p.Delta1 / 2 * (atom_unit(space, 1, 1) - atom_unit(space, 0, 0)) + p.Sigma / 2 * atom_unit(space, 2, 2)
    coupling = (p.g1 * o['s1p'] + p.g2 * o['s2p']) @ o['a']
    terms = [
        HamiltonianTerm(atom_operator(atom, space).matrix + p.delta * o['n'], 0.0, 'free'),
        HamiltonianTerm(p.Omega1 / 2 * (o['s1p'] + o['s1m']) + p.Omega2 / 2 * (o['s2p'] + o['s2m']), 0.0, 'drive'),
        HamiltonianTerm(coupling + coupling.conj().T, 0.0, 'coupling'),
    ]
    return TimeDependentHamiltonian(terms, space, name='arbitrary_anharmonic')


# --- Decoherence ---

def build_collapse_channels(space: SpaceDescriptor, d: DecoherenceParams, selection: str = 'cascade') -> list:
    """
    Zero-temperature dissipators: relaxation of each transition, pure dephasing
    (sz, or sz + 2|f><f| for a qutrit, at rate gamma_phi/2) and photon loss.
    Channels with zero rate are omitted.
    Args:
        space: Composite space.
        d: Decoherence rates (1/s).
        selection: Qutrit selection rule. gamma1 and gamma2 relax the first and
            second allowed transitions, so a lambda atom decays from f into both g and e.
    """
    channels = []
    if space.atom_levels == 2:
        ops = hilbert.atom_transition_ops(space, 'cascade')
        candidates = [('relaxation', ops['sm'], d.gamma1),
                      ('dephasing', hilbert.sigma_z(space), d.gamma_phi / 2)]
    else:
        ops = hilbert.atom_transition_ops(space, selection)
        dephasing = atom_operator(np.diag([-1.0, 1.0, 2.0]), space)
        candidates = [('relaxation_1', ops['s1m'], d.gamma1),
                      ('relaxation_2', ops['s2m'], d.resolved_gamma2),
                      ('dephasing', dephasing, d.gamma_phi / 2)]
    candidates.append(('photon_loss', hilbert.annihilation(space), d.kappa))
    for label, op, rate in candidates:
        if rate > 0:
            channels.append(CollapseChannel(op, rate, label))
    return channels


# --- Validity report ---

@dataclass(frozen=True)
class ValidityEntry:
    name: str
    condition: str
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else float('inf')
        return abs(self.lhs) / abs(self.rhs)

    @property
    def verdict(self) -> str:
        r = self.ratio
        if r <= PASS_RATIO:
            return 'pass'
        if r <= MARGINAL_RATIO:
            return 'marginal'
        return 'fail'

    def message(self) -> str:
        return (f"{self.name} violated: {self.condition} "
                f"(lhs/rhs = {self.ratio:.4g}, verdict {self.verdict})")


@dataclass
class ValidityReport:
    entries: list = field(default_factory=list)
    regime_flags: dict = field(default_factory=dict)

    def add(self, name: str, condition: str, lhs: float, rhs: float):
        self.entries.append(ValidityEntry(name, condition, float(lhs), float(rhs)))

    def failures(self) -> list:
        return [e for e in self.entries if e.verdict == 'fail']

    def marginals(self) -> list:
        return [e for e in self.entries if e.verdict == 'marginal']

    @property
    def worst(self) -> str:
        verdicts = {e.verdict for e in self.entries}
        for level in ('fail', 'marginal'):
            if level in verdicts:
                return level
        return 'pass'

    def entry(self, name: str) -> ValidityEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{
            'name': e.name, 'condition': e.condition, 'lhs': e.lhs, 'rhs': e.rhs,
            'ratio': e.ratio, 'verdict': e.verdict,
        } for e in self.entries])


def check_rwa_report(p) -> ValidityReport:
    """
    Ratios lhs/rhs for every approximation inequality that applies to a parameter set.
    Args:
        p: QubitParams or QutritParams.
    Returns:
        ValidityReport with a pass / marginal / fail verdict per inequality.
    """
    report = ValidityReport()
    if isinstance(p, QubitParams):
        report.add('near resonance', '|omega_q - omega_r| << omega_q + omega_r',
                   abs(p.omega_q - p.omega_r), p.omega_q + p.omega_r)
        report.add('weak coupling', 'g << min(omega_q, omega_r)', p.g, min(p.omega_q, p.omega_r))
        report.add('interaction RWA', 'g << 2 omega_d', p.g, 2 * p.omega_d)
        report.add('drive RWA', 'Omega << 4 omega_d', p.Omega, 4 * p.omega_d)
        if p.Delta == 0:
            report.add('strong driving (coupling)', 'g << Omega  (g, |delta| << Omega << 4 omega_d)', p.g, p.Omega)
            report.add('strong driving (detuning)', '|delta| << Omega  (g, |delta| << Omega << 4 omega_d)',
                       abs(p.delta), p.Omega)
            report.add('strong driving (upper)', 'Omega << 4 omega_d  (g, |delta| << Omega << 4 omega_d)',
                       p.Omega, 4 * p.omega_d)
            deform = report.entry('strong driving (coupling)').verdict != 'pass'
        else:
            eps = p.epsilon
            report.add('strong driving-detuning (coupling)', 'g << eps  (g, |delta| << eps << 4 omega_d)', p.g, eps)
            report.add('strong driving-detuning (detuning)', '|delta| << eps  (g, |delta| << eps << 4 omega_d)',
                       abs(p.delta), eps)
            report.add('strong driving-detuning (upper)', 'eps << 4 omega_d  (g, |delta| << eps << 4 omega_d)',
                       eps, 4 * p.omega_d)
            deform = report.entry('strong driving-detuning (coupling)').verdict != 'pass'
        report.regime_flags['deformed_cat'] = deform
        return report

    report.add('near resonance (g-e)', '|omega_eg - omega_r| << omega_eg + omega_r',
               abs(p.omega_eg - p.omega_r), p.omega_eg + p.omega_r)
    report.add('weak coupling (g-e)', 'g1 << min(omega_eg, omega_r)', p.g1, min(p.omega_eg, p.omega_r))
    report.add('interaction RWA (g-e)', 'g1 << 2 omega_d', p.g1, 2 * p.omega_d)
    report.add('drive RWA (g-e)', 'Omega1 << 4 omega_d', p.Omega1, 4 * p.omega_d)
    report.add('near resonance (e-f)', '|omega_fe - omega_r| << omega_fe + omega_r',
               abs(p.omega_fe - p.omega_r), p.omega_fe + p.omega_r)
    report.add('weak coupling (e-f)', 'g2 << min(omega_fe, omega_r)', p.g2, min(p.omega_fe, p.omega_r))
    report.add('interaction RWA (e-f)', 'g2 << 2 omega_d', p.g2, 2 * p.omega_d)
    report.add('drive RWA (e-f)', 'Omega2 << 4 omega_d', p.Omega2, 4 * p.omega_d)
    report.add('strong driving (coupling)', 'g1 << Omega1  (g1, |delta| << Omega1 << 4 omega_d / sqrt2)',
               p.g1, p.Omega1)
    report.add('strong driving (detuning)', '|delta| << Omega1  (g1, |delta| << Omega1 << 4 omega_d / sqrt2)',
               abs(p.delta), p.Omega1)
    report.add('strong driving (upper)', 'sqrt2 Omega1 << 4 omega_d', np.sqrt(2.0) * p.Omega1, 4 * p.omega_d)
    report.regime_flags['deformed_cat'] = report.entry('strong driving (coupling)').verdict != 'pass'

    try:
        basis = oracles.cubic_dressed_eigs(p.Omega1, p.Omega2, p.Sigma)
    except DomainError:
        basis = None
    if basis is not None:
        lam = basis.eigenvalues
        gap = min(abs(lam[0] - lam[1]), abs(lam[1] - lam[2]), abs(lam[0] - lam[2]))
        cond = 'g1, g2, |delta| << min |lambda_k - lambda_l|'
        report.add('strong driving-anharmonicity (g1)', cond, p.g1, gap)
        report.add('strong driving-anharmonicity (g2)', cond, p.g2, gap)
        report.add('strong driving-anharmonicity (delta)', cond, abs(p.delta), gap)
    return report
