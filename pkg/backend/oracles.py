"""
Closed-form predictions used to validate the simulations: cat amplitudes,
dressed bases, analytic interaction-picture states and size envelopes.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import hilbert
from .errors import DomainError
from .hilbert import QuantumState, SpaceDescriptor

logger = logging.getLogger(__name__)

SERIES_THRESHOLD = 1e-6
QCMAP_SLOPE = 7.5


@dataclass(frozen=True)
class DressedQubitBasis:
    theta: float
    plus_state: np.ndarray
    minus_state: np.ndarray
    epsilon: float


@dataclass(frozen=True)
class QutritDressedBasis:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    normalizers: np.ndarray
    labels: tuple = ('v1', 'v2', 'v3')
    coefficients: dict = field(default_factory=dict)

    def vector(self, label: str) -> np.ndarray:
        return self.eigenvectors[:, self.labels.index(label)]


# --- Amplitudes ---

def alpha_resonant(t: float, g: float, delta: float = 0.0) -> complex:
    """
    alpha = -g (e^{i delta t} - 1) / (2 delta); -i g t / 2 when delta -> 0.
    """
    x = delta * t
    if abs(x) < SERIES_THRESHOLD:
        # (e^{ix} - 1)/x = i - x/2 - i x^2/6 + ...
        return complex(-g * t / 2 * (1j - x / 2 - 1j * x * x / 6))
    return complex(-g * (np.exp(1j * x) - 1.0) / (2 * delta))


def alpha_detuned(t: float, g: float, Omega: float, Delta: float, delta: float = 0.0) -> complex:
    """Detuned amplitude, scaled by Omega/eps relative to the resonant one."""
    eps = np.hypot(Omega, Delta)
    if eps == 0:
        raise DomainError("detuned amplitude needs Omega and Delta not both zero")
    return Omega / eps * alpha_resonant(t, g, delta)


def alpha_qutrit(t: float, g1: float, delta: float = 0.0) -> complex:
    """Harmonic-qutrit amplitude, -i sqrt3 g1 t / 2 at delta = 0."""
    return np.sqrt(3.0) * alpha_resonant(t, g1, delta)


def alpha_effective(t: float, g_eff: float, delta: float = 0.0) -> complex:
    """
    Amplitude for a branch driven by g_eff |v><v| (a + a^dag), -i g_eff t at delta = 0.
    g_eff is a matrix element of the full coupling, so there is no factor 1/2.
    """
    return 2.0 * alpha_resonant(t, g_eff, delta)


# --- Dressed bases ---

def detuned_basis(Omega: float, Delta: float) -> DressedQubitBasis:
    """
    Eigenbasis of Delta sz/2 + Omega sx/2 with mixing angle theta = arctan(Omega/Delta):
    |+~> = sin(theta/2)|g> + cos(theta/2)|e>, |-~> = cos(theta/2)|g> - sin(theta/2)|e>.
    """
    eps = float(np.hypot(Omega, Delta))
    if eps == 0:
        raise DomainError("mixing angle undefined for Omega = Delta = 0")
    theta = float(np.arctan2(Omega, Delta))
    s, c = np.sin(theta / 2), np.cos(theta / 2)
    return DressedQubitBasis(theta, np.array([s, c], dtype=complex), np.array([c, -s], dtype=complex), eps)


def qutrit_dark_basis(Omega1: float = 1.0) -> QutritDressedBasis:
    """
    Harmonic-qutrit drive eigenbasis: the dark state v0 (eigenvalue 0) and v+- (+-sqrt3 Omega1/2).
    """
    r2, r3 = np.sqrt(2.0), np.sqrt(3.0)
    v0 = np.array([-r2, 0.0, 1.0]) / r3
    vp = np.array([1 / r2, np.sqrt(1.5), 1.0]) / r3
    vm = np.array([1 / r2, -np.sqrt(1.5), 1.0]) / r3
    return QutritDressedBasis(
        eigenvalues=np.array([0.0, r3 * Omega1 / 2, -r3 * Omega1 / 2]),
        eigenvectors=np.column_stack([v0, vp, vm]).astype(complex),
        normalizers=np.ones(3),
        labels=('v0', 'vplus', 'vminus'),
    )


def qutrit_drive_matrix(Omega1: float, Omega2: float, Sigma: float = 0.0) -> np.ndarray:
    """Sigma |f><f|/2 + Omega1 (s1+ + s1-)/2 + Omega2 (s2+ + s2-)/2 for a cascade qutrit."""
    return np.array([[0.0, Omega1 / 2, 0.0],
                     [Omega1 / 2, 0.0, Omega2 / 2],
                     [0.0, Omega2 / 2, Sigma / 2]])


def cubic_dressed_eigs(Omega1: float, Omega2: float, Sigma: float) -> QutritDressedBasis:
    """
    Trigonometric eigensystem of the qutrit drive matrix. The eigenvalues solve
    lambda^3 + a lambda^2 + b lambda + c = 0 with a = -Sigma/2,
    b = -(Omega1^2 + Omega2^2)/4 and c = Sigma Omega1^2 / 8.
    Eigenvectors are (Omega1 (l - Sigma/2), 2 l (l - Sigma/2), l Omega2) / N_k.
    Args:
        Omega1, Omega2: Drive strengths of the two transitions (rad/s).
        Sigma: |f> frame energy (rad/s).
    Returns:
        QutritDressedBasis sorted by descending eigenvalue.
    """
    a = -Sigma / 2
    b = -(Omega1 ** 2 + Omega2 ** 2) / 4
    c = Sigma * Omega1 ** 2 / 8
    p = np.sqrt(max(a * a - 3 * b, 0.0))
    scale = max(abs(Omega1), abs(Omega2), abs(Sigma))
    if scale == 0 or p <= 1e-12 * scale:
        raise DomainError("qutrit drive matrix is triply degenerate (p = 0)")
    cos_theta = -(27 * c + 2 * a ** 3 - 9 * a * b) / (2 * p ** 3)
    if abs(cos_theta) > 1 + 1e-9:
        raise DomainError(f"cos(theta) = {cos_theta:.12g} outside [-1, 1]")
    theta = np.arccos(np.clip(cos_theta, -1.0, 1.0))

    lam = np.array([
        -a / 3 + 2 * p / 3 * np.cos(theta / 3),
        -a / 3 - 2 * p / 3 * np.cos(theta / 3 + np.pi / 3),
        -a / 3 - 2 * p / 3 * np.cos(theta / 3 - np.pi / 3),
    ])

    h = qutrit_drive_matrix(Omega1, Omega2, Sigma)
    vectors = np.zeros((3, 3))
    norms = np.zeros(3)
    for k, l in enumerate(lam):
        shifted = l - Sigma / 2
        raw = np.array([Omega1 * shifted, 2 * l * shifted, l * Omega2])
        norms[k] = np.sqrt(l ** 2 * Omega2 ** 2 + (4 * l ** 2 + Omega1 ** 2) * shifted ** 2)
        if norms[k] > 1e-9 * scale ** 2:
            vectors[:, k] = raw / norms[k]
        else:
            # closed form collapses (e.g. a dark state at Sigma = 0); take the null vector
            _, _, vh = np.linalg.svd(h - l * np.eye(3))
            v = vh[-1]
            vectors[:, k] = v * np.sign(v[np.argmax(np.abs(v))])
            logger.debug("Normalizer N_%d vanishes; using the numerical null vector.", k + 1)

    return QutritDressedBasis(
        eigenvalues=lam,
        eigenvectors=vectors.astype(complex),
        normalizers=norms,
        labels=('v1', 'v2', 'v3'),
        coefficients={'a': a, 'b': b, 'c': c, 'p': p, 'theta': float(theta)},
    )


def effective_couplings(basis: QutritDressedBasis, g1: float, g2: float,
                        Omega1: float, Omega2: float, Sigma: float) -> np.ndarray:
    """
    Conditional displacement rates g~_k = <v_k|(g1 s1+ + g2 s2+)|v_k>, i.e.
    2 l (l - Sigma/2)(g1 Omega1 (l - Sigma/2) + g2 l Omega2) / N_k^2.
    """
    out = np.zeros(3)
    scale = max(abs(Omega1), abs(Omega2), abs(Sigma), 1e-300)
    for k, l in enumerate(basis.eigenvalues):
        n_k = basis.normalizers[k]
        if n_k > 1e-9 * scale ** 2:
            shifted = l - Sigma / 2
            out[k] = 2 * l * shifted * (g1 * Omega1 * shifted + g2 * l * Omega2) / n_k ** 2
        else:
            v = np.real(basis.eigenvectors[:, k])
            if not np.any(v):
                raise DomainError(f"normalizer N_{k + 1} vanishes and no eigenvector is available")
            out[k] = g1 * v[1] * v[0] + g2 * v[2] * v[1]
    return out


# --- Analytic states ---

@dataclass(frozen=True)
class CatRecipe:
    """
    Which analytic state to build. `params` is a QubitParams or QutritParams;
    `coefficients` holds (c_g, c_e) for the encode recipes and (c1, c2, c3)
    for the arbitrary-anharmonicity recipe.
    """
    kind: str
    params: object
    coefficients: tuple = ()


RECIPES = ('qubit_resonant', 'qubit_detuned', 'qubit_encode',
           'qutrit_from_g0', 'qutrit_from_e0', 'qutrit_encode', 'arbitrary_anharmonic')


def _unit(coefficients, size: int) -> np.ndarray:
    c = np.asarray(coefficients, dtype=complex)
    if c.shape != (size,):
        raise DomainError(f"recipe needs {size} coefficients, got {len(c)}")
    norm = np.linalg.norm(c)
    if norm == 0:
        raise DomainError("recipe coefficients are all zero")
    return c / norm


def _branches(atom_vectors, coefficients, alphas, space: SpaceDescriptor) -> QuantumState:
    psi = np.zeros(space.dim, dtype=complex)
    for vec, coef, alpha in zip(atom_vectors, coefficients, alphas):
        psi += coef * np.kron(vec, hilbert.coherent_vector(alpha, space.fock_cutoff))
    return hilbert.ket(psi, space)


def analytic_state(recipe: CatRecipe, t: float, space: SpaceDescriptor) -> QuantumState:
    """
    Interaction-picture joint state predicted by the conditional-displacement model.
    Args:
        recipe: CatRecipe naming the preparation.
        t: Evolution time (s).
        space: Composite space with the matching atom.
    Returns:
        The normalized joint QuantumState.
    """
    p = recipe.params
    kind = recipe.kind
    if kind not in RECIPES:
        raise DomainError(f"unknown recipe '{kind}'")

    if kind.startswith('qubit'):
        if space.atom_levels != 2:
            raise DomainError(f"recipe '{kind}' needs a qubit space")
        if kind == 'qubit_detuned':
            basis = detuned_basis(p.Omega, p.Delta)
            alpha = alpha_detuned(t, p.g, p.Omega, p.Delta, p.delta)
            s, c = np.sin(basis.theta / 2), np.cos(basis.theta / 2)
            return _branches([basis.plus_state, basis.minus_state], [s, c], [alpha, -alpha], space)
        plus = np.array([1, 1], dtype=complex) / np.sqrt(2.0)
        minus = np.array([1, -1], dtype=complex) / np.sqrt(2.0)
        alpha = alpha_resonant(t, p.g, p.delta)
        coefs = np.array([1, 1]) / np.sqrt(2.0) if kind == 'qubit_resonant' else _unit(recipe.coefficients, 2)
        return _branches([plus, minus], coefs, [alpha, -alpha], space)

    if space.atom_levels != 3:
        raise DomainError(f"recipe '{kind}' needs a qutrit space")

    if kind == 'arbitrary_anharmonic':
        basis = cubic_dressed_eigs(p.Omega1, p.Omega2, p.Sigma)
        rates = effective_couplings(basis, p.g1, p.g2, p.Omega1, p.Omega2, p.Sigma)
        alphas = [alpha_effective(t, rate, p.delta) for rate in rates]
        vecs = [basis.eigenvectors[:, k] for k in range(3)]
        return _branches(vecs, _unit(recipe.coefficients, 3), alphas, space)

    basis = qutrit_dark_basis(p.Omega1)
    v0, vp, vm = (basis.vector(label) for label in basis.labels)
    alpha = alpha_qutrit(t, p.g1, p.delta)
    if kind == 'qutrit_from_g0':
        coefs = [-np.sqrt(2.0 / 3.0), 1 / np.sqrt(6.0), 1 / np.sqrt(6.0)]
        return _branches([v0, vp, vm], coefs, [0.0, alpha, -alpha], space)
    if kind == 'qutrit_from_e0':
        return _branches([vp, vm], [1 / np.sqrt(2.0), -1 / np.sqrt(2.0)], [alpha, -alpha], space)
    return _branches([vp, vm], _unit(recipe.coefficients, 2), [alpha, -alpha], space)


def cat_vector(alpha: complex, parity: str, fock_cutoff: int) -> np.ndarray:
    """(|alpha> +- |-alpha>) / sqrt(2 (1 +- e^{-2|alpha|^2}))."""
    sign = {'even': 1.0, 'odd': -1.0}[parity]
    norm2 = 2 * (1 + sign * np.exp(-2 * abs(alpha) ** 2))
    if norm2 <= 1e-12:
        raise DomainError("odd cat is undefined at alpha = 0")
    vec = hilbert.coherent_vector(alpha, fock_cutoff) + sign * hilbert.coherent_vector(-alpha, fock_cutoff)
    return vec / np.sqrt(norm2)


def cat_state(alpha: complex, parity: str, space: SpaceDescriptor) -> QuantumState:
    """Even or odd cat on a resonator-only space."""
    return hilbert.ket(cat_vector(alpha, parity, space.fock_cutoff), space)


# --- Envelopes and comparisons ---

def photon_envelope(t: float, g: float, Omega: float, Delta: float, kappa: float) -> float:
    """|alpha|^2 = g^2 Omega^2 t^2 e^{-kappa t} / (4 eps^2)."""
    eps2 = Omega ** 2 + Delta ** 2
    if eps2 == 0:
        return 0.0
    return float(g ** 2 * Omega ** 2 * t ** 2 * np.exp(-kappa * t) / (4 * eps2))


def damped_photon_number(t: float, g: float, Omega: float, Delta: float, kappa: float) -> float:
    """
    <n> of a conditional displacement with photon loss only:
    (Omega/eps)^2 (g/kappa)^2 (1 - e^{-kappa t/2})^2, saturating at (Omega g / eps kappa)^2.
    photon_envelope is a lower bound that agrees with it while kappa t << 1.
    """
    eps2 = Omega ** 2 + Delta ** 2
    if eps2 == 0:
        return 0.0
    if kappa == 0:
        return photon_envelope(t, g, Omega, Delta, 0.0)
    return float(Omega ** 2 / eps2 * (g * np.expm1(-kappa * t / 2) / kappa) ** 2)


def envelope_peak_time(kappa: float) -> float:
    """t_max = 2/kappa; infinite for a lossless resonator."""
    return float('inf') if kappa == 0 else 2.0 / kappa


def photon_envelope_peak(g: float, Omega: float, Delta: float, kappa: float) -> tuple:
    t_max = envelope_peak_time(kappa)
    if np.isinf(t_max):
        return t_max, float('inf')
    return t_max, photon_envelope(t_max, g, Omega, Delta, kappa)


def qcmap_cat_size(chi: float, t: float) -> float:
    """(15/2)(chi t - pi), clamped to zero before the onset chi t = pi."""
    return max(0.0, QCMAP_SLOPE * (chi * t - np.pi))


def qcmap_crossover_time(g: float, chi: float) -> float:
    """
    Time after which g^2 t^2 / 4 stays above the qcMAP size. Zero when it never drops below.
    """
    if g <= 0 or chi <= 0:
        raise DomainError("crossover needs positive g and chi")

    def gap(t):
        return g ** 2 * t ** 2 / 4 - qcmap_cat_size(chi, t)

    t_vertex = max(2 * QCMAP_SLOPE * chi / g ** 2, np.pi / chi)
    if gap(t_vertex) >= 0:
        return 0.0
    t_high = 4 * QCMAP_SLOPE * chi / g ** 2
    while gap(t_high) <= 0:
        t_high *= 2
    return float(brentq(gap, t_vertex, t_high, xtol=1e-15, rtol=1e-12))
