"""
Observables, projective atom measurement, Wigner functions, fidelity and cat
diagnostics.

Wigner convention: W(alpha) = (1/pi) Tr(rho D(2 alpha) e^{i pi n}), range
[-1/pi, 1/pi]. This is half the usual (2/pi) normalisation, so a pure state
integrates to 1/2 over the plane.
"""
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.linalg import eigh
from scipy.special import eval_genlaguerre, gammaln

from . import hilbert
from .errors import CutoffError, DomainError, NumericalGuardError
from .hilbert import Operator, QuantumState

logger = logging.getLogger(__name__)

WIGNER_SCALE = 1.0 / np.pi
DEFAULT_GRID_POINTS = 161
GRID_MARGIN = 1.25
NO_OUTCOME_PROBABILITY = 1e-12


@dataclass(frozen=True)
class WignerGrid:
    re_axis: np.ndarray
    im_axis: np.ndarray
    values: np.ndarray  # rows follow im_axis, columns follow re_axis
    convention_scale: float = WIGNER_SCALE

    def __post_init__(self):
        for name in ('re_axis', 'im_axis'):
            axis = np.asarray(getattr(self, name), dtype=float)
            if len(axis) > 2 and not np.allclose(np.diff(axis), axis[1] - axis[0], rtol=1e-9, atol=0):
                raise DomainError(f"{name} is not uniformly spaced")
        if np.shape(self.values) != (len(self.im_axis), len(self.re_axis)):
            raise DomainError(f"values shape {np.shape(self.values)} does not match the axes")
        peak = float(np.max(np.abs(self.values)))
        if peak > WIGNER_SCALE + 1e-6:
            logger.warning("Wigner values reach %.6f, beyond the 1/pi bound", peak)

    def value_at_origin(self) -> float:
        i = int(np.argmin(np.abs(self.im_axis)))
        j = int(np.argmin(np.abs(self.re_axis)))
        return float(self.values[i, j])


@dataclass(frozen=True)
class MeasurementOutcome:
    probability: float
    conditional_state: QuantumState
    label: str = ''


# --- Observables ---

def expectation(op: Operator, state: QuantumState) -> complex:
    """Tr(O rho) or <psi|O|psi>."""
    if op.space != state.space:
        raise DomainError(f"operator space {op.space} does not match state space {state.space}")
    if state.is_pure:
        return complex(np.vdot(state.data, op.matrix @ state.data))
    return complex(np.trace(op.matrix @ state.data))


def reduced_resonator_state(state: QuantumState) -> QuantumState:
    """Partial trace over the atom."""
    space = state.space
    if space.is_resonator_only:
        return state
    levels, n = space.atom_levels, space.fock_cutoff
    if state.is_pure:
        amps = state.data.reshape(levels, n)
        rho = amps.T @ amps.conj()
    else:
        rho = np.einsum('injm,ij->nm', state.data.reshape(levels, n, levels, n), np.eye(levels))
    return hilbert.QuantumState('mixed', (rho + rho.conj().T) / 2, hilbert.resonator_only(n), validate=False)


def atom_populations(state: QuantumState) -> dict:
    if state.space.is_resonator_only:
        raise DomainError("atom populations need a composite state")
    levels, n = state.space.atom_levels, state.space.fock_cutoff
    if state.is_pure:
        pops = np.sum(np.abs(state.data.reshape(levels, n)) ** 2, axis=1)
    else:
        pops = np.sum(np.real(np.diag(state.data)).reshape(levels, n), axis=1)
    return {name: float(pops[i]) for name, i in hilbert.LEVEL_INDEX.items() if i < levels}


def _atom_vector(atom_state, levels: int) -> tuple:
    if isinstance(atom_state, str):
        label = atom_state
        vec = np.zeros(levels, dtype=complex)
        if label in hilbert.LEVEL_INDEX:
            idx = hilbert.LEVEL_INDEX[label]
            if idx >= levels:
                raise DomainError(f"level '{label}' does not exist on a {levels}-level atom")
            vec[idx] = 1.0
        elif label in ('+', '-'):
            vec[0] = 1 / np.sqrt(2)
            vec[1] = (1 if label == '+' else -1) / np.sqrt(2)
        else:
            raise DomainError(f"unknown atom basis label '{label}'")
        return vec, label
    vec = np.asarray(atom_state, dtype=complex)
    if vec.shape != (levels,):
        raise DomainError(f"atom vector has shape {vec.shape}, expected ({levels},)")
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise DomainError("atom vector is zero")
    return vec / norm, 'custom'


def project_atom(joint: QuantumState, atom_state) -> MeasurementOutcome:
    """
    Projects the atom onto a basis state and returns the renormalized resonator state.
    Args:
        joint: State on a composite space.
        atom_state: 'g', 'e', 'f', '+', '-' or an atom vector.
    Returns:
        MeasurementOutcome with the branch probability.
    """
    space = joint.space
    if space.is_resonator_only:
        raise DomainError("project_atom needs a composite atom-resonator state")
    vec, label = _atom_vector(atom_state, space.atom_levels)
    levels, n = space.atom_levels, space.fock_cutoff
    target = hilbert.resonator_only(n)

    if joint.is_pure:
        branch = vec.conj() @ joint.data.reshape(levels, n)
        prob = float(np.vdot(branch, branch).real)
        if prob < NO_OUTCOME_PROBABILITY:
            raise NumericalGuardError(f"measurement outcome '{label}' has probability {prob:.2e}")
        conditional = hilbert.QuantumState('pure', branch / np.sqrt(prob), target, validate=False)
    else:
        block = np.einsum('i,injm,j->nm', vec.conj(), joint.data.reshape(levels, n, levels, n), vec)
        prob = float(np.trace(block).real)
        if prob < NO_OUTCOME_PROBABILITY:
            raise NumericalGuardError(f"measurement outcome '{label}' has probability {prob:.2e}")
        block = (block + block.conj().T) / (2 * prob)
        conditional = hilbert.QuantumState('mixed', block, target, validate=False)
    return MeasurementOutcome(probability=prob, conditional_state=conditional, label=label)


# --- Phase space ---

def parity(rho_r: QuantumState) -> float:
    """Re Tr(rho e^{i pi n}); composite states are reduced first."""
    rho_r = reduced_resonator_state(rho_r)
    pops = hilbert.fock_populations(rho_r)
    return float(np.sum(pops * (-1.0) ** np.arange(len(pops))))


def default_grid(alpha_max: complex, points: int = DEFAULT_GRID_POINTS) -> tuple:
    """Square grid over [-1.25|alpha_max|, 1.25|alpha_max|]^2."""
    if int(points) != points or points < 2:
        raise DomainError(f"grid needs at least 2 points per axis, got {points}")
    extent = GRID_MARGIN * abs(alpha_max)
    if extent == 0:
        extent = GRID_MARGIN
    axis = np.linspace(-extent, extent, int(points))
    return axis, axis.copy()


def _displaced_parity(rho: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    """
    (1/pi) Tr(rho D(2 alpha) P) at every alpha, from the closed-form Fock matrix
    elements <n+k|D(beta)|n> = sqrt(n!/(n+k)!) beta^k e^{-|beta|^2/2} L_n^(k)(|beta|^2).
    """
    n_fock = rho.shape[0]
    beta = 2.0 * alphas
    x = np.abs(beta) ** 2
    log_x = np.log(np.maximum(x, 1e-300))
    phase = np.exp(1j * np.angle(beta))
    total = np.zeros(alphas.shape, dtype=float)
    for k in range(n_fock):
        n = np.arange(n_fock - k)
        coeff = ((-1.0) ** n) * np.diagonal(rho, offset=k)  # rho[n, n+k]
        log_mag = (0.5 * (gammaln(n + 1) - gammaln(n + k + 1)))[:, None] - x / 2 + 0.5 * k * log_x
        lag = eval_genlaguerre(n[:, None], k, x[None, :])
        partial = coeff @ (np.exp(log_mag) * lag)
        if k == 0:
            total += partial.real
        else:
            total += 2.0 * np.real(phase ** k * partial)
    return total / np.pi


def wigner(rho_r: QuantumState, re_axis=None, im_axis=None, points: int = DEFAULT_GRID_POINTS,
           alpha_max: complex = None) -> WignerGrid:
    """
    Evaluates the Wigner function on a rectangular grid.
    Args:
        rho_r: Resonator state (composite states are reduced first).
        re_axis, im_axis: Grid axes; default_grid(alpha_max, points) when omitted.
        points: Points per axis for the default grid.
        alpha_max: Largest expected lobe amplitude; defaults to sqrt(<n>).
    Returns:
        WignerGrid in the 1/pi convention.
    """
    rho_r = reduced_resonator_state(rho_r)
    n_fock = rho_r.space.fock_cutoff
    if re_axis is None or im_axis is None:
        if alpha_max is None:
            pops = hilbert.fock_populations(rho_r)
            alpha_max = np.sqrt(float(pops @ np.arange(n_fock)))
        re_axis, im_axis = default_grid(alpha_max, points)
    re_axis = np.asarray(re_axis, dtype=float)
    im_axis = np.asarray(im_axis, dtype=float)
    reach = max(np.max(np.abs(re_axis)), np.max(np.abs(im_axis)))
    if reach ** 2 > n_fock:
        raise CutoffError(f"grid edge |alpha| = {reach:.3g} lies beyond the Fock cutoff {n_fock}")

    alphas = (re_axis[None, :] + 1j * im_axis[:, None]).ravel()
    values = _displaced_parity(rho_r.to_density(), alphas).reshape(len(im_axis), len(re_axis))
    return WignerGrid(re_axis=re_axis, im_axis=im_axis, values=values)


def wigner_point(rho_r: QuantumState, alpha: complex) -> float:
    rho_r = reduced_resonator_state(rho_r)
    return float(_displaced_parity(rho_r.to_density(), np.array([complex(alpha)]))[0])


def wigner_integral(grid: WignerGrid) -> float:
    """Riemann sum of W over the grid with the d^2 alpha weight; 1/2 for a captured pure state."""
    d_re = grid.re_axis[1] - grid.re_axis[0]
    d_im = grid.im_axis[1] - grid.im_axis[0]
    return float(np.sum(grid.values) * d_re * d_im)


# --- State comparison ---

def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    w, v = eigh(rho)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a)))^2."""
    if a.space != b.space:
        raise DomainError(f"cannot compare states on {a.space} and {b.space}")
    if a.is_pure and b.is_pure:
        f = abs(np.vdot(a.data, b.data)) ** 2
    elif a.is_pure:
        f = np.real(np.vdot(a.data, b.data @ a.data))
    elif b.is_pure:
        f = np.real(np.vdot(b.data, a.data @ b.data))
    else:
        root = _sqrtm_psd(a.data)
        inner = root @ b.data @ root
        w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
        f = np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2
    return float(np.clip(f, 0.0, 1.0))


def cat_lobe_weights(rho_r: QuantumState, alpha_ref: complex) -> tuple:
    """
    Lobe weights <+-alpha|rho|+-alpha> and the coherence <alpha|rho|-alpha>.
    Returns:
        (w_plus, w_minus, cross)
    """
    rho_r = reduced_resonator_state(rho_r)
    if abs(alpha_ref) <= 1.0:
        logger.warning("cat_lobe_weights: |alpha_ref| = %.3f <= 1, lobes are not quasi-orthogonal", abs(alpha_ref))
    n_fock = rho_r.space.fock_cutoff
    plus = hilbert.coherent_vector(alpha_ref, n_fock)
    minus = hilbert.coherent_vector(-alpha_ref, n_fock)
    rho = rho_r.to_density()
    w_plus = float(np.real(np.vdot(plus, rho @ plus)))
    w_minus = float(np.real(np.vdot(minus, rho @ minus)))
    cross = complex(np.vdot(plus, rho @ minus))
    return w_plus, w_minus, cross


# --- Trajectory summaries ---

def summarize_trajectory(traj, tail_fraction: float = 0.2) -> (dict, dict):
    """
    Condenses a trajectory into the headline numbers of a run.
    Args:
        traj: dynamics.Trajectory.
        tail_fraction: Share of the run (by time) averaged for the saturated populations.
    Returns:
        A tuple containing:
        - A summary dictionary (tail-averaged populations, peak photon number and its time, final purity).
        - A log dictionary describing what was averaged.
    """
    log = {}
    summary = {}

    df = traj.to_frame()
    t_end = df['t_s'].iloc[-1]
    tail = df[df['t_s'] >= (1.0 - tail_fraction) * t_end]
    log['samples'] = len(df)
    log['tail_samples'] = len(tail)

    for col in ('P_g', 'P_e', 'P_f'):
        if col in df:
            summary[f'{col}_tail_mean'] = float(tail[col].mean())
            summary[f'{col}_mean'] = float(df[col].mean())

    peak = df['n_phot'].idxmax()
    summary['n_phot_peak'] = float(df.loc[peak, 'n_phot'])
    summary['t_peak'] = float(df.loc[peak, 't_s'])
    summary['n_phot_final'] = float(df['n_phot'].iloc[-1])
    summary['final_purity'] = float(df['purity'].iloc[-1])

    if summary['t_peak'] == t_end:
        log['peak_at_end'] = True

    return summary, log


def fit_quadratic_growth(times, n_phot, g: float, window: tuple = None) -> float:
    """Relative RMS deviation of <n>(t) from g^2 t^2 / 4, optionally within window=(t_min, t_max)."""
    df = pd.DataFrame({'t': np.asarray(times, dtype=float), 'n': np.asarray(n_phot, dtype=float)})
    if window is not None:
        df = df[(df['t'] >= window[0]) & (df['t'] <= window[1])]
    if df.empty:
        raise DomainError("no samples inside the fit window")
    model = (g * df['t']) ** 2 / 4
    rms_model = np.sqrt(np.mean(model ** 2))
    if rms_model == 0:
        raise DomainError("quadratic model vanishes on the fit window")
    return float(np.sqrt(np.mean((df['n'] - model) ** 2)) / rms_model)
