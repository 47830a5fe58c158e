"""
Time evolution of kets (Schrodinger) and density matrices (Lindblad), plus
frame transformations.

Both integrators are fixed-step RK4 run in the frame of the static part of the
Hamiltonian: H_s is diagonalized once and propagated exactly, RK4 only sees
the oscillating terms and the dissipators. A model with no oscillating terms
and no dissipators is therefore propagated exactly.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.linalg import eigh

from . import hilbert
from .errors import DomainError, NumericalGuardError
from .hilbert import Operator, QuantumState

logger = logging.getLogger(__name__)

STEPS_PER_PERIOD = 20
DEFAULT_STATIC_STEPS = 1000
# entries weaker than this (relative) do not set the step size
FREQUENCY_WEIGHT_FLOOR = 1e-3
TRACE_ABORT = 1e-5
NEGATIVE_EIGENVALUE_WARN = -1e-6


@dataclass(frozen=True)
class CollapseChannel:
    operator: Operator
    rate: float
    label: str = ''

    def __post_init__(self):
        if self.rate < 0:
            raise DomainError(f"collapse rate must be non-negative, got {self.rate}")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = 'rk4'
    dt: float = None
    sample_stride: int = 1
    store_states: bool = False
    allow_coarse_dt: bool = False
    renormalize: bool = False
    max_norm_drift: float = 1e-5
    max_stored_states: int = 10_000

    def __post_init__(self):
        if self.method != 'rk4':
            raise DomainError(f"unsupported integration method '{self.method}'")
        if self.dt is not None and not self.dt > 0:
            raise DomainError("dt must be positive")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise DomainError("sample_stride must be a positive integer")


@dataclass
class Trajectory:
    times: np.ndarray
    series: dict
    states: list = None
    final_state: QuantumState = None
    log: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise DomainError("trajectory times must be strictly increasing")
        for name, values in self.series.items():
            if len(values) != len(self.times):
                raise DomainError(f"series '{name}' has {len(values)} samples for {len(self.times)} times")

    def to_frame(self) -> pd.DataFrame:
        data = {'t_s': self.times}
        data.update(self.series)
        return pd.DataFrame(data)


# --- Observables ---

def sample_observables(state: QuantumState) -> dict:
    """Atom level populations, mean photon number and purity."""
    space = state.space
    if state.is_pure:
        pops = np.abs(state.data.reshape(space.atom_levels, space.fock_cutoff)) ** 2
    else:
        pops = np.real(np.diag(state.data)).reshape(space.atom_levels, space.fock_cutoff)
    atom = pops.sum(axis=1)
    out = {}
    for name, idx in hilbert.LEVEL_INDEX.items():
        if idx < space.atom_levels:
            out[f'P_{name}'] = float(atom[idx])
    out['n_phot'] = float(pops.sum(axis=0) @ np.arange(space.fock_cutoff))
    out['purity'] = state.purity()
    return out


def _series_from(states: list) -> dict:
    rows = [sample_observables(s) for s in states]
    return {key: np.array([r[key] for r in rows]) for key in rows[0]}


# --- Static frame ---

class _StaticFrame:
    """
    Interaction frame of the static part: psi_I = e^{iEt} U^dag psi.
    Oscillating terms and jump operators are kept in the eigenbasis of H_s.
    """

    def __init__(self, H, channels=()):
        hs = H.static_part()
        if np.any(hs):
            self.E, self.U = eigh(hs)
        else:
            self.E, self.U = np.zeros(H.space.dim), np.eye(H.space.dim, dtype=complex)
        dyn = H.dynamic_terms()
        self.freqs = np.array([term.frequency for term in dyn])
        self.ops = (np.stack([self.U.conj().T @ term.matrix @ self.U for term in dyn])
                    if dyn else np.zeros((0, H.space.dim, H.space.dim), dtype=complex))
        self.jumps = [np.sqrt(ch.rate) * (self.U.conj().T @ ch.operator.matrix @ self.U) for ch in channels]
        self.decay = sum((j.conj().T @ j for j in self.jumps),
                         np.zeros((H.space.dim, H.space.dim), dtype=complex))

    @property
    def is_trivial(self) -> bool:
        return len(self.freqs) == 0 and not self.jumps

    def effective_frequency(self) -> float:
        """Largest angular frequency RK4 has to resolve in this frame."""
        gaps = np.subtract.outer(self.E, self.E)
        top = 0.0
        for nu, m in zip(self.freqs, self.ops):
            mask = np.abs(m) >= FREQUENCY_WEIGHT_FLOOR * np.max(np.abs(m))
            top = max(top, float(np.max(np.abs(nu + gaps[mask]))))
        for j in self.jumps:
            if np.any(j):
                mask = np.abs(j) >= FREQUENCY_WEIGHT_FLOOR * np.max(np.abs(j))
                top = max(top, float(np.max(np.abs(gaps[mask]))))
        return top

    def phase_matrix(self, t: float) -> np.ndarray:
        ph = np.exp(1j * self.E * t)
        return np.outer(ph, ph.conj())

    def coupling(self, t: float, phases: np.ndarray) -> np.ndarray:
        if len(self.freqs) == 0:
            return np.zeros_like(phases)
        coefs = np.exp(1j * self.freqs * t)
        return np.tensordot(coefs, self.ops, axes=1) * phases

    def ket_in(self, psi: np.ndarray, t: float = 0.0) -> np.ndarray:
        return np.exp(1j * self.E * t) * (self.U.conj().T @ psi)

    def ket_out(self, psi_i: np.ndarray, t: float) -> np.ndarray:
        return self.U @ (np.exp(-1j * self.E * t) * psi_i)

    def rho_in(self, rho: np.ndarray, t: float = 0.0) -> np.ndarray:
        return self.phase_matrix(t) * (self.U.conj().T @ rho @ self.U)

    def rho_out(self, rho_i: np.ndarray, t: float) -> np.ndarray:
        return self.U @ (self.phase_matrix(-t) * rho_i) @ self.U.conj().T


def default_integrator(H, t_end: float, channels=(), **overrides) -> IntegratorConfig:
    """IntegratorConfig with dt = 1/(20 f_max) for this model."""
    frame = _StaticFrame(H, channels)
    dt = _default_dt(frame, t_end)
    return IntegratorConfig(dt=dt, **overrides)


def _default_dt(frame: _StaticFrame, t_end: float) -> float:
    omega = frame.effective_frequency()
    if omega == 0:
        return t_end / DEFAULT_STATIC_STEPS
    return 1.0 / (STEPS_PER_PERIOD * omega / (2 * np.pi))


def _time_grid(frame: _StaticFrame, cfg: IntegratorConfig, t_end: float):
    if not t_end > 0:
        raise DomainError("t_end must be positive")
    bound = _default_dt(frame, t_end)
    dt = bound if cfg.dt is None else cfg.dt
    if dt > bound * (1 + 1e-9) and not cfg.allow_coarse_dt and not frame.is_trivial:
        raise DomainError(f"dt = {dt:.3e} s exceeds 1/(20 f_max) = {bound:.3e} s; "
                          f"set allow_coarse_dt to override")
    n_steps = max(1, int(round(t_end / dt)))
    dt = t_end / n_steps
    stride = int(cfg.sample_stride)
    sample_steps = list(range(0, n_steps + 1, stride))
    if sample_steps[-1] != n_steps:
        sample_steps.append(n_steps)
    if cfg.store_states and len(sample_steps) > cfg.max_stored_states:
        raise NumericalGuardError(f"{len(sample_steps)} stored states exceed the limit of "
                                  f"{cfg.max_stored_states}; raise sample_stride")
    return n_steps, dt, sample_steps


def _check_space(H, state: QuantumState):
    if state.space != H.space:
        raise DomainError(f"state space {state.space} does not match Hamiltonian space {H.space}")


def evolve_schrodinger(H, psi0: QuantumState, cfg: IntegratorConfig, t_end: float) -> Trajectory:
    """
    Integrates i dpsi/dt = H(t) psi with fixed-step RK4.
    Args:
        H: TimeDependentHamiltonian.
        psi0: Pure initial state.
        cfg: IntegratorConfig.
        t_end: Final time (s).
    Returns:
        Trajectory with P_*, n_phot and purity series; the norm drift is in log['norm_drift'].
    """
    _check_space(H, psi0)
    if not psi0.is_pure:
        raise DomainError("evolve_schrodinger needs a pure initial state")
    frame = _StaticFrame(H)
    n_steps, dt, sample_steps = _time_grid(frame, cfg, t_end)
    log = {'solver': 'schrodinger', 'steps': n_steps, 'dt': dt, 'exact': frame.is_trivial,
           'norm_drift': 0.0, 'warnings': []}
    logger.debug("Schrodinger run: %d steps of %.3e s (exact=%s)", n_steps, dt, frame.is_trivial)

    def rhs(t, y):
        return -1j * (frame.coupling(t, frame.phase_matrix(t)) @ y)

    psi = frame.ket_in(psi0.data)
    times, states = [], []
    drift = 0.0
    step = 0
    for target in sample_steps:
        while step < target and not frame.is_trivial:
            t = step * dt
            k1 = rhs(t, psi)
            mid = frame.coupling(t + dt / 2, frame.phase_matrix(t + dt / 2))
            k2 = -1j * (mid @ (psi + dt / 2 * k1))
            k3 = -1j * (mid @ (psi + dt / 2 * k2))
            k4 = rhs(t + dt, psi + dt * k3)
            psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            step += 1
            if cfg.renormalize:
                norm = np.linalg.norm(psi)
                drift = max(drift, abs(norm - 1.0))
                psi = psi / norm
        step = target
        t = target * dt
        norm = np.linalg.norm(psi)
        drift = max(drift, abs(norm - 1.0))
        if drift > cfg.max_norm_drift:
            raise NumericalGuardError(f"norm drift {drift:.3e} at t = {t:.4e} s exceeds "
                                      f"{cfg.max_norm_drift:.0e}; reduce dt (currently {dt:.3e} s)")
        times.append(t)
        out = frame.ket_out(psi, t)
        states.append(hilbert.QuantumState('pure', out / np.linalg.norm(out), H.space))

    log['norm_drift'] = drift
    return Trajectory(
        times=np.array(times), series=_series_from(states),
        states=states if cfg.store_states else None, final_state=states[-1], log=log,
    )


def evolve_lindblad(H, channels: list, rho0: QuantumState, cfg: IntegratorConfig,
                    t_end: float) -> Trajectory:
    """
    Integrates drho/dt = -i[H, rho] + sum_k D(L_k) rho with fixed-step RK4 on the
    full density matrix, D(L) rho = L rho L^dag - {L^dag L, rho}/2.
    rho is symmetrized every step; trace drift above 1e-5 aborts.
    """
    _check_space(H, rho0)
    for ch in channels:
        if ch.operator.space != H.space:
            raise DomainError(f"collapse channel '{ch.label}' lives on a different space")
    frame = _StaticFrame(H, channels)
    n_steps, dt, sample_steps = _time_grid(frame, cfg, t_end)
    log = {'solver': 'lindblad', 'steps': n_steps, 'dt': dt, 'exact': frame.is_trivial,
           'trace_drift': 0.0, 'min_eigenvalue': 0.0, 'channels': [ch.label for ch in channels],
           'warnings': []}
    logger.debug("Lindblad run: %d steps of %.3e s, %d channels", n_steps, dt, len(channels))

    def rhs(t, rho, phases):
        v = frame.coupling(t, phases)
        heff = v - 0.5j * (frame.decay * phases)
        out = -1j * (heff @ rho - rho @ heff.conj().T)
        for j in frame.jumps:
            ji = j * phases
            out += ji @ rho @ ji.conj().T
        return out

    rho = frame.rho_in(rho0.to_density())
    times, states = [], []
    trace_drift, lam_min = 0.0, 0.0
    step = 0
    for target in sample_steps:
        while step < target and not frame.is_trivial:
            t = step * dt
            p0, pm, p1 = (frame.phase_matrix(t), frame.phase_matrix(t + dt / 2),
                          frame.phase_matrix(t + dt))
            k1 = rhs(t, rho, p0)
            k2 = rhs(t + dt / 2, rho + dt / 2 * k1, pm)
            k3 = rhs(t + dt / 2, rho + dt / 2 * k2, pm)
            k4 = rhs(t + dt, rho + dt * k3, p1)
            rho = rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            rho = (rho + rho.conj().T) / 2
            step += 1
        step = target
        t = target * dt
        trace = float(np.real(np.trace(rho)))
        trace_drift = max(trace_drift, abs(trace - 1.0))
        if trace_drift > TRACE_ABORT:
            raise NumericalGuardError(f"trace drift {trace_drift:.3e} at t = {t:.4e} s exceeds "
                                      f"{TRACE_ABORT:.0e}; reduce dt (currently {dt:.3e} s)")
        out = frame.rho_out(rho, t)
        out = (out + out.conj().T) / 2
        lam = float(np.linalg.eigvalsh(out)[0])
        lam_min = min(lam_min, lam)
        if lam < NEGATIVE_EIGENVALUE_WARN:
            msg = f"density matrix eigenvalue {lam:.3e} at t = {t:.4e} s"
            logger.warning(msg)
            log['warnings'].append(msg)
        times.append(t)
        states.append(hilbert.QuantumState('mixed', out / trace, H.space, validate=False))

    log['trace_drift'] = trace_drift
    log['min_eigenvalue'] = lam_min
    return Trajectory(
        times=np.array(times), series=_series_from(states),
        states=states if cfg.store_states else None, final_state=states[-1], log=log,
    )


def evolve(H, state: QuantumState, cfg: IntegratorConfig, t_end: float, channels=()) -> Trajectory:
    """Schrodinger for closed systems with pure states, Lindblad otherwise."""
    if not channels and state.is_pure:
        return evolve_schrodinger(H, state, cfg, t_end)
    if state.is_pure:
        state = hilbert.density(state.to_density(), state.space)
    return evolve_lindblad(H, list(channels), state, cfg, t_end)


# --- Frames ---

def _frame_unitary(generator: Operator, t: float) -> np.ndarray:
    g = generator.matrix
    if not generator.is_hermitian(1e-9 * max(1.0, float(np.max(np.abs(g))))):
        raise DomainError("frame generator must be Hermitian")
    if np.count_nonzero(g - np.diag(np.diag(g))) == 0:
        return np.diag(np.exp(1j * np.real(np.diag(g)) * t))
    w, v = eigh(g)
    return (v * np.exp(1j * w * t)) @ v.conj().T


def frame_transform(obj, generator: Operator, t: float = None):
    """
    Applies e^{+iGt}: to kets directly, by conjugation to density matrices.
    A Trajectory is transformed sample by sample at its own times (t is ignored).
    """
    if isinstance(obj, Trajectory):
        if not obj.states:
            raise DomainError("frame_transform on a trajectory needs stored states")
        states = [frame_transform(s, generator, ti) for s, ti in zip(obj.states, obj.times)]
        return Trajectory(times=obj.times.copy(), series=_series_from(states), states=states,
                          final_state=states[-1], log=dict(obj.log, frame_transformed=True))
    if obj.space != generator.space:
        raise DomainError("state and generator live on different spaces")
    u = _frame_unitary(generator, t)
    if obj.is_pure:
        return hilbert.QuantumState('pure', u @ obj.data, obj.space, validate=False)
    return hilbert.QuantumState('mixed', u @ obj.data @ u.conj().T, obj.space, validate=False)


def to_interaction_picture(state: QuantumState, generators: list, t: float) -> QuantumState:
    """Applies e^{iG_k t} for each generator in turn, outermost frame first."""
    for generator in generators:
        state = frame_transform(state, generator, t)
    return state


def derotate_resonator(state: QuantumState, omega_r: float, t: float) -> QuantumState:
    """Removes the free resonator rotation e^{-i omega_r n t}."""
    return frame_transform(state, omega_r * hilbert.number_operator(state.space), t)
