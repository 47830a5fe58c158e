import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from backend import analysis, dynamics, hilbert, models, narratives, oracles, utils
from backend.errors import DomainError, NumericalGuardError, ValidityError
from .config_loader import ScenarioConfig, encode_coefficients, load_scenario, manifest_sections

logger = logging.getLogger(__name__)

# exact models, no approximation to gate
EXACT_VARIANTS = ('qrm_lab', 'spurious', 'qutrit_lab', 'interaction_full')
SERIES_COLUMNS = ['t_s', 'P_e', 'n_phot', 'purity']
EXPORT_FORMATS = ('csv', 'measurements', 'wigner', 'pgm', 'npy', 'manifest', 'validity')
BASIS_FILE_LABELS = {'+': 'plus', '-': 'minus'}


@dataclass
class RunArtifacts:
    config: ScenarioConfig
    series: pd.DataFrame
    trajectory: dynamics.Trajectory
    validity: models.ValidityReport
    measurements: pd.DataFrame = None
    conditional_states: dict = field(default_factory=dict)
    wigner_grids: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)
    log: dict = field(default_factory=dict)


# --- Model assembly ---

def build_space(config: ScenarioConfig) -> hilbert.SpaceDescriptor:
    return hilbert.make_space(config.atom_levels, config.fock_cutoff)


def build_model(config: ScenarioConfig, space) -> models.TimeDependentHamiltonian:
    """Hamiltonian of the configured variant, in its own frame."""
    p = config.params
    variant = config.variant

    if variant == 'qrm_lab':
        return models.build_driven_qrm_lab(p, space)
    elif variant == 'spurious':
        return models.build_spurious_model(p, config.spurious, space)
    elif variant == 'rwa':
        return models.build_rwa_frame(p, space)
    elif variant == 'interaction_full':
        if p.Delta == 0:
            return models.build_interaction_full(p, space)
        return models.build_interaction_detuned_full(p, space)
    elif variant == 'effective':
        return models.build_effective_resonant(p, space)
    elif variant == 'effective_detuned':
        return models.build_effective_detuned(p, space)
    elif variant == 'deformation':
        return models.build_effective_resonant(p, space) + models.build_deformation_hamiltonian(p, space)
    elif variant == 'qutrit_lab':
        return models.build_qutrit_lab(p, space)
    elif variant == 'qutrit_rwa':
        return models.build_qutrit_rwa_harmonic(p, space)
    elif variant == 'arbitrary_anharmonic':
        return models.build_arbitrary_anharmonic(p, space)
    raise DomainError(f"unknown variant '{variant}'")


def initial_state(config: ScenarioConfig, space) -> hilbert.QuantumState:
    """Atom state named by the config label, resonator in vacuum."""
    label = config.initial
    p = config.params
    vacuum = hilbert.fock_vector(0, space.fock_cutoff)
    r2 = np.sqrt(2.0)

    if label.startswith('encode'):
        c_g, c_e = encode_coefficients(label)
        if space.atom_levels == 2:
            atom = c_g * np.array([1, 1]) / r2 + c_e * np.array([1, -1]) / r2
        else:
            basis = oracles.qutrit_dark_basis()
            atom = c_g * basis.vector('vplus') + c_e * basis.vector('vminus')
    elif label in ('g0', 'e0', 'f0'):
        return hilbert.basis_state(space, label[0], 0)
    elif label in ('plus0', 'minus0'):
        atom = np.zeros(space.atom_levels, dtype=complex)
        atom[0], atom[1] = 1 / r2, (1 if label == 'plus0' else -1) / r2
    elif label in ('v0', 'vplus', 'vminus'):
        atom = oracles.qutrit_dark_basis().vector(label)
    elif label in ('v1', 'v2', 'v3'):
        atom = oracles.cubic_dressed_eigs(p.Omega1, p.Omega2, p.Sigma).vector(label)
    else:
        raise DomainError(f"unknown initial state '{label}'")
    return hilbert.product_state(atom, vacuum, space)


def frame_generators(config: ScenarioConfig, space) -> list:
    """Generators taking the simulation frame to the interaction picture of the dressed atom."""
    p = config.params
    if config.frame == 'lab':
        return [models.drive_frame_generator(p, space, 'symmetric'), models.dressing_generator(p, space)]
    if config.frame == 'drive-rotating':
        return [models.dressing_generator(p, space)]
    return []


def resonator_rotation(config: ScenarioConfig) -> float:
    """Free resonator frequency left in the simulation frame."""
    if config.frame == 'lab':
        return config.params.omega_r
    if config.frame == 'drive-rotating':
        return config.params.delta
    return 0.0


def validity_gate(config: ScenarioConfig, report: models.ValidityReport, force: bool):
    if config.variant in EXACT_VARIANTS:
        return
    failures = report.failures()
    if config.variant == 'deformation':
        failures = [e for e in failures if 'coupling' not in e.name]
    if not failures:
        return
    if force:
        for e in failures:
            logger.warning("Forced past: %s", e.message())
        return
    raise ValidityError(f"{config.name}: {failures[0].message()}", report)


# --- Running ---

def evolve_config(config: ScenarioConfig, H, space, t_end: float, decoherence=None,
                  **integrator_overrides) -> dynamics.Trajectory:
    enabled = decoherence is not None or config.decoherence_enabled
    d = config.decoherence if decoherence is None else decoherence
    selection = getattr(config.params, 'selection', 'cascade')
    channels = models.build_collapse_channels(space, d, selection) if enabled else []
    cfg = dynamics.IntegratorConfig(**{**config.integrator, **integrator_overrides})
    psi0 = initial_state(config, space)
    return dynamics.evolve(H, psi0, cfg, t_end, channels=channels)


def measure(config: ScenarioConfig, state: hilbert.QuantumState, t: float, space) -> (dict, dict, pd.DataFrame):
    """
    Executes the measurement plan on a joint state.
    Returns:
        A tuple containing:
        - Conditional resonator states keyed by basis label.
        - Wigner grids keyed by basis label.
        - A table of outcome probabilities, parities and W(0).
    """
    plan = config.measurement
    if plan.frame == 'interaction':
        state = dynamics.to_interaction_picture(state, frame_generators(config, space), t)
    rotation = 0.0 if plan.frame == 'interaction' else resonator_rotation(config)

    states, grids, rows = {}, {}, []
    for basis in plan.bases:
        try:
            outcome = analysis.project_atom(state, basis)
        except NumericalGuardError as e:
            logger.warning("Measurement of '%s' skipped: %s", basis, e)
            continue
        conditional = outcome.conditional_state
        if rotation:
            conditional = dynamics.derotate_resonator(conditional, rotation, t)
        states[basis] = conditional
        row = {'basis': basis, 't_s': t, 'probability': outcome.probability,
               'parity': analysis.parity(conditional),
               'W0': analysis.wigner_point(conditional, 0.0)}
        if config.wigner.enabled:
            alpha_max = None if config.wigner.extent is None else config.wigner.extent / analysis.GRID_MARGIN
            grids[basis] = analysis.wigner(conditional, points=config.wigner.points, alpha_max=alpha_max)
        rows.append(row)
    return states, grids, pd.DataFrame(rows)


def run_scenario(config, force: bool = False) -> RunArtifacts:
    """
    Runs one scenario end to end.
    Args:
        config: Path to a scenario file or a loaded ScenarioConfig.
        force: Continue past fail-level validity verdicts.
    Returns:
        RunArtifacts with series, measurement results, validity report and manifest.
    """
    if not isinstance(config, ScenarioConfig):
        config = load_scenario(config)
    log = {}

    report = models.check_rwa_report(config.params)
    validity_gate(config, report, force)
    for e in report.marginals():
        logger.warning("Marginal validity: %s", e.message())

    space = build_space(config)
    H = build_model(config, space)
    logger.info("Evolving '%s' (%s, dim %d) to t = %.4g s", config.name, H.name, space.dim, config.t_end)
    traj = evolve_config(config, H, space, config.t_end)
    hilbert.check_fock_tail(traj.final_state)

    m_time = config.measurement.time
    measured_state, measured_t = traj.final_state, config.t_end
    if config.measurement.bases and m_time is not None and not np.isclose(m_time, config.t_end, rtol=1e-12, atol=0):
        m_traj = evolve_config(config, H, space, m_time)
        measured_state, measured_t = m_traj.final_state, m_time
        log['measurement_run_steps'] = m_traj.log['steps']

    states, grids, table = ({}, {}, None)
    if config.measurement.bases:
        states, grids, table = measure(config, measured_state, measured_t, space)

    summary, summary_log = analysis.summarize_trajectory(traj)
    series = traj.to_frame()
    extra = [c for c in ('P_g', 'P_f') if c in series and config.atom_levels == 3]
    series = series[SERIES_COLUMNS + extra]

    log = {**traj.log, **summary_log, **log,
           'validity': report.worst, 'narrative': narratives.generate_run_narrative(summary, config.variant)}
    run_info = {'steps': traj.log['steps'], 'dt_used': traj.log['dt'], 'solver': traj.log['solver'],
                'validity': report.worst}
    for key in ('norm_drift', 'trace_drift', 'min_eigenvalue'):
        if key in traj.log:
            run_info[key] = traj.log[key]
    logger.info(log['narrative'])

    return RunArtifacts(
        config=config, series=series, trajectory=traj, validity=report, measurements=table,
        conditional_states=states, wigner_grids=grids, summary=summary,
        manifest=manifest_sections(config, run_info), log=log,
    )


def export(artifacts: RunArtifacts, out_dir, formats=EXPORT_FORMATS) -> list:
    """
    Writes the requested artifacts into out_dir.
    Returns:
        The list of written paths.
    """
    out = Path(out_dir)
    written = []
    unknown = set(formats) - set(EXPORT_FORMATS)
    if unknown:
        raise DomainError(f"unknown export formats: {', '.join(sorted(unknown))}")

    if 'csv' in formats:
        written.append(utils.write_series_csv(artifacts.series, out / 'series.csv'))
    if 'measurements' in formats and artifacts.measurements is not None and not artifacts.measurements.empty:
        written.append(utils.write_series_csv(artifacts.measurements, out / 'measurements.csv'))
    for basis, grid in artifacts.wigner_grids.items():
        label = BASIS_FILE_LABELS.get(basis, basis)
        if 'wigner' in formats:
            written.append(utils.write_wigner_text(grid, out / f'wigner_{label}.txt', label))
        if 'pgm' in formats:
            written.append(utils.write_wigner_pgm(grid, out / f'wigner_{label}.pgm'))
    if 'npy' in formats:
        for basis, state in artifacts.conditional_states.items():
            label = BASIS_FILE_LABELS.get(basis, basis)
            written.append(utils.save_state(state, out / f'state_{label}.npy'))
    if 'manifest' in formats:
        written.append(utils.write_manifest(artifacts.manifest, out / 'manifest.ini'))
    if 'validity' in formats:
        written.append(utils.write_validity_csv(artifacts.validity, out / 'validity.csv'))
    logger.info("Wrote %d files to %s", len(written), out)
    return written
