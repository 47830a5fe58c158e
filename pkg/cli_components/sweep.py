import logging
import multiprocessing as mp
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd

from backend import analysis, hilbert, models, utils
from backend.errors import CatSimError, ConfigError
from .config_loader import ScenarioConfig, load_scenario, manifest_sections
from . import simulate

logger = logging.getLogger(__name__)


def _sweep_point(task) -> float:
    """Fidelity of one decoherence setting against the closed-system reference."""
    config, rates, reference = task
    space = simulate.build_space(config)
    H = simulate.build_model(config, space)
    decoherence = replace(config.decoherence, **rates)
    traj = simulate.evolve_config(config, H, space, config.sweep.time, decoherence=decoherence)
    ref_state = hilbert.QuantumState('pure', reference, space, validate=False)
    return analysis.fidelity(traj.final_state, ref_state)


def run_sweep(config, jobs: int = None, force: bool = False) -> (pd.DataFrame, dict):
    """
    Fidelity of the prepared state over a two-rate decoherence grid.
    Args:
        config: Path to a scenario with a [sweep] section, or a loaded ScenarioConfig.
        jobs: Worker processes; defaults to the scenario's `jobs`.
        force: Continue past fail-level validity verdicts.
    Returns:
        A tuple containing:
        - The fidelity matrix (rows: first axis, columns: second axis) with axis metadata in `attrs`.
        - A log dictionary.
    """
    if not isinstance(config, ScenarioConfig):
        config = load_scenario(config)
    if config.sweep is None:
        raise ConfigError("scenario has no [sweep] section", path=config.path)
    log = {}

    report = models.check_rwa_report(config.params)
    simulate.validity_gate(config, report, force)

    space = simulate.build_space(config)
    H = simulate.build_model(config, space)
    closed = replace(config, decoherence_enabled=False)
    reference = simulate.evolve_config(closed, H, space, config.sweep.time)
    log['reference_norm_drift'] = reference.log.get('norm_drift')

    (name1, values1), (name2, values2) = config.sweep.axes
    tasks = []
    for v1 in values1:
        for v2 in values2:
            rates = {name1: float(v1), name2: float(v2)}
            tasks.append((config, rates, np.asarray(reference.final_state.data)))

    workers = jobs or config.sweep.jobs
    logger.info("Sweeping %d points of %s x %s with %d worker(s)", len(tasks), name1, name2, workers)
    if workers > 1:
        with mp.Pool(processes=workers) as pool:
            values = pool.map(_sweep_point, tasks)
    else:
        values = [_sweep_point(task) for task in tasks]

    matrix = pd.DataFrame(np.array(values).reshape(len(values1), len(values2)),
                          index=pd.Index(values1, name=name1), columns=pd.Index(values2, name=name2))
    matrix.attrs = {
        'axis1': name1, 'axis2': name2, 'units': '1/s', 'time_s': config.sweep.time,
        'fixed': {k: getattr(config.decoherence, k) for k in ('gamma1', 'gamma_phi', 'kappa')
                  if k not in (name1, name2)},
    }
    log['points'] = len(tasks)
    log['min_fidelity'] = float(np.min(values))
    return matrix, log


def export_sweep(matrix: pd.DataFrame, config: ScenarioConfig, out_dir) -> list:
    """Writes fidelity.csv with a commented axis header, plus the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / 'fidelity.csv'
    attrs = matrix.attrs
    header = [
        f"# rows: {attrs['axis1']} ({attrs['units']})",
        f"# columns: {attrs['axis2']} ({attrs['units']})",
        f"# time_s = {float(attrs['time_s'])!r}",
    ] + [f"# fixed {k} = {float(v)!r}" for k, v in attrs['fixed'].items()]
    try:
        with open(path, 'w') as fh:
            fh.write('\n'.join(header) + '\n')
            matrix.to_csv(fh, float_format='%.17g', lineterminator='\n')
    except OSError as e:
        raise CatSimError(f"cannot write {path}: {e}") from e
    return [path, utils.write_manifest(manifest_sections(config), out / 'manifest.ini')]
