"""
File helpers: time-series CSV, Wigner grids as text and PGM, state dumps,
validity tables and INI manifests.
"""
import configparser
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from . import hilbert
from .analysis import WIGNER_SCALE, WignerGrid
from .errors import CatSimError, DomainError

logger = logging.getLogger(__name__)


def _target(path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise CatSimError(f"cannot create output directory {path.parent}: {e}") from e
    return path


def write_series_csv(df: pd.DataFrame, path) -> Path:
    """Writes the time series with round-trip float precision so reruns are byte-identical."""
    path = _target(path)
    try:
        df.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
    except OSError as e:
        raise CatSimError(f"cannot write {path}: {e}") from e
    return path


def _format_row(values) -> str:
    return ' '.join(repr(float(v)) for v in values)


def write_wigner_text(grid: WignerGrid, path, label: str = '') -> Path:
    """
    Plain-text grid: '#'-prefixed header with axes and convention scale, then one
    row of values per im_axis entry. Floats are written with repr, so loading is exact.
    """
    path = _target(path)
    lines = [
        f"# wigner {label}".rstrip(),
        f"# convention_scale = {repr(float(grid.convention_scale))}",
        f"# re_axis = {_format_row(grid.re_axis)}",
        f"# im_axis = {_format_row(grid.im_axis)}",
    ]
    lines += [_format_row(row) for row in grid.values]
    try:
        path.write_text('\n'.join(lines) + '\n')
    except OSError as e:
        raise CatSimError(f"cannot write {path}: {e}") from e
    return path


def load_wigner_text(path) -> WignerGrid:
    header, rows = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith('#'):
            if '=' in line:
                key, value = line[1:].split('=', 1)
                header[key.strip()] = value.split()
        elif line.strip():
            rows.append([float(v) for v in line.split()])
    try:
        re_axis = np.array([float(v) for v in header['re_axis']])
        im_axis = np.array([float(v) for v in header['im_axis']])
        scale = float(header['convention_scale'][0])
    except KeyError as e:
        raise DomainError(f"{path} is missing the '{e.args[0]}' header") from e
    return WignerGrid(re_axis=re_axis, im_axis=im_axis, values=np.array(rows), convention_scale=scale)


def write_wigner_pgm(grid: WignerGrid, path) -> Path:
    """8-bit binary PGM; [-1/pi, 1/pi] maps linearly onto [0, 255], largest Im(alpha) on top."""
    path = _target(path)
    scaled = (np.asarray(grid.values) + WIGNER_SCALE) / (2 * WIGNER_SCALE) * 255.0
    pixels = np.clip(np.rint(scaled), 0, 255).astype(np.uint8)
    if grid.im_axis[0] < grid.im_axis[-1]:
        pixels = pixels[::-1]
    height, width = pixels.shape
    try:
        with open(path, 'wb') as fh:
            fh.write(f"P5\n{width} {height}\n255\n".encode('ascii'))
            fh.write(np.ascontiguousarray(pixels).tobytes())
    except OSError as e:
        raise CatSimError(f"cannot write {path}: {e}") from e
    return path


def save_state(state: hilbert.QuantumState, path) -> Path:
    """Raw ket or density-matrix dump in .npy format."""
    path = _target(path)
    try:
        np.save(path, np.asarray(state.data))
    except OSError as e:
        raise CatSimError(f"cannot write {path}: {e}") from e
    return path


def load_state(path, atom_levels: int = 1) -> hilbert.QuantumState:
    """Reads a dump written by save_state; atom_levels=1 for a resonator-only state."""
    try:
        data = np.load(path)
    except (OSError, ValueError) as e:
        raise CatSimError(f"cannot read state dump {path}: {e}") from e
    dim = data.shape[0]
    if dim % atom_levels:
        raise DomainError(f"dimension {dim} is not divisible by {atom_levels} atom levels")
    n = dim // atom_levels
    space = hilbert.resonator_only(n) if atom_levels == 1 else hilbert.make_space(atom_levels, n)
    if data.ndim == 1:
        return hilbert.normalized_ket(data, space)
    if data.ndim == 2:
        return hilbert.density(data, space)
    raise DomainError(f"state dump has {data.ndim} dimensions")


def write_validity_csv(report, path) -> Path:
    path = _target(path)
    try:
        report.to_frame().to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
    except OSError as e:
        raise CatSimError(f"cannot write {path}: {e}") from e
    return path


def write_manifest(sections: dict, path) -> Path:
    """
    Writes an INI manifest.
    Args:
        sections: {section: {key: value}}; floats are written with repr.
        path: Destination file.
    Returns:
        The written path.
    """
    path = _target(path)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for section, values in sections.items():
        parser[section] = {k: repr(float(v)) if isinstance(v, float) else str(v) for k, v in values.items()}
    try:
        with open(path, 'w') as fh:
            parser.write(fh)
    except OSError as e:
        raise CatSimError(f"cannot write {path}: {e}") from e
    return path
