import logging
from pathlib import Path

from backend import analysis, utils

logger = logging.getLogger(__name__)


def render(state_path, points: int = analysis.DEFAULT_GRID_POINTS, out_path=None,
           atom_levels: int = 1, extent: float = None):
    """
    Wigner grid of a saved state dump.
    Args:
        state_path: .npy dump written by the simulate verb.
        points: Grid points per axis.
        out_path: Destination; a .pgm suffix writes the image, anything else the text grid.
        atom_levels: 1 for resonator-only dumps, 2 or 3 for joint states (traced over the atom).
        extent: Half-width of the grid in |alpha|; defaults to 1.25 sqrt(<n>).
    Returns:
        The WignerGrid and the written path (None when out_path is None).
    """
    state = utils.load_state(state_path, atom_levels=atom_levels)
    alpha_max = None if extent is None else extent / analysis.GRID_MARGIN
    grid = analysis.wigner(state, points=points, alpha_max=alpha_max)
    logger.info("W(0) = %.6f for %s", grid.value_at_origin(), state_path)

    if out_path is None:
        return grid, None
    out_path = Path(out_path)
    if out_path.suffix == '.pgm':
        return grid, utils.write_wigner_pgm(grid, out_path)
    return grid, utils.write_wigner_text(grid, out_path, Path(state_path).stem)
