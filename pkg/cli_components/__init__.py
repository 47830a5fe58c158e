# CLI Components Package
# This file makes the cli_components directory a Python package

from . import config_loader
from . import simulate
from . import sweep
from . import wigner_tool
from . import check

__all__ = [
    'config_loader',
    'simulate',
    'sweep',
    'wigner_tool',
    'check'
]
