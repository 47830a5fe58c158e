# Backend Package
# This file makes the backend directory a Python package

from . import errors
from . import hilbert
from . import dynamics
from . import oracles
from . import models
from . import analysis
from . import narratives
from . import utils

__all__ = [
    'errors',
    'hilbert',
    'dynamics',
    'oracles',
    'models',
    'analysis',
    'narratives',
    'utils'
]
