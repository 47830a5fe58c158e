from pathlib import Path

import numpy as np
import pytest

from backend import hilbert, models

TWO_PI = 2 * np.pi
SCENARIOS = Path(__file__).resolve().parents[1] / 'scenarios'


@pytest.fixture
def qubit_space():
    return hilbert.make_space(2, 40)


@pytest.fixture
def small_qubit_space():
    return hilbert.make_space(2, 12)


@pytest.fixture
def qutrit_space():
    return hilbert.make_space(3, 45)


@pytest.fixture
def resonant_params():
    """Resonant drive: 5 GHz everywhere, g = 20 MHz, Omega = 2 GHz."""
    return models.QubitParams(omega_q=TWO_PI * 5e9, omega_r=TWO_PI * 5e9, omega_d=TWO_PI * 5e9,
                              g=TWO_PI * 20e6, Omega=TWO_PI * 2e9)


@pytest.fixture
def detuned_params():
    return models.QubitParams(omega_q=TWO_PI * 5e9, omega_r=TWO_PI * 4.5e9, omega_d=TWO_PI * 4.5e9,
                              g=TWO_PI * 20e6, Omega=TWO_PI * 2e9)


@pytest.fixture
def harmonic_params():
    return models.harmonic_qutrit_params(omega_q=TWO_PI * 5e9, omega_r=TWO_PI * 5e9, omega_d=TWO_PI * 5e9,
                                         g1=TWO_PI * 20e6, Omega1=TWO_PI * 1e9)


@pytest.fixture
def scenario_dir():
    return SCENARIOS
