import numpy as np
import pytest

from backend import analysis, dynamics, hilbert, oracles
from backend.errors import CutoffError, DomainError, NumericalGuardError


@pytest.fixture
def resonator():
    return hilbert.resonator_only(30)


def test_vacuum_and_odd_cat_at_origin(resonator):
    vacuum = hilbert.basis_state(resonator, 'g', 0)
    assert analysis.wigner_point(vacuum, 0.0) == pytest.approx(1 / np.pi, abs=1e-12)
    odd = oracles.cat_state(2.0, 'odd', resonator)
    assert analysis.wigner_point(odd, 0.0) == pytest.approx(-1 / np.pi, abs=1e-9)


def test_coherent_state_peaks_at_its_amplitude(resonator):
    alpha = 1.0 - 0.5j
    state = hilbert.coherent_state(alpha, resonator)
    assert analysis.wigner_point(state, alpha) == pytest.approx(1 / np.pi, abs=1e-9)
    assert analysis.wigner_point(state, alpha + 0.5) == pytest.approx(np.exp(-0.5) / np.pi, abs=1e-9)


def test_grid_integrates_to_one_half(resonator):
    axis = np.linspace(-4, 4, 161)
    grid = analysis.wigner(hilbert.coherent_state(1.0, resonator), re_axis=axis, im_axis=axis)
    assert analysis.wigner_integral(grid) == pytest.approx(0.5, abs=1e-4)
    assert grid.values.shape == (161, 161)
    assert grid.convention_scale == pytest.approx(1 / np.pi)


def test_grid_rows_follow_imaginary_axis(resonator):
    re_axis = np.linspace(-2, 2, 41)
    im_axis = np.linspace(-1, 3, 41)
    grid = analysis.wigner(hilbert.coherent_state(1.5j, resonator), re_axis=re_axis, im_axis=im_axis)
    row, col = np.unravel_index(np.argmax(grid.values), grid.values.shape)
    assert im_axis[row] == pytest.approx(1.5)
    assert re_axis[col] == pytest.approx(0.0)


def test_default_grid_follows_photon_number(resonator):
    grid = analysis.wigner(hilbert.coherent_state(2.0, resonator), points=21)
    assert grid.re_axis[-1] == pytest.approx(analysis.GRID_MARGIN * 2.0, rel=1e-6)
    assert grid.value_at_origin() == pytest.approx(np.exp(-8) / np.pi, abs=1e-9)


def test_grid_beyond_cutoff_is_rejected():
    space = hilbert.resonator_only(20)
    axis = np.linspace(-10, 10, 11)
    with pytest.raises(CutoffError):
        analysis.wigner(hilbert.basis_state(space, 'g'), re_axis=axis, im_axis=axis)


def test_non_uniform_axis_rejected():
    with pytest.raises(DomainError, match="uniformly"):
        analysis.WignerGrid(re_axis=np.array([0.0, 1.0, 3.0]), im_axis=np.array([0.0, 1.0]),
                            values=np.zeros((2, 3)))


def test_parity_of_coherent_state(resonator):
    assert analysis.parity(hilbert.coherent_state(2.0, resonator)) == pytest.approx(np.exp(-8), abs=1e-9)
    assert analysis.parity(oracles.cat_state(2.0, 'even', resonator)) == pytest.approx(1.0)


def test_fidelity(resonator):
    vacuum = hilbert.basis_state(resonator, 'g', 0)
    coherent = hilbert.coherent_state(1.0, resonator)
    assert analysis.fidelity(vacuum, coherent) == pytest.approx(np.exp(-1), rel=1e-9)
    assert analysis.fidelity(coherent, vacuum) == pytest.approx(analysis.fidelity(vacuum, coherent))
    mixed = hilbert.density(coherent.to_density(), resonator)
    assert analysis.fidelity(vacuum, mixed) == pytest.approx(np.exp(-1), rel=1e-9)
    rho_vac = hilbert.density(vacuum.to_density(), resonator)
    assert analysis.fidelity(rho_vac, mixed) == pytest.approx(np.exp(-1), rel=1e-6)
    assert analysis.fidelity(mixed, mixed) == pytest.approx(1.0, abs=1e-9)


def test_fidelity_needs_same_space(resonator):
    other = hilbert.resonator_only(10)
    with pytest.raises(DomainError):
        analysis.fidelity(hilbert.basis_state(resonator, 'g'), hilbert.basis_state(other, 'g'))


@pytest.mark.parametrize("mixed", [False, True])
def test_projection_onto_excited_state(mixed):
    space = hilbert.make_space(2, 5)
    psi = hilbert.normalized_ket(hilbert.basis_state(space, 'g', 0).data
                                 + hilbert.basis_state(space, 'e', 1).data, space)
    state = hilbert.density(psi.to_density(), space) if mixed else psi
    outcome = analysis.project_atom(state, 'e')
    assert outcome.probability == pytest.approx(0.5)
    assert outcome.label == 'e'
    assert hilbert.fock_populations(outcome.conditional_state) == pytest.approx([0, 1, 0, 0, 0])

    plus = analysis.project_atom(state, '+')
    assert plus.probability == pytest.approx(0.5)
    assert analysis.parity(plus.conditional_state) == pytest.approx(0.0, abs=1e-12)


def test_empty_outcome_raises():
    space = hilbert.make_space(3, 4)
    with pytest.raises(NumericalGuardError, match="probability"):
        analysis.project_atom(hilbert.basis_state(space, 'g'), 'f')


def test_unknown_level_raises():
    space = hilbert.make_space(2, 4)
    with pytest.raises(DomainError):
        analysis.project_atom(hilbert.basis_state(space, 'g'), 'f')


def test_reduced_state_and_populations():
    space = hilbert.make_space(2, 15)
    psi = hilbert.product_state(np.array([0.6, 0.8]), hilbert.coherent_vector(0.5, 15), space)
    rho_r = analysis.reduced_resonator_state(psi)
    assert rho_r.purity() == pytest.approx(1.0)
    assert analysis.atom_populations(psi) == pytest.approx({'g': 0.36, 'e': 0.64})
    n = hilbert.number_operator(space)
    assert analysis.expectation(n, psi).real == pytest.approx(0.25, rel=1e-6)


def test_cat_lobe_weights_are_balanced_for_even_cat(resonator):
    w_plus, w_minus, cross = analysis.cat_lobe_weights(oracles.cat_state(2.0, 'even', resonator), 2.0)
    assert w_plus == pytest.approx(w_minus)
    assert abs(cross) == pytest.approx(w_plus, rel=1e-6)


def _trajectory():
    times = np.linspace(0, 10e-9, 11)
    series = {'P_g': np.full(11, 0.5), 'P_e': np.full(11, 0.5),
              'n_phot': np.array([0, 1, 2, 3, 5, 4, 3, 2, 1, 1, 1], dtype=float),
              'purity': np.linspace(1.0, 0.9, 11)}
    return dynamics.Trajectory(times=times, series=series)


def test_summarize_trajectory():
    summary, log = analysis.summarize_trajectory(_trajectory())
    assert summary['n_phot_peak'] == 5
    assert summary['t_peak'] == pytest.approx(4e-9)
    assert summary['P_e_tail_mean'] == pytest.approx(0.5)
    assert summary['final_purity'] == pytest.approx(0.9)
    assert log['tail_samples'] == 3
    assert 'peak_at_end' not in log


def test_quadratic_fit_of_exact_growth():
    g = 2 * np.pi * 20e6
    t = np.linspace(0, 50e-9, 51)
    assert analysis.fit_quadratic_growth(t, (g * t) ** 2 / 4, g) == pytest.approx(0.0, abs=1e-12)
    assert analysis.fit_quadratic_growth(t, 1.1 * (g * t) ** 2 / 4, g, window=(10e-9, 50e-9)) == pytest.approx(0.1)
