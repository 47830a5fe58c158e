import numpy as np
import pytest

from backend import analysis, hilbert, models, oracles
from backend.errors import DomainError
from tests.conftest import TWO_PI


def test_resonant_amplitude():
    g = TWO_PI * 20e6
    assert oracles.alpha_resonant(50e-9, g) == pytest.approx(-1j * np.pi)
    small = oracles.alpha_resonant(50e-9, g, delta=1e-3)
    assert small == pytest.approx(-1j * np.pi, rel=1e-6)
    # one full detuning period brings the displacement back to the origin
    assert abs(oracles.alpha_resonant(1e-6, g, delta=TWO_PI * 1e6)) < 1e-9


def test_detuned_amplitude_is_continuous_at_resonance():
    g, Omega = TWO_PI * 20e6, TWO_PI * 2e9
    detuned = oracles.alpha_detuned(50e-9, g, Omega, 1e-6 * Omega)
    resonant = oracles.alpha_resonant(50e-9, g)
    assert abs(detuned - resonant) / abs(resonant) < 1e-6


def test_detuned_basis_diagonalizes_drive(detuned_params):
    p = detuned_params
    basis = oracles.detuned_basis(p.Omega, p.Delta)
    h = np.array([[-p.Delta / 2, p.Omega / 2], [p.Omega / 2, p.Delta / 2]])
    np.testing.assert_allclose(h @ basis.plus_state, p.epsilon / 2 * basis.plus_state, atol=1e-6 * p.epsilon)
    np.testing.assert_allclose(h @ basis.minus_state, -p.epsilon / 2 * basis.minus_state, atol=1e-6 * p.epsilon)


def test_dark_basis_diagonalizes_harmonic_drive():
    Omega1 = 1.3
    basis = oracles.qutrit_dark_basis(Omega1)
    h = oracles.qutrit_drive_matrix(Omega1, np.sqrt(2) * Omega1)
    for k in range(3):
        v = basis.eigenvectors[:, k]
        np.testing.assert_allclose(h @ v, basis.eigenvalues[k] * v, atol=1e-12)
    assert basis.vector('v0')[1] == 0


def test_cubic_eigensystem_without_second_drive():
    basis = oracles.cubic_dressed_eigs(2.0, 0.0, 0.0)
    np.testing.assert_allclose(np.sort(basis.eigenvalues), [-1.0, 0.0, 1.0], atol=1e-12)


def test_cubic_eigensystem_matches_dense_solver():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        Omega1, Omega2 = rng.uniform(0.1, 2.0, size=2)
        Sigma = rng.uniform(-3.0, 3.0)
        basis = oracles.cubic_dressed_eigs(Omega1, Omega2, Sigma)
        h = oracles.qutrit_drive_matrix(Omega1, Omega2, Sigma)
        scale = np.linalg.norm(h)
        numeric = np.sort(np.linalg.eigvalsh(h))
        assert np.max(np.abs(np.sort(basis.eigenvalues) - numeric)) < 1e-9 * scale

        c = basis.coefficients
        for lam in basis.eigenvalues:
            assert abs(lam ** 3 + c['a'] * lam ** 2 + c['b'] * lam + c['c']) < 1e-9 * scale ** 3
        for k in range(3):
            v = basis.eigenvectors[:, k]
            np.testing.assert_allclose(h @ v, basis.eigenvalues[k] * v, atol=1e-9 * scale)


def test_cubic_eigensystem_rejects_zero_drive():
    with pytest.raises(DomainError, match="degenerate"):
        oracles.cubic_dressed_eigs(0.0, 0.0, 0.0)


def test_effective_couplings_match_dressed_sandwich():
    rng = np.random.default_rng(5)
    for _ in range(20):
        Omega1, Sigma = rng.uniform(0.5, 2.0), rng.uniform(-2.0, 2.0)
        ratio = rng.uniform(0.5, 2.0)
        Omega2, g1 = ratio * Omega1, 0.01
        g2 = ratio * g1
        basis = oracles.cubic_dressed_eigs(Omega1, Omega2, Sigma)
        couplings = oracles.effective_couplings(basis, g1, g2, Omega1, Omega2, Sigma)
        raising = np.array([[0.0, 0.0, 0.0], [g1, 0.0, 0.0], [0.0, g2, 0.0]])
        for k in range(3):
            v = basis.eigenvectors[:, k]
            assert couplings[k] == pytest.approx(np.real(np.vdot(v, raising @ v)), abs=1e-9)


def test_harmonic_couplings_follow_dark_state_pattern():
    g1, Omega1 = 0.02, 1.0
    basis = oracles.cubic_dressed_eigs(Omega1, np.sqrt(2) * Omega1, 0.0)
    couplings = oracles.effective_couplings(basis, g1, np.sqrt(2) * g1, Omega1, np.sqrt(2) * Omega1, 0.0)
    np.testing.assert_allclose(np.sort(couplings), [-np.sqrt(3) * g1 / 2, 0.0, np.sqrt(3) * g1 / 2], atol=1e-12)


def test_resonant_cat_measured_in_excited_state_is_odd(resonant_params, qubit_space):
    t = TWO_PI / resonant_params.g
    state = oracles.analytic_state(oracles.CatRecipe('qubit_resonant', resonant_params), t, qubit_space)
    outcome = analysis.project_atom(state, 'e')
    assert outcome.probability == pytest.approx(0.5, abs=1e-6)
    assert analysis.parity(outcome.conditional_state) == pytest.approx(-1.0, abs=1e-9)
    n = hilbert.fock_populations(outcome.conditional_state) @ np.arange(qubit_space.fock_cutoff)
    assert n == pytest.approx(np.pi ** 2, rel=1e-6)


def test_encoded_qubit_state_lands_in_cat_basis(resonant_params, qubit_space):
    t = TWO_PI / resonant_params.g
    recipe = oracles.CatRecipe('qubit_encode', resonant_params, coefficients=(1.0, 0.0))
    state = oracles.analytic_state(recipe, t, qubit_space)
    plus = analysis.project_atom(state, '+')
    assert plus.probability == pytest.approx(1.0)
    expected = hilbert.coherent_state(-1j * np.pi, hilbert.resonator_only(qubit_space.fock_cutoff))
    assert analysis.fidelity(plus.conditional_state, expected) == pytest.approx(1.0, abs=1e-9)


def test_detuned_cat_lobe_weights(detuned_params, qubit_space):
    p = detuned_params
    t = TWO_PI / p.g
    state = oracles.analytic_state(oracles.CatRecipe('qubit_detuned', p), t, qubit_space)
    conditional = analysis.project_atom(state, 'g').conditional_state
    alpha = oracles.alpha_detuned(t, p.g, p.Omega, p.Delta)
    w_plus, w_minus, _ = analysis.cat_lobe_weights(conditional, alpha)
    theta = oracles.detuned_basis(p.Omega, p.Delta).theta
    assert w_plus / w_minus == pytest.approx(np.tan(theta / 2) ** 4, rel=1e-6)


def test_qutrit_ground_state_recipe(harmonic_params, qutrit_space):
    t = 0.61 * TWO_PI / harmonic_params.g1
    state = oracles.analytic_state(oracles.CatRecipe('qutrit_from_g0', harmonic_params), t, qutrit_space)
    alpha = oracles.alpha_qutrit(t, harmonic_params.g1)
    excited = analysis.project_atom(state, 'e')
    assert excited.probability == pytest.approx((1 - np.exp(-2 * abs(alpha) ** 2)) / 6, rel=1e-6)

    ground = analysis.project_atom(state, 'g').conditional_state
    n = qutrit_space.fock_cutoff
    target = (4 * hilbert.fock_vector(0, n) + hilbert.coherent_vector(alpha, n)
              + hilbert.coherent_vector(-alpha, n))
    target = hilbert.normalized_ket(target, ground.space)
    assert analysis.fidelity(ground, target) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("level, sign", [('e', 1.0), ('g', -1.0), ('f', -1.0)])
def test_qutrit_excited_recipe_parities(harmonic_params, qutrit_space, level, sign):
    t = 0.61 * TWO_PI / harmonic_params.g1
    state = oracles.analytic_state(oracles.CatRecipe('qutrit_from_e0', harmonic_params), t, qutrit_space)
    conditional = analysis.project_atom(state, level).conditional_state
    assert analysis.parity(conditional) == pytest.approx(sign, abs=1e-6)


def test_arbitrary_recipe_reduces_to_dark_state_pattern(harmonic_params, qutrit_space):
    t = 0.3 * TWO_PI / harmonic_params.g1
    basis = oracles.cubic_dressed_eigs(harmonic_params.Omega1, harmonic_params.Omega2, harmonic_params.Sigma)
    zero = int(np.argmin(np.abs(basis.eigenvalues)))
    coefficients = np.zeros(3)
    coefficients[zero] = 1.0
    state = oracles.analytic_state(oracles.CatRecipe('arbitrary_anharmonic', harmonic_params,
                                                     coefficients=tuple(coefficients)), t, qutrit_space)
    assert hilbert.fock_populations(state)[0] == pytest.approx(1.0, abs=1e-9)


def test_recipe_needs_matching_space(resonant_params, qutrit_space):
    with pytest.raises(DomainError, match="qubit space"):
        oracles.analytic_state(oracles.CatRecipe('qubit_resonant', resonant_params), 1e-9, qutrit_space)


def test_cat_normalization():
    for parity in ('even', 'odd'):
        vec = oracles.cat_vector(1.5, parity, 30)
        assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(DomainError, match="alpha = 0"):
        oracles.cat_vector(0.0, 'odd', 10)


def test_photon_envelope_peak():
    g, Omega, kappa = TWO_PI * 20e6, TWO_PI * 2e9, TWO_PI * 1e6
    t_max, peak = oracles.photon_envelope_peak(g, Omega, 0.0, kappa)
    assert t_max == pytest.approx(2 / kappa)
    assert peak == pytest.approx(g ** 2 * t_max ** 2 * np.exp(-2) / 4)
    before = oracles.photon_envelope(0.9 * t_max, g, Omega, 0.0, kappa)
    after = oracles.photon_envelope(1.1 * t_max, g, Omega, 0.0, kappa)
    assert before < peak and after < peak
    assert oracles.envelope_peak_time(0.0) == float('inf')


def test_detuned_envelope_scales_with_mixing():
    g, Omega, Delta = TWO_PI * 20e6, TWO_PI * 2e9, TWO_PI * 500e6
    ratio = oracles.photon_envelope(50e-9, g, Omega, Delta, 0.0) / oracles.photon_envelope(50e-9, g, Omega, 0.0, 0.0)
    assert ratio == pytest.approx(0.9412, abs=1e-4)


def test_qcmap_size_and_crossover():
    g = chi = TWO_PI * 2e6
    assert oracles.qcmap_cat_size(chi, 0.5 * np.pi / chi) == 0.0
    assert oracles.qcmap_cat_size(chi, 2 * np.pi / chi) == pytest.approx(7.5 * np.pi)

    t_cross = oracles.qcmap_crossover_time(g, chi)
    assert g * t_cross == pytest.approx(15 + np.sqrt(225 - 30 * np.pi), rel=1e-9)
    gap = g ** 2 * t_cross ** 2 / 4 - oracles.qcmap_cat_size(chi, t_cross)
    assert gap == pytest.approx(0.0, abs=1e-6)
    for t in (1.5 * t_cross, 3 * t_cross):
        assert g ** 2 * t ** 2 / 4 > oracles.qcmap_cat_size(chi, t)


def test_qcmap_needs_positive_rates():
    with pytest.raises(DomainError):
        oracles.qcmap_crossover_time(0.0, 1.0)


def test_harmonic_params_helper_is_consistent(harmonic_params):
    assert isinstance(harmonic_params, models.QutritParams)
    assert harmonic_params.mode == 'harmonic'


def test_qcmap_crossover_is_zero_for_strong_coupling():
    assert oracles.qcmap_crossover_time(TWO_PI * 20e6, TWO_PI * 2e6) == 0.0


def test_arbitrary_recipe_reproduces_harmonic_cats(harmonic_params):
    space = hilbert.make_space(3, 30)
    t = 0.61 * TWO_PI / harmonic_params.g1
    basis = oracles.cubic_dressed_eigs(harmonic_params.Omega1, harmonic_params.Omega2, harmonic_params.Sigma)
    from_e = oracles.CatRecipe('arbitrary_anharmonic', harmonic_params,
                               coefficients=tuple(np.conj(basis.eigenvectors[1, :])))
    rates = oracles.effective_couplings(basis, harmonic_params.g1, harmonic_params.g2,
                                        harmonic_params.Omega1, harmonic_params.Omega2, harmonic_params.Sigma)
    assert abs(oracles.alpha_effective(t, rates.max())) == pytest.approx(
        abs(oracles.alpha_qutrit(t, harmonic_params.g1)), rel=1e-9)

    expected = oracles.analytic_state(oracles.CatRecipe('qutrit_from_e0', harmonic_params), t, space)
    assert analysis.fidelity(oracles.analytic_state(from_e, t, space), expected) >= 1 - 1e-9


def test_envelope_bounds_damped_photon_number():
    g, Omega, Delta, kappa = TWO_PI * 20e6, TWO_PI * 2e9, TWO_PI * 500e6, TWO_PI * 1e6
    times = np.linspace(1e-9, 5 * oracles.envelope_peak_time(kappa), 200)
    damped = np.array([oracles.damped_photon_number(t, g, Omega, Delta, kappa) for t in times])
    envelope = np.array([oracles.photon_envelope(t, g, Omega, Delta, kappa) for t in times])
    assert np.all(envelope <= damped)
    assert damped[-1] == pytest.approx((Omega / np.hypot(Omega, Delta) * g / kappa) ** 2, rel=0.02)
    assert oracles.damped_photon_number(1e-9, g, Omega, Delta, kappa) == pytest.approx(envelope[0], rel=1e-2)
    assert oracles.damped_photon_number(50e-9, g, Omega, 0.0, 0.0) == pytest.approx(np.pi ** 2)
