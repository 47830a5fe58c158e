import numpy as np
import pytest

from backend import analysis, dynamics, hilbert, models, oracles
from backend.errors import DomainError, ValidityError
from tests.conftest import TWO_PI


def test_derived_detunings(detuned_params):
    assert detuned_params.Delta == pytest.approx(TWO_PI * 500e6)
    assert detuned_params.delta == 0.0
    assert detuned_params.epsilon == pytest.approx(TWO_PI * np.hypot(2e9, 500e6))


def test_negative_coupling_rejected():
    with pytest.raises(DomainError):
        models.QubitParams(omega_q=1.0, omega_r=1.0, omega_d=1.0, g=-0.1, Omega=1.0)


def test_harmonic_mode_checks_ratios(harmonic_params):
    assert harmonic_params.tilde_chi == pytest.approx(0.0, abs=1e-3)
    with pytest.raises(DomainError, match="g2"):
        models.QutritParams(omega_eg=1e10, omega_fe=1e10, omega_r=1e10, omega_d=1e10,
                            g1=1e8, g2=1e8, Omega1=1e9, Omega2=np.sqrt(2) * 1e9, mode='harmonic')


def test_general_mode_needs_coupling_ratio():
    with pytest.raises(DomainError, match="g1/g2"):
        models.QutritParams(omega_eg=1e10, omega_fe=9e9, omega_r=1e10, omega_d=1e10,
                            g1=1e8, g2=2e8, Omega1=1e9, Omega2=1e9, mode='general')


def test_lab_model_is_hermitian_and_driven(resonant_params, small_qubit_space):
    H = models.build_driven_qrm_lab(resonant_params, small_qubit_space)
    H.check_hermitian()
    assert H.max_frequency == pytest.approx(resonant_params.omega_d)
    np.testing.assert_allclose(H(0.0).matrix, H.matrix_at(0.0))


def test_non_hermitian_term_rejected(small_qubit_space):
    a = hilbert.annihilation(small_qubit_space).matrix
    with pytest.raises(DomainError, match="not Hermitian"):
        models.TimeDependentHamiltonian([models.HamiltonianTerm(a, 0.0, 'bad')], small_qubit_space)


def test_rwa_is_static_part_of_drive_frame(resonant_params, detuned_params, small_qubit_space):
    for p in (resonant_params, detuned_params):
        full = models.build_drive_frame_full(p, small_qubit_space)
        rwa = models.build_rwa_frame(p, small_qubit_space)
        assert rwa.is_static
        scale = p.omega_d
        np.testing.assert_allclose(full.static_part(), rwa.static_part(), atol=1e-9 * scale)
        tags = {term.tag for term in full.dynamic_terms()}
        assert tags <= {'coupling:counter-rotating', 'drive:counter-rotating'}


def test_interaction_rwa_splits_into_effective_plus_deformation(small_qubit_space):
    p = models.QubitParams(omega_q=TWO_PI * 5e9, omega_r=TWO_PI * 5.01e9, omega_d=TWO_PI * 5e9,
                           g=TWO_PI * 20e6, Omega=TWO_PI * 200e6)
    interaction = models.build_interaction_rwa(p, small_qubit_space)
    split = (models.build_effective_resonant(p, small_qubit_space)
             + models.build_deformation_hamiltonian(p, small_qubit_space))
    for t in np.random.default_rng(1).uniform(0, 50e-9, size=5):
        diff = interaction.matrix_at(t) - split.matrix_at(t)
        assert np.max(np.abs(diff)) < 1e-12 * p.g * small_qubit_space.fock_cutoff


def test_effective_detuned_reduces_to_resonant(resonant_params, small_qubit_space):
    detuned = models.build_effective_detuned(resonant_params, small_qubit_space)
    resonant = models.build_effective_resonant(resonant_params, small_qubit_space)
    np.testing.assert_allclose(detuned.static_part(), resonant.static_part(), atol=1e-9 * resonant_params.g)


def test_effective_model_needs_resonance(detuned_params, small_qubit_space):
    with pytest.raises(DomainError, match="Delta = 0"):
        models.build_effective_resonant(detuned_params, small_qubit_space)


def test_rwa_frame_can_require_validity(small_qubit_space):
    weak = models.QubitParams(omega_q=TWO_PI * 5e9, omega_r=TWO_PI * 5e9, omega_d=TWO_PI * 5e9,
                              g=TWO_PI * 20e6, Omega=TWO_PI * 40e6)
    with pytest.raises(ValidityError) as info:
        models.build_rwa_frame(weak, small_qubit_space, require_valid=True)
    assert info.value.report.worst == 'fail'


def test_cancellation_tone_removes_spurious_drive(resonant_params, small_qubit_space):
    cancelled = models.SpuriousDriveParams(omega_prime=TWO_PI * 10e6, phi_prime=0.0,
                                           omega_c=TWO_PI * 10e6, phi_c=np.pi)
    H = models.build_spurious_model(resonant_params, cancelled, small_qubit_space)
    lab = models.build_driven_qrm_lab(resonant_params, small_qubit_space)
    assert len(H.terms) == len(lab.terms)

    leaking = models.SpuriousDriveParams(omega_prime=TWO_PI * 10e6)
    H = models.build_spurious_model(resonant_params, leaking, small_qubit_space)
    assert np.any(H.tagged('spurious'))


def test_inverse_capacitance_element():
    C = np.array([[100.0, 1.0, 0.0], [1.0, 100.0, 1.0], [0.0, 1.0, 100.0]])
    assert models.inverse_capacitance_coupling(C) == pytest.approx(1.0 / np.linalg.det(C))
    assert models.inverse_capacitance_coupling(C) == pytest.approx(np.linalg.inv(C)[0, 2])
    with pytest.raises(DomainError, match="symmetric"):
        models.inverse_capacitance_coupling(C + np.triu(np.ones((3, 3)), 1))


def test_qutrit_lab_frame_matches_drive_matrix(harmonic_params):
    space = hilbert.make_space(3, 4)
    H = models.build_qutrit_drive_frame_full(harmonic_params, space, frame='symmetric')
    no_coupling = models.QutritParams(**{**harmonic_params.__dict__, 'g1': 0.0, 'g2': 0.0, 'mode': 'free'})
    static = models.build_qutrit_drive_frame_full(no_coupling, space, frame='symmetric').static_part()
    atom_block = static[::space.fock_cutoff, ::space.fock_cutoff]
    expected = oracles.qutrit_drive_matrix(harmonic_params.Omega1, harmonic_params.Omega2, harmonic_params.Sigma)
    np.testing.assert_allclose(atom_block, expected, atol=1e-6 * harmonic_params.Omega1)
    assert H.is_static is False


def test_qutrit_rwa_needs_harmonic_ratios():
    space = hilbert.make_space(3, 4)
    p = models.QutritParams(omega_eg=1e10, omega_fe=1e10, omega_r=1e10, omega_d=1e10,
                            g1=1e8, g2=1e8, Omega1=1e9, Omega2=1e9)
    with pytest.raises(DomainError, match="harmonic"):
        models.build_qutrit_rwa_harmonic(p, space)


def test_arbitrary_anharmonic_spectrum_without_coupling():
    space = hilbert.make_space(3, 3)
    p = models.QutritParams(omega_eg=TWO_PI * 5e9, omega_fe=TWO_PI * 4.9e9, omega_r=TWO_PI * 5e9,
                            omega_d=TWO_PI * 5e9, g1=0.0, g2=0.0, Omega1=TWO_PI * 1e9,
                            Omega2=TWO_PI * 1.3e9, mode='general')
    H = models.build_arbitrary_anharmonic(p, space)
    levels = np.sort(np.linalg.eigvalsh(H.static_part()))
    dressed = oracles.cubic_dressed_eigs(p.Omega1, p.Omega2, p.Sigma).eigenvalues
    expected = np.sort(np.repeat(dressed, space.fock_cutoff))
    np.testing.assert_allclose(levels, expected, atol=1e-6 * p.Omega1)


def test_collapse_channels(small_qubit_space):
    d = models.DecoherenceParams(gamma1=5e5, kappa=5e5, gamma_phi=1e6)
    labels = [ch.label for ch in models.build_collapse_channels(small_qubit_space, d)]
    assert labels == ['relaxation', 'dephasing', 'photon_loss']
    assert models.build_collapse_channels(small_qubit_space, models.DecoherenceParams()) == []

    qutrit = hilbert.make_space(3, 4)
    channels = models.build_collapse_channels(qutrit, models.DecoherenceParams(gamma1=1e5))
    assert [ch.label for ch in channels] == ['relaxation_1', 'relaxation_2']
    assert channels[1].rate == pytest.approx(2e5)


def test_validity_report_for_strong_drive(resonant_params):
    report = models.check_rwa_report(resonant_params)
    assert not report.failures()
    assert report.entry('strong driving (coupling)').ratio == pytest.approx(0.01)
    assert report.regime_flags['deformed_cat'] is False
    frame = report.to_frame()
    assert set(frame.columns) == {'name', 'condition', 'lhs', 'rhs', 'ratio', 'verdict'}


def test_validity_report_flags_deformation():
    p = models.QubitParams(omega_q=TWO_PI * 5e9, omega_r=TWO_PI * 5e9, omega_d=TWO_PI * 5e9,
                           g=TWO_PI * 20e6, Omega=TWO_PI * 100e6)
    report = models.check_rwa_report(p)
    assert report.entry('strong driving (coupling)').verdict == 'marginal'
    assert report.regime_flags['deformed_cat'] is True
    assert report.worst == 'marginal'


def test_qutrit_validity_includes_anharmonicity_gap(harmonic_params):
    report = models.check_rwa_report(harmonic_params)
    gap_entry = report.entry('strong driving-anharmonicity (g1)')
    assert gap_entry.rhs == pytest.approx(np.sqrt(3) / 2 * harmonic_params.Omega1)


def test_lambda_qutrit_relaxes_from_f_into_both_lower_levels():
    space = hilbert.make_space(3, 2)
    gamma1, gamma2, t = 1e6, 2e6, 1e-6
    d = models.DecoherenceParams(gamma1=gamma1, gamma2=gamma2)
    idle = models.TimeDependentHamiltonian([], space)
    f0 = hilbert.basis_state(space, 'f')

    channels = models.build_collapse_channels(space, d, 'lambda')
    final = dynamics.evolve(idle, f0, dynamics.IntegratorConfig(), t, channels=channels).final_state
    pops = analysis.atom_populations(final)
    total = gamma1 + gamma2
    decayed = 1 - np.exp(-total * t)
    assert pops['f'] == pytest.approx(np.exp(-total * t), rel=1e-4)
    assert pops['g'] == pytest.approx(gamma1 / total * decayed, rel=1e-4)
    assert pops['e'] == pytest.approx(gamma2 / total * decayed, rel=1e-4)

    cascade = models.build_collapse_channels(space, d)
    final = dynamics.evolve(idle, f0, dynamics.IntegratorConfig(), t, channels=cascade).final_state
    assert analysis.atom_populations(final)['f'] == pytest.approx(np.exp(-gamma2 * t), rel=1e-4)


def test_sigma_is_the_f_energy_in_the_symmetric_drive_frame():
    p = models.QutritParams(omega_eg=TWO_PI * 5e9, omega_fe=TWO_PI * 4.8e9, omega_r=TWO_PI * 5e9,
                            omega_d=TWO_PI * 4.9e9, g1=TWO_PI * 20e6, g2=TWO_PI * 25e6,
                            Omega1=TWO_PI * 1e9, Omega2=TWO_PI * 1.2e9)
    space = hilbert.make_space(3, 2)
    lab = models.build_qutrit_lab(p, space).static_part()
    rotated = lab - models.drive_frame_generator(p, space).matrix
    f0, g0 = hilbert.basis_state(space, 'f').data, hilbert.basis_state(space, 'g').data
    assert np.vdot(f0, rotated @ f0).real == pytest.approx(p.Sigma / 2, rel=1e-9)
    assert np.vdot(g0, rotated @ g0).real == pytest.approx(-p.Delta1 / 2, rel=1e-9)
    assert p.Sigma == pytest.approx(TWO_PI * (2 * 4.8e9 + 5e9 - 3 * 4.9e9), rel=1e-12)
