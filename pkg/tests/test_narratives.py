from backend import models, narratives
from tests.conftest import TWO_PI


def test_each_verdict_reads_differently():
    passing = models.ValidityEntry('weak coupling', 'g << omega_r', 1.0, 100.0)
    marginal = models.ValidityEntry('weak coupling', 'g << omega_r', 20.0, 100.0)
    failing = models.ValidityEntry('weak coupling', 'g << omega_r', 50.0, 100.0)
    assert 'holds comfortably' in narratives.describe_validity_entry(passing)
    assert 'marginally' in narratives.describe_validity_entry(marginal)
    sentence = narratives.describe_validity_entry(failing)
    assert 'violated' in sentence and 'g << omega_r' in sentence


def test_weak_drive_report_mentions_deformed_regime():
    p = models.QubitParams(omega_q=TWO_PI * 5e9, omega_r=TWO_PI * 5e9, omega_d=TWO_PI * 5e9,
                           g=TWO_PI * 20e6, Omega=TWO_PI * 40e6)
    report = models.check_rwa_report(p)
    lines = narratives.generate_validity_narrative(report)
    assert len(lines) == len(report.entries) + 1
    assert "deformed_cat" in lines[-1]


def test_run_narrative_falls_back_on_missing_keys():
    assert narratives.generate_run_narrative({}) == "Not enough data to summarise this run."
    summary = {'n_phot_peak': 9.8, 't_peak': 5e-8, 'final_purity': 1.0, 'P_e_tail_mean': 0.5}
    assert "equal superposition" in narratives.generate_run_narrative(summary, 'qrm_lab')
