import logging

logger = logging.getLogger(__name__)


def describe_validity_entry(entry) -> str:
    """
    One-sentence reading of a single approximation inequality.
    Args:
        entry: A models.ValidityEntry.
    Returns:
        A sentence citing the condition and how well it holds.
    """
    if entry.verdict == 'pass':
        return f"The {entry.name} condition ({entry.condition}) holds comfortably, lhs/rhs = {entry.ratio:.3g}."
    elif entry.verdict == 'marginal':
        return (f"The {entry.name} condition ({entry.condition}) is only marginally satisfied "
                f"at lhs/rhs = {entry.ratio:.3g}; expect visible corrections.")
    return (f"The {entry.name} condition ({entry.condition}) is violated at lhs/rhs = {entry.ratio:.3g}, "
            f"so the approximate model should not be trusted.")


def generate_validity_narrative(report) -> list:
    """Sentences for every entry of a ValidityReport, followed by any regime flags."""
    lines = [describe_validity_entry(e) for e in report.entries]
    for flag, value in report.regime_flags.items():
        if value:
            lines.append(f"Regime flag '{flag}' is set for this parameter set.")
    if not report.entries:
        lines.append("No approximation inequalities apply to this model.")
    return lines


def generate_run_narrative(summary: dict, variant: str = '') -> str:
    """
    One-sentence summary of a finished run.
    Args:
        summary: Dictionary from analysis.summarize_trajectory.
        variant: Model variant name.
    Returns:
        A string describing photon growth, atom saturation and purity.
    """
    try:
        n_peak = summary['n_phot_peak']
        t_peak_ns = summary['t_peak'] * 1e9
        purity = summary['final_purity']
        prefix = f"The {variant} run" if variant else "The run"

        if 'P_e_tail_mean' in summary and 'P_f_tail_mean' not in summary:
            p_e = summary['P_e_tail_mean']
            balance = "an equal superposition" if 0.4 <= p_e <= 0.6 else f"an excited population of {p_e:.2f}"
            return (f"{prefix} reaches <n> = {n_peak:.3g} at t = {t_peak_ns:.3g} ns while the atom "
                    f"settles near {balance}, final purity {purity:.3f}.")
        elif 'P_f_tail_mean' in summary:
            return (f"{prefix} reaches <n> = {n_peak:.3g} at t = {t_peak_ns:.3g} ns with the f level "
                    f"holding {summary['P_f_mean']:.2f} on average, final purity {purity:.3f}.")
        return f"{prefix} reaches <n> = {n_peak:.3g} at t = {t_peak_ns:.3g} ns, final purity {purity:.3f}."
    except KeyError as e:
        logger.debug("run narrative missing %s", e)
        return "Not enough data to summarise this run."
