import logging

from backend import models, narratives
from .config_loader import ScenarioConfig, load_scenario
from .simulate import EXACT_VARIANTS

logger = logging.getLogger(__name__)


def render(config) -> (models.ValidityReport, list):
    """
    Validity report of a scenario without running it.
    Returns:
        The ValidityReport and its narrative, one sentence per inequality.
    """
    if not isinstance(config, ScenarioConfig):
        config = load_scenario(config)
    report = models.check_rwa_report(config.params)
    lines = narratives.generate_validity_narrative(report)
    if config.variant in EXACT_VARIANTS:
        lines.append(f"Variant '{config.variant}' is exact, so these verdicts are advisory.")
    return report, lines
