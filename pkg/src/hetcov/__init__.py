"""Coverage probability of multi-tier Poisson cellular networks.

Closed-form and semi-analytic evaluators live in :mod:`hetcov.analytic`; the
Monte Carlo simulator in :mod:`hetcov.mcsim` serves as an independent check.
"""
from .model import (
    ANALYTIC,
    MONTECARLO,
    ConnectivityModel,
    CoverageReport,
    FadingDistribution,
    HetNetScenario,
    ScenarioError,
    TierConfig,
    average_power_biases,
    fading_moment,
    gamma_factor,
    validate_scenario,
)

__all__ = [
    "ANALYTIC",
    "MONTECARLO",
    "ConnectivityModel",
    "CoverageReport",
    "FadingDistribution",
    "HetNetScenario",
    "ScenarioError",
    "TierConfig",
    "average_power_biases",
    "fading_moment",
    "gamma_factor",
    "validate_scenario",
]
__version__ = "0.1.0"
