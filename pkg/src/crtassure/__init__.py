"""Sample-size design for two-arm parallel-group cluster randomised trials.

Frequentist power and Bayesian assurance (expected power over a nuisance
prior) for the difference-of-means Wald test, with minimal-design searches,
prior-sensitivity comparisons, a trial-level simulator for validation, a
scenario file format, a CLI and an HTTP JSON API.
"""

from .assurance import AssuranceEstimate, assurance, assurance_limit
from .io import (
    ComparisonResult,
    CurveResult,
    ScenarioDocument,
    ScenarioError,
    SweepResult,
    ValidationReport,
    load_icc_samples,
    load_preset,
    load_results,
    load_scenario,
    preset_names,
    preset_text,
    write_results,
)
from .power import (
    DesignConfig,
    NuisanceParams,
    critical_z,
    design_effect,
    power,
    power_limit,
)
from .priors import (
    CopulaJointSpec,
    IndependentJointSpec,
    InducedJointSpec,
    MarginalPrior,
    NuisanceDrawSet,
    PriorSpec,
    estimate_copula_gamma,
    fit_icc_from_quantiles,
    gamma_from_mean_var,
    marginal_medians,
    point_digest,
    prior_digest,
    sample_prior,
)
from .search import (
    CurvePoint,
    SampleSizeResult,
    SearchBudgetError,
    SensitivityRow,
    SweepCurve,
    curve,
    min_cluster_size,
    min_clusters,
    nu_sweep,
    prior_comparison,
)
from .trialsim import TrialSimConfig, draw_cluster_sizes, empirical_power, simulate_z

__version__ = "0.1.0"

__all__ = [
    "AssuranceEstimate",
    "ComparisonResult",
    "CopulaJointSpec",
    "CurvePoint",
    "CurveResult",
    "DesignConfig",
    "IndependentJointSpec",
    "InducedJointSpec",
    "MarginalPrior",
    "NuisanceDrawSet",
    "NuisanceParams",
    "PriorSpec",
    "SampleSizeResult",
    "ScenarioDocument",
    "ScenarioError",
    "SearchBudgetError",
    "SensitivityRow",
    "SweepCurve",
    "SweepResult",
    "TrialSimConfig",
    "ValidationReport",
    "assurance",
    "assurance_limit",
    "critical_z",
    "curve",
    "design_effect",
    "draw_cluster_sizes",
    "empirical_power",
    "estimate_copula_gamma",
    "fit_icc_from_quantiles",
    "gamma_from_mean_var",
    "load_icc_samples",
    "load_preset",
    "load_results",
    "load_scenario",
    "marginal_medians",
    "min_cluster_size",
    "min_clusters",
    "nu_sweep",
    "point_digest",
    "power",
    "power_limit",
    "preset_names",
    "preset_text",
    "prior_comparison",
    "prior_digest",
    "sample_prior",
    "simulate_z",
    "write_results",
]
