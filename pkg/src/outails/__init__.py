"""Transformed Ornstein-Uhlenbeck processes with regularly varying tails.

Exact OU simulation, square-exponential transforms and their tail-index
predictions, Hill and log-log tail estimation, rank-based dependence tools
with Gauss-copula goodness of fit, three drift estimators, and a Monte Carlo
validation harness, all behind the ``outails`` CLI.
"""

from .alpha import (
    AlphaEstimate,
    AlphaMethod,
    BandSpec,
    Theorem4Moments,
    VarianceEstimate,
    alpha_band_crossing,
    alpha_from_spearman,
    alpha_rank,
    alpha_rank_increments,
    alpha_sign_empirical_median,
    alpha_sign_known_median,
    asymptotic_variance,
    count_band_transits,
    g_link,
    mean_excursion_time,
    mean_transit_down,
    mean_transit_up,
    sign_prob,
    theorem4_moments,
)
from .dependence import (
    CopulaFit,
    gauss_copula_cdf,
    gauss_copula_gof,
    gauss_copula_sample,
    pseudo_observations,
    rho_from_spearman,
    spearman_from_rho,
    spearman_perturbation_bound,
    spearman_rho,
)
from .errors import (
    DataError,
    DomainError,
    InsufficientDataError,
    ParseError,
    TransformRangeError,
    UnsupportedSideError,
)
from .ou import (
    OUParams,
    SamplePath,
    autocorrelation,
    increment_correlation,
    simulate_stationary,
    stationary_variance,
    transition_law,
)
from .pipeline import (
    AnalysisConfig,
    PriceSeries,
    SimulatedDataset,
    TailReport,
    gen_synthetic,
    load_csv,
    log_returns,
    rarefy_pairs,
    run_tail_report,
    simulate_dataset,
    spearman_profile,
)
from .rng import RngSeed
from .tails import (
    Side,
    TailEstimate,
    empirical_tail,
    hill_estimator,
    loglog_tail_fit,
    tail_curve,
)
from .transform import (
    PaperTransform,
    SaturationWarning,
    SplineTransform,
    TailIndexReport,
    TailKind,
    Transform,
    apply,
    apply_flagged,
    increment_tail_index,
    invert,
    marginal_cdf,
    stationary_tail_index,
    transform_from_dict,
    transition_tail_index,
)
from .validation import CheckResult, ValidationBudget, ValidationReport, validate_theorems

__version__ = "0.1.0"
