"""Locally private distribution estimation on [0, 1] by wavelet coefficients.

The library estimates the distribution of bounded numerical data from
randomized user reports.  Each user reports through a signed subset-selection
randomizer at one wavelet level; the server aggregates unbiased coefficient
estimates, post-processes them into a valid density, and reads off cdfs,
range queries, and distances.  Binning baselines (kRR and OUE frequency
oracles) and a benchmark CLI are included for comparison studies.
"""

from .baselines import (
    FrequencyVector,
    Oracle,
    binned_cdf,
    binning_estimate,
    choose_oracle,
    krr_estimate,
    krr_perturb,
    normsub,
    oue_estimate,
    oue_perturb,
)
from .datagen import Dataset, gen_beta, gen_squarewave, ingest
from .estimator import (
    AllocationPlan,
    EstimatorConfig,
    allocate,
    compute_bound,
    estimate,
    postprocess,
    select_J,
)
from .haar import (
    CoefficientTree,
    HaarIndex,
    PiecewisePdf,
    StepCdf,
    cdf_of,
    eval_psi,
    exact_coefficients,
    reconstruct_pdf,
)
from .mechanism import (
    EncodedReport,
    MechanismParams,
    PerturbedReport,
    aggregate_level,
    derive_params,
    encode,
    ldp_ratio_audit,
    level_variance,
    optimal_m,
    perturb_fast,
    perturb_reference,
)
from .metrics import empirical_cdf, ks, range_query_mae, wasserstein

__version__ = "0.1.0"

__all__ = [
    "AllocationPlan",
    "CoefficientTree",
    "Dataset",
    "EncodedReport",
    "EstimatorConfig",
    "FrequencyVector",
    "HaarIndex",
    "MechanismParams",
    "Oracle",
    "PerturbedReport",
    "PiecewisePdf",
    "StepCdf",
    "aggregate_level",
    "allocate",
    "binned_cdf",
    "binning_estimate",
    "cdf_of",
    "choose_oracle",
    "compute_bound",
    "derive_params",
    "empirical_cdf",
    "encode",
    "estimate",
    "eval_psi",
    "exact_coefficients",
    "gen_beta",
    "gen_squarewave",
    "ingest",
    "krr_estimate",
    "krr_perturb",
    "ks",
    "ldp_ratio_audit",
    "level_variance",
    "normsub",
    "optimal_m",
    "oue_estimate",
    "oue_perturb",
    "perturb_fast",
    "perturb_reference",
    "postprocess",
    "range_query_mae",
    "reconstruct_pdf",
    "select_J",
    "wasserstein",
]
