"""Max rank-correlation independence screening.

Given an x vector and many candidate columns, the package computes a rank
correlation coefficient per column, tests the maximum against a block
multiplier bootstrap null, and screens individual columns with familywise
error control. Includes the MSE-optimal block length rule and a Monte Carlo
study harness.
"""

from .blocksize import (
    approx_block_size,
    block_size_mse,
    bootstrap_variance_mean,
    bootstrap_variance_var,
    exact_null_variance,
    optimal_block_size,
    optimal_block_size_fast,
)
from .bootstrap import (
    BlockScheme,
    BootstrapConfig,
    BootstrapDraws,
    block_sums,
    bootstrap_statistics,
    build_block_scheme,
    critical_value,
    draw_multipliers,
    influence_terms,
    subset_max,
)
from .errors import (
    BadTau,
    BlockTooLarge,
    DegenerateColumn,
    DegenerateVariance,
    EmptySubset,
    NotPositiveDefinite,
    SampleTooSmall,
    TiesPresent,
    XimaxError,
)
from .ingest import MatrixFormatError, load_matrix
from .ranks import (
    PairedSample,
    TieBreakConfig,
    concomitant_ranks,
    resolve_ties,
    xi,
    xi_all,
)
from .simlab import (
    MCResult,
    ModelSpec,
    MomentEstimate,
    VarianceProxyStudy,
    gen_model1,
    gen_model2,
    gen_model3,
    generate,
    results_to_csv,
    run_rejection_study,
    simulate_bootstrap_variance,
    simulate_influence_moments,
)
from .testing import (
    HypothesisRecord,
    StepdownResult,
    StepdownStep,
    TestConfig,
    TestResult,
    max_test,
    stepdown,
)

__version__ = "0.1.0"

__all__ = [
    "BadTau",
    "BlockScheme",
    "BlockTooLarge",
    "BootstrapConfig",
    "BootstrapDraws",
    "DegenerateColumn",
    "DegenerateVariance",
    "EmptySubset",
    "HypothesisRecord",
    "MCResult",
    "MatrixFormatError",
    "ModelSpec",
    "MomentEstimate",
    "NotPositiveDefinite",
    "PairedSample",
    "SampleTooSmall",
    "StepdownResult",
    "StepdownStep",
    "TestConfig",
    "TestResult",
    "TieBreakConfig",
    "TiesPresent",
    "VarianceProxyStudy",
    "XimaxError",
    "approx_block_size",
    "block_size_mse",
    "block_sums",
    "bootstrap_statistics",
    "bootstrap_variance_mean",
    "bootstrap_variance_var",
    "build_block_scheme",
    "concomitant_ranks",
    "critical_value",
    "draw_multipliers",
    "exact_null_variance",
    "gen_model1",
    "gen_model2",
    "gen_model3",
    "generate",
    "influence_terms",
    "load_matrix",
    "max_test",
    "optimal_block_size",
    "optimal_block_size_fast",
    "resolve_ties",
    "results_to_csv",
    "run_rejection_study",
    "simulate_bootstrap_variance",
    "simulate_influence_moments",
    "stepdown",
    "subset_max",
    "xi",
    "xi_all",
]
