"""Simultaneous likelihood-based confidence sets via the multiplier bootstrap."""

from ._backend import BACKEND
from .dgp import DgpSpec, bump_mean, flat_mean
from .diagnostics import (
    BiasDiagnostics,
    bias_diagnostics,
    bias_norm_lc,
    bias_norm_lq,
    score_vector,
    wilks_residual,
)
from .engine import (
    Band,
    CorrectionResult,
    LrMatrix,
    build_lr_matrix,
    critical_values,
    marginal_quantile,
    multiplicity_correction,
    simultaneous_band,
    union_exceedance,
)
from .errors import (
    ConfigError,
    DegenerateWeights,
    InvalidAlpha,
    InvalidTau,
    NegativeMultiplier,
    NonPositiveCurvature,
    NumericalFailure,
    SingularH2,
    TooManyRejections,
)
from .models import (
    Dataset,
    Family,
    FitResult,
    GridDesign,
    KernelSpec,
    ModelGrid,
    kernel_value,
    lc_fit,
    local_weights,
    loglik,
    loglik_ratio,
    lq_fit,
    qt_fit,
    target_params,
)
from .oracle import CoverageReport, coverage_experiment, mc_correction, sample_dataset, true_lr_matrix
from .rng import RngSpec, WeightScheme, draw_weights

