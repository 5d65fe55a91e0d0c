"""Log-perturbed Pareto family: densities, Fisher information, Cramér–Rao bounds, estimators."""

from .distribution import (
    THETA_MAX,
    NormalizationResult,
    SampleBatch,
    cdf,
    log_pdf,
    median_curve,
    normalization,
    pdf,
    quantile,
    quantile_log,
    sample,
    score,
    survival,
)
from .errors import DomainError, NumericalError, OutOfRangeError
from .estimators import (
    BiasCurve,
    Estimate,
    EstimatorReport,
    estimate_bias_curve,
    invert_median,
    median_estimator,
    mle_estimator,
    run_experiment,
)
from .information import CramerRaoBound, InformationResult, cr_bound, fisher, fisher_truncated
from .quadrature import Divergence, classify_divergence, expn, integrate_log_kernel

__version__ = "0.1.0"
