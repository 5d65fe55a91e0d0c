"""Estimators of theta and the Monte Carlo harness that benchmarks them.

The median-inversion estimator maps a sample median back through the
strictly decreasing curve ``theta -> median(theta)``. Inversion is done by
solving ``S(m; theta) = 1/2`` for theta directly, which uses the stochastic
ordering of the family and avoids nesting a root solve inside another.

The maximum-likelihood comparator solves the score equation
``c_theta = mean(log x)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import optimize
from scipy.stats import norm as std_normal

from .distribution import (
    THETA_MAX,
    SampleBatch,
    check_theta,
    log_survival_log,
    median,
    normalization,
    pdf,
    quantile_log,
    sample,
    uniforms,
)
from .errors import DomainError, OutOfRangeError
from .information import CramerRaoBound, cr_bound, fisher
from .quadrature import expn

_LOG_HALF = math.log(0.5)
# Residual at a range edge below which the edge itself is the root.
_EDGE_TOL = 1e-14
#: Trials per work unit. Fixed so results do not depend on the worker count.
CHUNK_TRIALS = 250


@dataclass(frozen=True)
class Estimate:
    """A point estimate; ``clamped`` marks a value pinned to a range edge."""

    value: float
    clamped: bool = False


def _median_root(log_m: float, theta_max: float) -> float:
    def excess(theta):
        return float(log_survival_log(log_m, theta)) - _LOG_HALF

    at_one = excess(1.0)
    if at_one < -_EDGE_TOL:
        raise OutOfRangeError(f"median e**{log_m:.6g} is above the theta = 1 median e**sqrt(2)")
    if at_one <= _EDGE_TOL:
        return 1.0
    at_max = excess(theta_max)
    if at_max > _EDGE_TOL:
        raise OutOfRangeError(f"median e**{log_m:.6g} is below the theta = {theta_max} median")
    if at_max >= -_EDGE_TOL:
        return theta_max
    return optimize.brentq(excess, 1.0, theta_max, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def invert_median(m: float, theta_max: float = THETA_MAX) -> float:
    """The theta whose population median is ``m``.

    Raises:
        OutOfRangeError: If ``m`` lies outside ``[median(theta_max), e**sqrt(2)]``.
    """
    if not m > math.e:
        raise OutOfRangeError(f"median {m} is at or below the support edge e")
    return _median_root(math.log(m), theta_max)


def _theta_from_log_median(log_m: float, theta_max: float) -> Estimate:
    try:
        return Estimate(_median_root(log_m, theta_max))
    except OutOfRangeError:
        # above the theta = 1 median the root would need theta < 1
        if log_m > math.sqrt(2.0):
            return Estimate(1.0, clamped=True)
        return Estimate(theta_max, clamped=True)


def sample_log_median(log_values: np.ndarray) -> float:
    """Log of the sample median; the middle order statistic for odd sizes."""
    k = len(log_values)
    if k == 0:
        raise DomainError("empty batch")
    half = k // 2
    if k % 2:
        return float(np.partition(log_values, half)[half])
    lo, hi = np.partition(log_values, [half - 1, half])[half - 1 : half + 1]
    # x-space mean of the two middle values
    return float(np.logaddexp(lo, hi) - math.log(2.0))


def median_estimator(batch: SampleBatch, theta_max: float = THETA_MAX) -> Estimate:
    """Invert the sample median; medians outside the reachable range are clamped."""
    return _theta_from_log_median(sample_log_median(batch.log_values), theta_max)


def score_offset(theta: float) -> float:
    """``c_theta = E[log X] = E_2(s)/E_3(s)``; decreases from 2 at theta = 1."""
    s = check_theta(theta) - 1.0
    return expn(2, s) / expn(3, s)


def mle_estimator(batch: SampleBatch, theta_max: float = THETA_MAX) -> Estimate:
    """Solve the score equation ``c_theta = mean(log x)`` for theta.

    A mean log above ``c_1 = 2`` has no solution in ``theta >= 1`` and
    returns the boundary ``theta = 1`` flagged as clamped; likewise at
    ``theta_max``.
    """
    if len(batch) == 0:
        raise DomainError("empty batch")
    target = float(np.mean(batch.log_values))
    if target < 1.0:
        raise DomainError("batch contains values below the support edge e")
    if target > 2.0:
        return Estimate(1.0, clamped=True)
    if target == 2.0:
        return Estimate(1.0)
    if target <= score_offset(theta_max):
        return Estimate(theta_max, clamped=True)
    root = optimize.brentq(
        lambda t: score_offset(t) - target, 1.0, theta_max, xtol=1e-14, rtol=4 * np.finfo(float).eps
    )
    return Estimate(root)


def median_slope(theta: float) -> float:
    """``d median / d theta`` by implicit differentiation of ``S(median; theta) = 1/2``.

    ``dS/dtheta = a' u**-2 E_3(s u) - a u**-1 E_2(s u)`` at ``u = log median``;
    one-sided at ``theta = 1``.
    """
    norm = normalization(theta)
    s = norm.theta - 1.0
    m = median(norm.theta)
    u = math.log(m)
    ds_dtheta = norm.da_dtheta * expn(3, s * u) / u**2 - norm.a_theta * expn(2, s * u) / u
    return ds_dtheta / pdf(m, norm.theta)


def clipped_normal_variance(mean: float, sd: float, lo: float, hi: float) -> float:
    """Variance of ``clip(Z, lo, hi)`` for ``Z ~ N(mean, sd**2)``."""
    a = (lo - mean) / sd
    b = (hi - mean) / sd
    cdf_a, cdf_b = std_normal.cdf(a), std_normal.cdf(b)
    pdf_a, pdf_b = std_normal.pdf(a), std_normal.pdf(b)
    mass = cdf_b - cdf_a
    first = lo * cdf_a + hi * (1.0 - cdf_b) + mean * mass + sd * (pdf_a - pdf_b)
    second = (
        lo * lo * cdf_a
        + hi * hi * (1.0 - cdf_b)
        + (mean * mean + sd * sd) * mass
        + 2.0 * mean * sd * (pdf_a - pdf_b)
        + sd * sd * (a * pdf_a - b * pdf_b)
    )
    return float(max(second - first * first, 0.0))


@dataclass(frozen=True)
class MedianLaw:
    """Large-sample law of the median estimator for ``n = 2m + 1`` draws.

    The sample median is approximately normal with variance
    ``1 / (8 m f(median)**2)``; the delta method carries this through the
    inverse curve ``g`` with ``g' = 1 / median_slope``. ``clipped_variance``
    is the variance of that delta-method normal after clamping to
    ``[1, theta_max]``; at ``theta = 1`` roughly half the estimates are
    clamped and neither figure is accurate at moderate n, because the
    median curve is not twice differentiable there.
    """

    theta: float
    n: int
    median_variance: float
    inverse_slope: float
    delta_variance: float
    clipped_variance: float


def median_law(theta: float, n: int, theta_max: float = THETA_MAX) -> MedianLaw:
    theta = check_theta(theta, theta_max)
    half = (n - 1) // 2
    if half < 1:
        raise DomainError("the median law needs n >= 3")
    mu = median(theta)
    med_var = 1.0 / (8.0 * half * pdf(mu, theta) ** 2)
    g_prime = 1.0 / median_slope(theta)
    delta = g_prime**2 * med_var
    clipped = clipped_normal_variance(theta, math.sqrt(delta), 1.0, theta_max)
    return MedianLaw(theta, n, med_var, g_prime, delta, clipped)


Estimator = Union[str, Callable[[SampleBatch], Union[Estimate, float]]]


def trial_seed(seed: int, index: int) -> int:
    """Independent 64-bit seed for trial ``index`` of a run seeded by ``seed``."""
    seq = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return int(seq.generate_state(1, np.uint64)[0])


def _one_trial(theta: float, n: int, estimator: Estimator, seed: int, theta_max: float) -> Estimate:
    if estimator == "median" and n % 2:
        # median of Q(U) is Q(median of U) for the monotone quantile Q
        p = uniforms(n, seed)
        half = n // 2
        log_m = float(quantile_log(np.partition(p, half)[half], theta))
        return _theta_from_log_median(log_m, theta_max)
    batch = sample(n, theta, seed)
    if estimator == "median":
        return median_estimator(batch, theta_max)
    if estimator == "mle":
        return mle_estimator(batch, theta_max)
    est = estimator(batch)
    return est if isinstance(est, Estimate) else Estimate(float(est))


def _run_chunk(args) -> tuple[np.ndarray, np.ndarray]:
    theta, n, estimator, seed, start, stop, theta_max = args
    values = np.empty(stop - start)
    clamped = np.zeros(stop - start, dtype=bool)
    for j, i in enumerate(range(start, stop)):
        est = _one_trial(theta, n, estimator, trial_seed(seed, i), theta_max)
        values[j] = est.value
        clamped[j] = est.clamped
    return values, clamped


def _check_estimator(estimator: Estimator) -> None:
    if isinstance(estimator, str) and estimator not in ("median", "mle"):
        raise DomainError(f"unknown estimator {estimator!r}; use 'median' or 'mle'")


def trial_estimates(
    theta: float,
    n: int,
    trials: int,
    estimator: Estimator = "median",
    seed: int = 0,
    *,
    workers: int = 1,
    theta_max: float = THETA_MAX,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial estimates and clamp flags, in trial order.

    Trial ``i`` draws its batch from ``trial_seed(seed, i)``; work is split
    into fixed chunks of ``CHUNK_TRIALS`` so that the output is identical for
    every worker count.
    """
    theta = check_theta(theta, theta_max)
    _check_estimator(estimator)
    jobs = [
        (theta, n, estimator, seed, start, min(start + CHUNK_TRIALS, trials), theta_max)
        for start in range(0, trials, CHUNK_TRIALS)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(job) for job in jobs]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


@dataclass(frozen=True)
class EstimatorReport:
    theta_true: float
    n: int
    trials: int
    estimator: str
    seed: int
    mean_estimate: float
    bias: float
    bias_se: float
    variance: float
    variance_se: float
    rmse: float
    clamp_rate: float
    asymptotic_variance: Optional[float]
    clipped_asymptotic_variance: Optional[float]
    cr_bound: CramerRaoBound


def _variance_se(values: np.ndarray) -> float:
    centered = values - values.mean()
    var = centered.var(ddof=1)
    fourth = np.mean(centered**4)
    return math.sqrt(max(fourth - var * var, 0.0) / len(values))


def run_experiment(
    theta: float,
    n: int,
    trials: int,
    estimator: Estimator = "median",
    seed: int = 0,
    *,
    bias_curve: Optional["BiasCurve"] = None,
    workers: int = 1,
    theta_max: float = THETA_MAX,
) -> EstimatorReport:
    """Monte Carlo bias and variance of an estimator at ``theta``.

    ``n`` must be odd (``n = 2m + 1``). The attached Cramér–Rao bound uses the
    bias slope interpolated from ``bias_curve`` when one is given, else 0.

    Raises:
        DomainError: On even ``n``, fewer than two trials, or an unknown
            estimator name.
    """
    theta = check_theta(theta, theta_max)
    if int(n) != n or n < 1 or n % 2 == 0:
        raise DomainError("n must be an odd positive integer (n = 2m + 1)")
    if int(trials) != trials or trials < 2:
        raise DomainError("trials must be an integer >= 2")
    n, trials = int(n), int(trials)
    values, clamped = trial_estimates(
        theta, n, trials, estimator, seed, workers=workers, theta_max=theta_max
    )
    mean = float(values.mean())
    variance = float(values.var(ddof=1))
    name = estimator if isinstance(estimator, str) else getattr(estimator, "__name__", "custom")

    asymptotic = clipped = None
    if estimator == "median" and n >= 3:
        law = median_law(theta, n, theta_max)
        asymptotic, clipped = law.delta_variance, law.clipped_variance
    elif estimator == "mle":
        info = fisher(theta)
        if info.finite:
            asymptotic = 1.0 / (n * info.value)

    slope = bias_curve.slope_at(theta) if bias_curve is not None else 0.0
    return EstimatorReport(
        theta_true=theta,
        n=n,
        trials=trials,
        estimator=name,
        seed=int(seed),
        mean_estimate=mean,
        bias=mean - theta,
        bias_se=math.sqrt(variance / trials),
        variance=variance,
        variance_se=_variance_se(values),
        rmse=float(np.sqrt(np.mean((values - theta) ** 2))),
        clamp_rate=float(clamped.mean()),
        asymptotic_variance=asymptotic,
        clipped_asymptotic_variance=clipped,
        cr_bound=cr_bound(theta, n, slope),
    )


@dataclass(frozen=True)
class BiasCurve:
    """Estimated bias ``F(theta) = E[est] - theta`` on a grid, and its slope.

    Slopes are centered differences at interior grid points. All grid points
    share the same trial seeds, so slope errors come from paired per-trial
    differences.
    """

    thetas: tuple[float, ...]
    bias: tuple[float, ...]
    bias_se: tuple[float, ...]
    slope_thetas: tuple[float, ...]
    slopes: tuple[float, ...]
    slope_se: tuple[float, ...]

    def slope_at(self, theta: float) -> float:
        lo, hi = self.slope_thetas[0], self.slope_thetas[-1]
        if not lo - 1e-12 <= theta <= hi + 1e-12:
            raise DomainError(f"theta {theta} outside the interior grid [{lo}, {hi}]")
        return float(np.interp(theta, self.slope_thetas, self.slopes))


def estimate_bias_curve(
    theta_grid,
    n: int,
    trials: int,
    estimator: Estimator = "median",
    seed: int = 0,
    *,
    workers: int = 1,
    theta_max: float = THETA_MAX,
) -> BiasCurve:
    grid = [check_theta(t, theta_max) for t in theta_grid]
    if len(grid) < 3:
        raise DomainError("bias curve needs at least 3 grid points")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("theta grid must be strictly increasing")
    if int(trials) != trials or trials < 2:
        raise DomainError("trials must be an integer >= 2")
    runs = [
        trial_estimates(t, n, trials, estimator, seed, workers=workers, theta_max=theta_max)[0]
        for t in grid
    ]
    bias = [float(r.mean() - t) for r, t in zip(runs, grid)]
    bias_se = [float(r.std(ddof=1) / math.sqrt(trials)) for r in runs]
    slope_thetas, slopes, slope_se = [], [], []
    for i in range(1, len(grid) - 1):
        width = grid[i + 1] - grid[i - 1]
        paired = (runs[i + 1] - runs[i - 1]) / width - 1.0
        slope_thetas.append(grid[i])
        slopes.append(float(paired.mean()))
        slope_se.append(float(paired.std(ddof=1) / math.sqrt(trials)))
    return BiasCurve(
        tuple(grid), tuple(bias), tuple(bias_se), tuple(slope_thetas), tuple(slopes), tuple(slope_se)
    )
