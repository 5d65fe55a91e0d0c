"""The log-perturbed Pareto family ``f(x; theta) = a_theta x**-theta log(x)**-3`` on ``x >= e``.

All heavy lifting happens in ``u = log x``, where the density becomes
``a_theta exp(-(theta-1) u) u**-3`` on ``u >= 1`` and the survival function
has the closed form ``S = a_theta u**-2 E_3((theta-1) u)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, NumericalError
from .quadrature import expn

#: Upper end of the admissible parameter range.
THETA_MAX = 10.0
#: Parameters this close to 1 are treated as exactly 1.
THETA_SNAP = 1e-12
#: Largest uniform variate fed to the inverse CDF.
P_CAP = 1.0 - 1e-12
#: Step tolerance of the quantile solver in u-space (relative for u > 1).
QUANTILE_UTOL = 1e-12

E = math.e


def check_theta(theta: float, theta_max: float = THETA_MAX) -> float:
    """Validate a family parameter and snap values within ``THETA_SNAP`` of 1."""
    theta = float(theta)
    if math.isnan(theta):
        raise DomainError("theta is NaN")
    if theta < 1.0:
        raise DomainError(f"theta below 1 ({theta}): the normalization integral diverges")
    if theta > theta_max:
        raise DomainError(f"theta above theta_max ({theta} > {theta_max})")
    if theta - 1.0 <= THETA_SNAP:
        return 1.0
    return theta


@dataclass(frozen=True)
class NormalizationResult:
    theta: float
    a_theta: float
    da_dtheta: float

    @property
    def score_offset(self) -> float:
        """``c_theta = a'/a``, the constant part of the score (equals E[log X])."""
        return self.da_dtheta / self.a_theta


def normalization(theta: float) -> NormalizationResult:
    """Normalization constant ``a_theta`` and its derivative in theta.

    ``1/a_theta = E_3(theta-1)`` and ``d(1/a)/dtheta = -E_2(theta-1)``, so
    ``da/dtheta = a**2 E_2(theta-1)``. At ``theta = 1`` this is the one-sided
    derivative, finite because ``E_2(0) = 1``.
    """
    theta = check_theta(theta)
    s = theta - 1.0
    a = 1.0 / expn(3, s)
    return NormalizationResult(theta, a, a * a * expn(2, s))


def _log_a(theta: float) -> float:
    s = theta - 1.0
    return s - math.log(_kernels.expn_scaled_scalar(3, s))


def pdf(x, theta: float):
    """Density; zero below ``e``. Works elementwise on arrays."""
    theta = check_theta(theta)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = x >= E
    xs = x[inside]
    logx = np.log(xs)
    out[inside] = np.exp(_log_a(theta) - theta * logx - 3.0 * np.log(logx))
    return float(out) if out.ndim == 0 else out


def log_pdf(x, theta: float):
    """Log-density; ``-inf`` below ``e``."""
    theta = check_theta(theta)
    x = np.asarray(x, dtype=float)
    out = np.full_like(x, -math.inf)
    inside = x >= E
    logx = np.log(x[inside])
    out[inside] = _log_a(theta) - theta * logx - 3.0 * np.log(logx)
    return float(out) if out.ndim == 0 else out


def log_survival_log(u, theta: float):
    """``log P(log X > u)``; 0 for ``u <= 1``."""
    theta = check_theta(theta)
    u = np.asarray(u, dtype=float)
    out = _kernels.log_survival_ufunc(u, theta - 1.0, _log_a(theta))
    return float(out) if out.ndim == 0 else out


def survival(x, theta: float):
    """``P(X > x) = a_theta log(x)**-2 E_3((theta-1) log x)`` for ``x >= e``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        u = np.log(np.maximum(x, 1.0))
    return np.exp(log_survival_log(u, theta))


def cdf(x, theta: float):
    """Distribution function; 0 below ``e``, tends to 1 as ``x`` grows."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        u = np.log(np.maximum(x, 1.0))
    return -np.expm1(log_survival_log(u, theta))


def _check_p(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(np.isnan(p)) or np.any(p < 0.0) or np.any(p >= 1.0):
        raise DomainError("probability must lie in [0, 1)")
    return p


def quantile_log(p, theta: float):
    """``log`` of the p-quantile, solved by bracketed Newton in u-space.

    Stays finite where ``quantile`` itself would overflow (at ``theta = 1``
    this happens for ``1 - p < 2e-6``).
    """
    theta = check_theta(theta)
    p = _check_p(p)
    u = _kernels.quantile_u_ufunc(np.log1p(-p), theta - 1.0, _log_a(theta), QUANTILE_UTOL)
    if np.any(np.isnan(u)):
        raise NumericalError("quantile solver failed to converge")
    return float(u) if u.ndim == 0 else u


def quantile(p, theta: float):
    """Inverse CDF on ``[0, 1)``; ``quantile(0) = e``.

    Raises:
        DomainError: If ``p`` is outside ``[0, 1)``.
    """
    with np.errstate(over="ignore"):
        return np.exp(quantile_log(p, theta))


def median(theta: float) -> float:
    return float(quantile(0.5, theta))


def median_curve(theta_grid) -> list[tuple[float, float]]:
    """Population median over a grid of parameters, as ``(theta, median)`` pairs."""
    grid = [float(t) for t in theta_grid]
    if not grid:
        raise DomainError("theta grid is empty")
    return [(t, median(t)) for t in grid]


def score(x, theta: float):
    """``d log f / d theta = c_theta - log x``.

    Raises:
        DomainError: If any ``x < e``; the log-density is undefined there.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < E):
        raise DomainError("score is undefined below the support edge e")
    out = normalization(theta).score_offset - np.log(x)
    return float(out) if out.ndim == 0 else out


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise DomainError("seed must be an unsigned 64-bit integer")
    return seed


@dataclass(frozen=True)
class SampleBatch:
    """I.i.d. draws, held as ``log x`` so that far-tail draws stay finite."""

    theta: float
    seed: int
    log_values: np.ndarray = field(repr=False)

    @property
    def values(self) -> np.ndarray:
        """Draws in x-space; entries beyond ``e**709`` are ``inf``."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    def __len__(self) -> int:
        return len(self.log_values)


def uniforms(n: int, seed: int) -> np.ndarray:
    """The capped uniform variates behind ``sample(n, theta, seed)``."""
    rng = np.random.default_rng(_check_seed(seed))
    return np.minimum(rng.random(n), P_CAP)


def sample(n: int, theta: float, seed: int) -> SampleBatch:
    """Draw ``n`` values by inverse CDF; bit-identical for equal ``(n, theta, seed)``."""
    if int(n) != n or n < 1:
        raise DomainError("sample size must be a positive integer")
    theta = check_theta(theta)
    seed = _check_seed(seed)
    return SampleBatch(theta, seed, quantile_log(uniforms(int(n), seed), theta))
