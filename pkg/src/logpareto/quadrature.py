"""Log-space quadrature and generalized exponential integrals.

Every integral of the form ``∫_e^X dx / (x**theta * log(x)**p)`` becomes,
after ``u = log x``,

    ∫_1^U exp(-s*u) * u**(-p) du,      s = theta - 1,  U = log X,

which is an incomplete generalized exponential integral. ``expn`` supplies
the closed form ``E_n(s) = ∫_1^∞ exp(-s*t) t**(-n) dt`` and
``integrate_log_kernel`` evaluates the same quantity by adaptive quadrature,
so each route can check the other.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import DomainError, NumericalError

#: Default relative tolerance for quadrature; override per call with ``rtol``.
RTOL_INTEGRAL = 1e-10


def _check_order(n: int) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"order must be an integer >= 1, got {n!r}")
    return int(n)


def _check_arg(s) -> np.ndarray:
    z = np.asarray(s, dtype=float)
    if np.any(np.isnan(z)) or np.any(z < 0):
        raise DomainError("argument of E_n must be >= 0")
    return z


def _finish(out, z):
    if np.any(np.isnan(out)):
        raise NumericalError("E_n evaluation did not converge")
    return float(out) if z.ndim == 0 else out


def expn_scaled(n, s):
    """Return ``exp(s) * E_n(s)``; finite for all s > 0 without underflow.

    Accepts scalars or arrays. ``E_1(0)`` maps to ``inf``.
    """
    n = _check_order(n)
    z = _check_arg(s)
    return _finish(_kernels.expn_scaled_ufunc(n, z), z)


def expn(n, s):
    """Generalized exponential integral ``E_n(s) = ∫_1^∞ e^{-st} t^{-n} dt``.

    Power series for ``s <= 2`` and a continued fraction beyond.

    Args:
        n: Integer order, ``n >= 1``.
        s: Argument(s), ``s >= 0``. Scalar or array.

    Returns:
        ``E_n(s)`` with relative accuracy about 1e-15. ``E_1(0)`` is the
        divergent case and is returned as ``inf``.

    Raises:
        DomainError: If ``n < 1`` or ``s < 0``.
    """
    n = _check_order(n)
    z = _check_arg(s)
    out = _kernels.expn_scaled_ufunc(n, z) * np.exp(-z)
    return _finish(out, z)


def log_expn(n, s):
    """``log E_n(s)``, computed without underflow for large s."""
    z = np.asarray(s, dtype=float)
    return np.log(expn_scaled(n, z)) - z


def upper_incomplete(n: int, s: float, u: float) -> float:
    """``∫_u^∞ e^{-st} t^{-n} dt = u^{1-n} E_n(s*u)`` for u >= 1."""
    return u ** (1 - n) * expn(n, s * u)


class Divergence(enum.Enum):
    CONVERGENT = "convergent"
    LOG_DIVERGENT = "log-divergent"
    POWER_DIVERGENT = "power-divergent"


def classify_divergence(theta: float, log_power: int, *, verify: bool = True) -> Divergence:
    """Classify ``∫_e^∞ dx / (x**theta log(x)**p)``.

    The class follows from the exponents alone; with ``verify`` the answer is
    also checked against the increments of the truncated integral on a
    doubling ladder ``U, 2U, 4U, 8U``.

    Raises:
        NumericalError: If the ladder contradicts the analytic class.
    """
    if theta < 1:
        kind = Divergence.POWER_DIVERGENT
    elif theta > 1 or log_power >= 2:
        kind = Divergence.CONVERGENT
    else:
        kind = Divergence.LOG_DIVERGENT
    if verify:
        observed = ladder_class(theta, log_power)
        if observed is not kind:
            raise NumericalError(
                f"truncation ladder suggests {observed.value}, expected {kind.value}"
            )
    return kind


def doubling_increments(theta: float, log_power: int, u0: float = 8.0, steps: int = 4) -> np.ndarray:
    """Increments of the truncated integral over ``[U_k, 2 U_k]`` for ``U_k = u0 2^k``."""
    edges = u0 * 2.0 ** np.arange(steps + 1)
    return np.array(
        [
            integrate_log_kernel(theta, log_power, hi, lower=lo)
            for lo, hi in zip(edges[:-1], edges[1:])
        ]
    )


def ladder_class(theta: float, log_power: int, u0: float = 8.0) -> Divergence:
    """Empirical classification from the doubling-increment pattern.

    Constant increments mean log growth, increments that grow by a factor
    each step mean power (exponential in log-space) growth, and shrinking
    increments mean convergence.
    """
    inc = doubling_increments(theta, log_power, u0=u0)
    ratios = inc[1:] / inc[:-1]
    if np.all(ratios > 1.5):
        return Divergence.POWER_DIVERGENT
    if abs(ratios[-1] - 1.0) < 0.05:
        return Divergence.LOG_DIVERGENT
    return Divergence.CONVERGENT


def _geometric_edges(lo: float, hi: float) -> list[float]:
    edges = [lo]
    x = lo
    while x * 2.0 < hi:
        x *= 2.0
        edges.append(x)
    edges.append(hi)
    return edges


def quad_log_space(func, lower: float = 1.0, upper: float = math.inf, rtol: float = RTOL_INTEGRAL) -> float:
    """Adaptive quadrature of ``func(u)`` on ``[lower, upper]``.

    The range is cut into doubling panels so that both ``1/u``-type tails
    and exponential decay are resolved; the semi-infinite remainder goes to
    QUADPACK's transformed rule.
    """
    if upper <= lower:
        return 0.0
    finite_hi = upper if math.isfinite(upper) else max(64.0 * lower, lower + 64.0)
    pieces = []
    edges = _geometric_edges(lower, finite_hi)
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(func, a, b, epsabs=0.0, epsrel=rtol, limit=200)
        pieces.append(val)
    if not math.isfinite(upper):
        val, _ = integrate.quad(func, finite_hi, math.inf, epsabs=0.0, epsrel=rtol, limit=200)
        pieces.append(val)
    return math.fsum(pieces)


def integrate_log_kernel(
    theta: float,
    log_power: int,
    upper: float = math.inf,
    *,
    lower: float = 1.0,
    rtol: float = RTOL_INTEGRAL,
) -> float:
    """Evaluate ``∫_e^{exp(upper)} dx / (x**theta log(x)**log_power)`` in log-space.

    Computed as ``∫_lower^upper exp(-(theta-1) u) u**(-log_power) du`` by
    quadrature; ``upper`` is the log of the x-space cutoff so that cutoffs
    like ``e**700`` stay representable.

    Returns:
        The integral, or ``inf`` when ``upper`` is infinite and the integral
        diverges.
    """
    log_power = _check_order(log_power)
    if upper <= lower:
        return 0.0
    s = theta - 1.0
    if not math.isfinite(upper) and not (s > 0 or log_power >= 2):
        return math.inf

    def integrand(u):
        return math.exp(-s * u) * u ** (-log_power)

    return quad_log_space(integrand, lower, upper, rtol=rtol)


def log_kernel_closed_form(theta: float, log_power: int, upper: float = math.inf) -> float:
    """Closed form of ``integrate_log_kernel`` through ``E_n``.

    ``∫_1^U e^{-su} u^{-p} du = E_p(s) - U^{1-p} E_p(s U)``.
    """
    p = _check_order(log_power)
    s = theta - 1.0
    if s < 0:
        raise DomainError("closed form needs theta >= 1")
    if upper <= 1.0:
        return 0.0
    if s == 0.0:
        if p == 1:
            return math.log(upper)
        if not math.isfinite(upper):
            return 1.0 / (p - 1)
        return -math.expm1((1 - p) * math.log(upper)) / (p - 1)
    if not math.isfinite(upper):
        return expn(p, s)
    return expn(p, s) - upper_incomplete(p, s, upper)
