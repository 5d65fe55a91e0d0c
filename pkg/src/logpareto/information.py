"""Fisher information of the family and Cramér–Rao bounds built from it.

With ``u = log x`` the score is ``c_theta - u`` and the information is the
variance of ``log X``:

    I(theta) = E_1(s)/E_3(s) - (E_2(s)/E_3(s))**2,   s = theta - 1.

At ``theta = 1`` ``E_1(0)`` is infinite; the truncated information over
``x in [e, e**U]`` then grows like ``2 log U``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .distribution import check_theta, normalization
from .errors import DomainError
from .quadrature import expn, log_kernel_closed_form, quad_log_space

#: Truncation ladder used to detect divergence: U_k = LADDER_U0 * 2**k.
LADDER_U0 = 8.0
LADDER_STEPS = 7
#: Consecutive ladder increments within this relative spread count as constant.
INCREMENT_SPREAD = 0.05


def fisher_truncated(theta: float, upper: float, rtol: float = 1e-12) -> float:
    """Information restricted to ``x in [e, e**upper]``, by quadrature in u.

    ``a_theta ∫_1^upper (c_theta - u)**2 exp(-(theta-1) u) u**-3 du``.
    """
    norm = normalization(theta)
    if upper <= 1.0:
        return 0.0
    s = norm.theta - 1.0
    c = norm.score_offset

    def integrand(u):
        return (c - u) ** 2 * math.exp(-s * u) * u**-3

    return norm.a_theta * quad_log_space(integrand, 1.0, upper, rtol=rtol)


def fisher_truncated_closed_form(theta: float, upper: float) -> float:
    """Same quantity as ``fisher_truncated`` through incomplete ``E_n`` values.

    Expands ``(c - u)**2 u**-3`` into ``c**2 u**-3 - 2c u**-2 + u**-1``.
    """
    norm = normalization(theta)
    if upper <= 1.0:
        return 0.0
    c = norm.score_offset
    t3, t2, t1 = (log_kernel_closed_form(norm.theta, p, upper) for p in (3, 2, 1))
    return norm.a_theta * (c * c * t3 - 2.0 * c * t2 + t1)


@dataclass(frozen=True)
class LogGrowthFit:
    """Fit ``J(U) ≈ rate ln U + offset + tail[0]/U + tail[1]/U**2`` over a truncation ladder."""

    uppers: tuple[float, ...]
    values: tuple[float, ...]
    rate: float
    offset: float
    tail: tuple[float, float]

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    @property
    def divergent(self) -> bool:
        """Increments per doubling settle at a positive constant."""
        inc = self.increments
        if inc[-1] <= 0.0 or self.rate <= 0.0:
            return False
        return abs(inc[-1] - inc[-2]) <= INCREMENT_SPREAD * inc[-1]


def information_ladder(theta: float, u0: float = LADDER_U0, steps: int = LADDER_STEPS) -> LogGrowthFit:
    """Truncated information on ``U_k = u0 2**k`` and its log-growth fit.

    The ``1/U`` and ``1/U**2`` columns absorb the finite-range corrections so
    that the ``ln U`` coefficient is the asymptotic rate.
    """
    uppers = u0 * 2.0 ** np.arange(steps)
    values = np.array([fisher_truncated(theta, u) for u in uppers])
    design = np.column_stack([np.log(uppers), np.ones_like(uppers), 1.0 / uppers, uppers**-2.0])
    (rate, offset, t1, t2), *_ = np.linalg.lstsq(design, values, rcond=None)
    return LogGrowthFit(
        tuple(float(u) for u in uppers),
        tuple(float(v) for v in values),
        float(rate),
        float(offset),
        (float(t1), float(t2)),
    )


@dataclass(frozen=True)
class InformationResult:
    """Fisher information: a finite value, or a divergent log-growth record."""

    theta: float
    kind: Literal["finite", "divergent"]
    value: Optional[float] = None
    rate: Optional[float] = None
    offset: Optional[float] = None

    @property
    def finite(self) -> bool:
        return self.kind == "finite"

    def describe(self) -> str:
        if self.finite:
            return f"finite: I = {self.value:.10g}"
        sign = "-" if self.offset < 0 else "+"
        return f"divergent: J(U) ~ {self.rate:.2f}*ln U {sign} {abs(self.offset):.1f}"


def fisher(theta: float) -> InformationResult:
    """Fisher information at ``theta``.

    For ``theta > 1`` returns the closed form. At ``theta = 1`` the integral
    diverges; the result carries the rate and offset of ``J(U) ≈ rate ln U +
    offset`` fitted on the truncation ladder.
    """
    theta = check_theta(theta)
    if theta == 1.0:
        fit = information_ladder(theta)
        return InformationResult(theta, "divergent", rate=fit.rate, offset=fit.offset)
    s = theta - 1.0
    e1, e2, e3 = expn(1, s), expn(2, s), expn(3, s)
    ratio = e2 / e3
    return InformationResult(theta, "finite", value=e1 / e3 - ratio * ratio)


def detect_divergence(theta: float) -> InformationResult:
    """Classify the information integral from the ladder alone, with no use of ``theta == 1``."""
    theta = check_theta(theta)
    fit = information_ladder(theta)
    if fit.divergent:
        return InformationResult(theta, "divergent", rate=fit.rate, offset=fit.offset)
    return InformationResult(theta, "finite", value=float(fit.values[-1]))


@dataclass(frozen=True)
class CramerRaoBound:
    """Lower bound ``(1 + bias_slope)**2 / (n I)`` on an estimator's variance.

    ``trivial`` marks the divergent-information case, where the bound is 0
    and says nothing.
    """

    theta: float
    n: int
    bias_slope: float
    bound: float
    trivial: bool
    information: InformationResult


def cr_bound(theta: float, n: int, bias_slope: float = 0.0) -> CramerRaoBound:
    """Cramér–Rao bound for ``n`` i.i.d. draws, generalized for a biased estimator.

    ``bias_slope`` is the derivative of the estimator's bias in theta; 0
    gives the classical unbiased bound.
    """
    if int(n) != n or n < 1:
        raise DomainError("sample size n must be an integer >= 1")
    n = int(n)
    info = fisher(theta)
    if not info.finite:
        return CramerRaoBound(info.theta, n, bias_slope, 0.0, True, info)
    bound = (1.0 + bias_slope) ** 2 / (n * info.value)
    return CramerRaoBound(info.theta, n, bias_slope, bound, False, info)
