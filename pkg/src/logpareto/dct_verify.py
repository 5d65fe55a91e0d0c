"""Numerical checks of the dominating bound that licenses differentiating
``1/a_theta`` under the integral sign at ``theta = 1``.

The difference quotient integrand is ``(1 - x**h) / (h x**h) / (x log(x)**3)``.
Its first factor is bounded by ``e log x`` for every ``h > 0`` and tends to
``-log x`` as ``h -> 0+``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .quadrature import expn, quad_log_space

H_GRID = (1e-8, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
X_GRID = (math.e, math.exp(1.01), math.exp(2.0), math.exp(4.0), math.exp(10.0), 1e6)
LIMIT_LADDER = tuple(10.0**-k for k in range(0, 9))


def difference_ratio(h: float, log_x: float) -> float:
    """``(1 - x**h) / (h x**h)`` as ``expm1(-h log x) / h``.

    ``x**h`` is never formed, so large ``h log x`` cannot overflow, and
    ``expm1`` keeps full precision when ``h log x`` is tiny.
    """
    return math.expm1(-h * log_x) / h


@dataclass(frozen=True)
class DominationCheck:
    h: float
    x: float
    ratio: float
    bound: float

    @property
    def ok(self) -> bool:
        return abs(self.ratio) <= self.bound


def domination_holds(h: float, x: float) -> DominationCheck:
    """Compare ``|(1 - x**h) / (h x**h)|`` with ``e log x`` at one point.

    Raises:
        DomainError: If ``h <= 0`` or ``x < e``.
    """
    if not h > 0:
        raise DomainError("h must be positive")
    if not x >= math.e:
        raise DomainError("x must be at least e")
    log_x = math.log(x)
    return DominationCheck(h, x, difference_ratio(h, log_x), math.e * log_x)


def domination_grid(hs=H_GRID, xs=X_GRID) -> list[DominationCheck]:
    return [domination_holds(h, x) for h in hs for x in xs]


def split_bound_holds(check: DominationCheck) -> bool | None:
    """In the regime ``1/h <= log x`` the sharper bound ``2 log x`` applies.

    Returns None outside that regime.
    """
    log_x = math.log(check.x)
    if 1.0 / check.h > log_x:
        return None
    return abs(check.ratio) <= 2.0 * log_x


@dataclass(frozen=True)
class LimitReport:
    x: float
    limit: float
    hs: tuple[float, ...]
    ratios: tuple[float, ...]
    deviations: tuple[float, ...]

    @property
    def max_tail_deviation(self) -> float:
        return max(self.deviations[-3:])

    @property
    def shrinking(self) -> bool:
        """Deviation decreases strictly over the last three ladder points."""
        tail = self.deviations[-3:]
        return all(b < a for a, b in zip(tail, tail[1:]))


def limit_check(x: float, hs) -> LimitReport:
    """Track ``(1 - x**h) / (h x**h)`` toward ``-log x`` along decreasing ``h``."""
    if not x >= math.e:
        raise DomainError("x must be at least e")
    hs = tuple(float(h) for h in hs)
    if not hs or any(h <= 0 for h in hs) or any(b >= a for a, b in zip(hs, hs[1:])):
        raise DomainError("h sequence must be positive and strictly decreasing")
    log_x = math.log(x)
    ratios = tuple(difference_ratio(h, log_x) for h in hs)
    deviations = tuple(abs(r + log_x) for r in ratios)
    return LimitReport(x, -log_x, hs, ratios, deviations)


def quotient_integral(h: float, rtol: float = 1e-12) -> float:
    """``∫_e^∞ (1 - x**h)/(h x**h) dx/(x log**3 x)`` by quadrature in ``u = log x``.

    The integrand is ``expm1(-h u)/h * u**-3``; panels double out to the
    ``1/h`` decay scale.
    """
    if not h > 0:
        raise DomainError("h must be positive")
    return quad_log_space(lambda u: math.expm1(-h * u) / h * u**-3, 1.0, math.inf, rtol=rtol)


def quotient_integral_closed_form(h: float) -> float:
    """``(E_3(h) - 1/2) / h``, the same integral through ``E_3``."""
    return (expn(3, h) - 0.5) / h


def dominated_limit_integral(ladder=LIMIT_LADDER) -> tuple[float, np.ndarray]:
    """Quadrature ladder of the difference-quotient integral toward ``h = 0+``.

    Returns the value at the smallest ``h`` (the limit estimate, which tends
    to ``-1``) and the full ladder of values.
    """
    values = np.array([quotient_integral(h) for h in ladder])
    return float(values[-1]), values
