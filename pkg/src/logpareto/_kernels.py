"""Compiled scalar kernels for the hot loops (E_n and inverse-CDF solves)."""

import math

from numba import njit, vectorize

EULER_GAMMA = 0.5772156649015329
_EPS = 1e-16
_FPMIN = 1e-300
_MAXIT = 1000
# Series at or below, continued fraction above.
SWITCH = 2.0


@njit(cache=True)
def expn_scaled_scalar(n, z):
    """exp(z) * E_n(z) for n >= 1, z >= 0. NaN flags non-convergence."""
    nm1 = n - 1
    if z == 0.0:
        if nm1 == 0:
            return math.inf
        return 1.0 / nm1
    if z <= SWITCH:
        if nm1 == 0:
            ans = -math.log(z) - EULER_GAMMA
        else:
            ans = 1.0 / nm1
        fact = 1.0
        for i in range(1, _MAXIT):
            fact *= -z / i
            if i != nm1:
                term = -fact / (i - nm1)
            else:
                psi = -EULER_GAMMA
                for k in range(1, nm1 + 1):
                    psi += 1.0 / k
                term = fact * (-math.log(z) + psi)
            ans += term
            if abs(term) < abs(ans) * _EPS:
                return ans * math.exp(z)
        return math.nan
    # modified Lentz
    b = z + n
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT):
        an = -i * (nm1 + i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    return math.nan


@vectorize(["float64(int64, float64)"], cache=True)
def expn_scaled_ufunc(n, z):
    return expn_scaled_scalar(n, z)


@njit(cache=True)
def log_survival_u(u, s, log_a):
    """log S at u = log x for the density a e^{-s u} u^{-3} on u >= 1."""
    if u == math.inf:
        return -math.inf
    return log_a - 2.0 * math.log(u) - s * u + math.log(expn_scaled_scalar(3, s * u))


@vectorize(["float64(float64, float64, float64)"], cache=True)
def log_survival_ufunc(u, s, log_a):
    if u <= 1.0:
        return 0.0
    return log_survival_u(u, s, log_a)


@njit(cache=True)
def quantile_u_scalar(log_q, s, log_a, utol):
    """Solve log S(u) = log_q for u >= 1, with log_q = log(1 - p) <= 0.

    g(u) = log S(u) - log_q is decreasing and convex (the hazard
    1 / (u e^{su} E_3(su)) decreases in u), so Newton started at the left
    bracket edge u = 1, where g >= 0, increases monotonically to the root
    without overshooting. Stops when the step is below utol * max(1, u).
    """
    if log_q >= 0.0:
        return 1.0
    u = 1.0
    for _ in range(500):
        e3 = expn_scaled_scalar(3, s * u)
        g = log_a - 2.0 * math.log(u) - s * u + math.log(e3) - log_q
        if g <= 0.0:
            return u
        # d/du log S = -1 / (u e^{su} E_3(su))
        step = g * u * e3
        if step <= utol * max(1.0, u):
            return u + step
        u += step
    return math.nan


@vectorize(["float64(float64, float64, float64, float64)"], cache=True)
def quantile_u_ufunc(log_q, s, log_a, utol):
    return quantile_u_scalar(log_q, s, log_a, utol)
