import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize

from logpareto.distribution import (
    THETA_MAX,
    cdf,
    check_theta,
    log_pdf,
    median,
    median_curve,
    normalization,
    pdf,
    quantile,
    quantile_log,
    sample,
    score,
    survival,
    uniforms,
)
from logpareto.errors import DomainError

E = math.e
MEDIAN_AT_1 = math.exp(math.sqrt(2.0))
# mpmath, 30 digits: 1/E_3(1), E_2(1)/E_3(1)**2, and root of S(u; theta) = 1/2
A_AT_2 = 9.1164378353898240
DA_AT_2 = 12.341378233437724
MEDIAN_AT_1_5 = 3.5907127268936586
MEDIAN_AT_2 = 3.3887452429641664


def a_theta(theta):
    return normalization(theta).a_theta


def richardson_one_sided(f, x0, h):
    """Two-stage one-sided Richardson: kills the h log h and h error terms."""

    def forward(step):
        return (f(x0 + step) - f(x0)) / step

    def stage(step):
        return 2.0 * forward(step / 2.0) - forward(step)

    return 2.0 * stage(h / 2.0) - stage(h)


class TestNormalization:
    def test_theta_one(self):
        norm = normalization(1.0)
        assert norm.a_theta == pytest.approx(2.0, abs=1e-12)
        assert norm.da_dtheta == pytest.approx(4.0, abs=1e-12)
        assert norm.score_offset == pytest.approx(2.0, abs=1e-12)

    def test_theta_two(self):
        norm = normalization(2.0)
        assert norm.a_theta == pytest.approx(A_AT_2, rel=1e-13)
        assert norm.da_dtheta == pytest.approx(DA_AT_2, rel=1e-12)

    def test_theta_two_by_quadrature_and_finite_difference(self):
        inv, _ = integrate.quad(lambda u: math.exp(-u) * u**-3, 1, math.inf, epsabs=0, epsrel=1e-13)
        assert normalization(2.0).a_theta == pytest.approx(1 / inv, rel=1e-11)
        h = 1e-4
        central = (a_theta(2 + h) - a_theta(2 - h)) / (2 * h)
        central_half = (a_theta(2 + h / 2) - a_theta(2 - h / 2)) / h
        assert (4 * central_half - central) / 3 == pytest.approx(DA_AT_2, rel=1e-9)

    def test_below_one_is_domain_error(self):
        with pytest.raises(DomainError, match="theta below 1"):
            normalization(0.9)

    def test_above_theta_max_is_domain_error(self):
        with pytest.raises(DomainError):
            normalization(THETA_MAX + 0.5)

    def test_snap_to_one(self):
        assert check_theta(1.0 + 1e-13) == 1.0
        assert check_theta(1.0 + 1e-9) > 1.0

    def test_strictly_increasing(self):
        vals = [a_theta(t) for t in [1, 1.01, 1.25, 1.5, 2, 3, 5, 10]]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_derivative_positive(self):
        for t in [1, 1.5, 3, 9]:
            assert normalization(t).da_dtheta > 0

    def test_one_sided_derivative_at_one(self):
        assert richardson_one_sided(a_theta, 1.0, 1e-4) == pytest.approx(4.0, abs=1e-6)

    def test_reciprocal_derivative_at_one(self):
        norm = normalization(1.0)
        assert -norm.da_dtheta / norm.a_theta**2 == pytest.approx(-1.0, abs=1e-12)
        assert richardson_one_sided(lambda t: 1 / a_theta(t), 1.0, 1e-4) == pytest.approx(-1.0, abs=1e-7)

    @pytest.mark.parametrize("theta", [1.0, 1.1, 1.5, 2.0, 5.0])
    def test_density_integrates_to_one(self, theta):
        # ∫_e^∞ pdf(x) dx with x = e^u, on panels up to u = 600 where e^u is finite
        edges = [1, 2, 4, 8, 16, 32, 64, 128, 256, 600]
        body = sum(
            integrate.quad(lambda u: pdf(math.exp(u), theta) * math.exp(u), lo, hi, epsabs=0, epsrel=1e-13)[0]
            for lo, hi in zip(edges, edges[1:])
        )

        def tail_density(u):
            return a_theta(theta) * math.exp(-(theta - 1) * u) * u**-3

        tail = integrate.quad(tail_density, 600, math.inf, epsabs=0, epsrel=1e-13)[0]
        assert body + tail == pytest.approx(1.0, abs=1e-9)


class TestDensity:
    def test_below_support(self):
        assert pdf(2.0, 1.0) == 0.0
        assert log_pdf(2.0, 1.0) == -math.inf

    def test_left_edge(self):
        assert pdf(E, 1.0) == pytest.approx(2 / E, rel=1e-14)

    def test_at_e_squared(self):
        assert pdf(E**2, 1.0) == pytest.approx(2 / (8 * E**2), rel=1e-14)

    def test_log_pdf_consistent(self):
        xs = np.array([E, 5.0, 100.0, 1e50])
        np.testing.assert_allclose(log_pdf(xs, 1.7), np.log(pdf(xs, 1.7)), rtol=1e-13)


class TestCdf:
    def test_left_edge(self):
        for t in [1.0, 2.0, 7.0]:
            assert cdf(E, t) == pytest.approx(0.0, abs=1e-15)
        assert cdf(1.0, 1.0) == 0.0

    def test_theta_one_values(self):
        assert cdf(E**2, 1.0) == pytest.approx(0.75, abs=1e-14)
        assert cdf(MEDIAN_AT_1, 1.0) == pytest.approx(0.5, abs=1e-14)

    def test_closed_form_theta_one(self):
        for u in [1.0, 1.5, 2.0, 4.0, 10.0]:
            assert cdf(math.exp(u), 1.0) == pytest.approx(1 - u**-2, abs=1e-12)

    @pytest.mark.parametrize("theta", [1.0, 1.3, 2.0, 6.0])
    def test_against_quadrature_of_pdf(self, theta):
        for x in [3.0, 10.0, 1e3]:
            direct, _ = integrate.quad(lambda u: pdf(math.exp(u), theta) * math.exp(u), 1, math.log(x), epsabs=0, epsrel=1e-13)
            assert cdf(x, theta) == pytest.approx(direct, abs=1e-11)

    def test_survival_deep_tail(self):
        # at theta = 1, S(e^u) = u^-2 exactly
        assert survival(math.exp(600.0), 1.0) == pytest.approx(600.0**-2, rel=1e-12)

    def test_limit_and_monotone(self):
        xs = np.exp(np.linspace(1, 300, 400))
        for t in [1.0, 1.5, 4.0]:
            c = cdf(xs, t)
            assert np.all(np.diff(c) >= 0)
            assert c[-1] > 1 - 1e-4
        assert cdf(math.inf, 1.0) == 1.0

    def test_stochastic_ordering(self):
        xs = np.exp(np.linspace(1.01, 30, 200))
        thetas = [1.0, 1.05, 1.2, 1.5, 2.0, 3.0, 5.0, 10.0]
        for t1, t2 in zip(thetas, thetas[1:]):
            assert np.all(cdf(xs, t2) >= cdf(xs, t1))


class TestQuantile:
    def test_examples(self):
        assert quantile(0.0, 1.0) == pytest.approx(E, rel=1e-15)
        assert quantile(0.5, 1.0) == pytest.approx(MEDIAN_AT_1, rel=1e-12)
        assert quantile(0.75, 1.0) == pytest.approx(E**2, rel=1e-12)

    def test_domain(self):
        for p in [1.0, -0.1, 1.5, float("nan")]:
            with pytest.raises(DomainError):
                quantile(p, 1.0)

    def test_closed_form_theta_one(self):
        p = np.linspace(0.0, 0.999, 200)
        np.testing.assert_allclose(quantile_log(p, 1.0), (1 - p) ** -0.5, rtol=1e-13)

    @pytest.mark.parametrize("theta", [1.0, 1.001, 1.5, 2.0, 5.0, 10.0])
    def test_round_trip(self, theta):
        p = np.round(np.arange(0.01, 1.0, 0.01), 2)
        np.testing.assert_allclose(cdf(quantile(p, theta), theta), p, atol=1e-10, rtol=0)

    @pytest.mark.parametrize("theta", [1.2, 2.0, 7.0])
    def test_against_scalar_brent(self, theta):
        """Oracle: scipy brentq on cdf in u-space with a doubling bracket."""
        for p in [0.001, 0.3, 0.9, 0.999999]:
            hi = 2.0
            while cdf(math.exp(hi), theta) < p:
                hi *= 2
            u = optimize.brentq(lambda v: cdf(math.exp(v), theta) - p, 1.0, hi, xtol=1e-14, rtol=1e-15)
            assert quantile_log(p, theta) == pytest.approx(u, rel=1e-10)

    def test_extreme_p_stays_finite_in_log_space(self):
        u = quantile_log(1 - 1e-12, 1.0)
        assert u == pytest.approx((1 - (1 - 1e-12)) ** -0.5, rel=1e-12)
        assert quantile(1 - 1e-12, 1.0) == math.inf

    @given(
        st.floats(0.0, 0.999999, allow_nan=False),
        st.floats(0.0, 0.999999, allow_nan=False),
        st.floats(1.0, 10.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_p(self, p1, p2, theta):
        lo, hi = sorted((p1, p2))
        assert quantile_log(lo, theta) <= quantile_log(hi, theta)


class TestMedianCurve:
    def test_theta_one(self):
        assert median_curve([1.0]) == [(1.0, pytest.approx(MEDIAN_AT_1, rel=1e-12))]

    def test_reference_values(self):
        assert median(1.5) == pytest.approx(MEDIAN_AT_1_5, rel=1e-12)
        assert median(2.0) == pytest.approx(MEDIAN_AT_2, rel=1e-12)

    def test_strictly_decreasing(self):
        curve = median_curve(np.linspace(1, THETA_MAX, 181))
        meds = [m for _, m in curve]
        assert all(b < a for a, b in zip(meds, meds[1:]))

    def test_empty_grid(self):
        with pytest.raises(DomainError):
            median_curve([])


class TestScore:
    def test_examples(self):
        assert score(E**2, 1.0) == pytest.approx(0.0, abs=1e-14)
        assert score(E, 1.0) == pytest.approx(1.0, abs=1e-14)
        assert score(E**4, 1.0) == pytest.approx(-2.0, abs=1e-14)

    def test_below_support(self):
        with pytest.raises(DomainError):
            score(2.0, 1.0)

    def test_threshold_bound(self):
        c1 = normalization(1.0).score_offset
        for u in [4.0, 4.5, 10.0, 1e3]:
            assert abs(c1) <= u / 2

    @pytest.mark.parametrize("theta", [1.0, 1.5, 2.0])
    def test_zero_mean_monte_carlo(self, theta):
        u = sample(100_000, theta, seed=11).log_values
        c = normalization(theta).score_offset
        sc = c - u
        assert abs(sc.mean()) <= 3 * sc.std(ddof=1) / math.sqrt(len(sc))

    @pytest.mark.parametrize("theta", [1.0, 1.5, 2.0, 4.0])
    def test_mean_log_identity_by_quadrature(self, theta):
        a = a_theta(theta)
        s = theta - 1
        if theta == 1.0:
            mean_log = 2 * integrate.quad(lambda u: u**-2, 1, math.inf, epsabs=0, epsrel=1e-13)[0]
        else:
            mean_log = a * integrate.quad(lambda u: math.exp(-s * u) * u**-2, 1, math.inf, epsabs=0, epsrel=1e-13)[0]
        assert normalization(theta).score_offset == pytest.approx(mean_log, abs=1e-9)


class TestSample:
    def test_deterministic(self):
        a = sample(5, 1.0, seed=1234)
        b = sample(5, 1.0, seed=1234)
        assert a.log_values.tobytes() == b.log_values.tobytes()
        assert sample(5, 1.0, seed=1235).log_values.tobytes() != a.log_values.tobytes()

    def test_support(self):
        batch = sample(10_000, 1.0, seed=3)
        assert np.all(batch.log_values >= 1.0)
        assert np.all(batch.values >= E)
        assert len(batch) == 10_000

    def test_inverse_cdf_of_uniforms(self):
        batch = sample(50, 2.5, seed=99)
        np.testing.assert_array_equal(batch.log_values, quantile_log(uniforms(50, 99), 2.5))

    def test_mean_log_theta_one(self):
        u = sample(10_000, 1.0, seed=5).log_values
        assert abs(u.mean() - 2.0) <= 3 * u.std(ddof=1) / math.sqrt(len(u))

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            sample(0, 1.0, 1)
        with pytest.raises(DomainError):
            sample(5, 1.0, -1)
        with pytest.raises(DomainError):
            sample(5, 0.5, 1)
