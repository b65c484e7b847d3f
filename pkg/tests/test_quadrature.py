import math

import numpy as np
import pytest

from wienerlab import (Integrand, bertrand_integrand, gaussian_expectation,
                       integrate_adaptive, integrate_semi_infinite,
                       integrate_singular_origin)
from wienerlab.diagnostics import abs_value_pow_integrand, diffquot_pow_integrand
from wienerlab.quadrature import EvaluationError, gauss_log_pdf


def gauss_mass(r):
    """int_{-r}^{r} phi(x) dx via the erf oracle."""
    return math.erf(r / math.sqrt(2.0))


def gauss_x2_mass(r):
    """int_{-r}^{r} x^2 phi(x) dx = erf(r/sqrt 2) - 2 r phi(r)."""
    phi_r = math.exp(-0.5 * r * r) / math.sqrt(2.0 * math.pi)
    return gauss_mass(r) - 2.0 * r * phi_r


class TestAdaptive:
    def test_linear(self):
        v = integrate_adaptive(Integrand.from_function(lambda x: x), 0.0, 1.0,
                               atol=1e-14, rtol=1e-13)
        assert v.converged
        assert v.value == pytest.approx(0.5, abs=1e-12)

    def test_gaussian_mass(self):
        g = Integrand.from_function(lambda x: np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi))
        v = integrate_adaptive(g, -8.0, 8.0, atol=1e-12, rtol=1e-12)
        assert v.converged
        assert v.value == pytest.approx(gauss_mass(8.0), abs=1e-10)

    def test_gaussian_second_moment_window(self):
        g = Integrand.from_function(
            lambda x: x * x * np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi))
        v = integrate_adaptive(g, -8.0, 8.0, atol=1e-12, rtol=1e-12)
        assert v.value == pytest.approx(gauss_x2_mass(8.0), abs=1e-10)

    def test_error_bound_honest(self):
        v = integrate_adaptive(Integrand.from_function(np.sin), 0.0, math.pi,
                               atol=1e-12, rtol=1e-12)
        assert abs(v.value - 2.0) <= v.abs_error + 1e-12

    def test_budget_exhaustion_is_inconclusive(self):
        g = Integrand.from_function(lambda x: np.sin(1e5 * x))
        v = integrate_adaptive(g, 0.0, 1.0, atol=1e-14, rtol=1e-14, budget=300)
        assert v.status == "inconclusive"

    def test_nan_raises(self):
        g = Integrand.from_function(lambda x: np.where(x > 0.5, np.nan, x))
        with pytest.raises(EvaluationError):
            integrate_adaptive(g, 0.0, 1.0)

    def test_bad_interval_rejected(self):
        g = Integrand.from_function(lambda x: x)
        with pytest.raises(ValueError):
            integrate_adaptive(g, 1.0, 0.0)
        with pytest.raises(ValueError):
            integrate_adaptive(g, 0.0, math.inf)


class TestSemiInfinite:
    def test_quartic_tail(self):
        v = integrate_semi_infinite(Integrand.from_function(lambda x: x ** -4.0), 2.0,
                                    atol=1e-12, rtol=1e-10)
        assert v.converged
        assert v.value == pytest.approx(1.0 / 24.0, abs=1e-9)

    def test_harmonic_tail_diverges(self):
        v = integrate_semi_infinite(Integrand.from_function(lambda x: 1.0 / x), 2.0)
        assert v.diverged
        recs = v.evidence.records
        partials = [r[1] for r in recs]
        increments = [r[2] for r in recs]
        assert all(b >= a for a, b in zip(partials, partials[1:]))
        tail = increments[-6:]
        assert all(b > a for a, b in zip(tail, tail[1:]))

    def test_step2_quotient_diverges(self, f31):
        # the squared difference quotient of the tail-growth functional is not
        # phi-integrable on [sqrt(2a), inf) for any eps
        q = diffquot_pow_integrand(f31, 2.0, 0.1, 1.0, centered=False)

        def weighted(x):
            s, l = q.log_eval(x)
            return s, np.asarray(l) + gauss_log_pdf(x)

        g = Integrand(log_eval=weighted)
        v = integrate_semi_infinite(g, math.sqrt(4.0), atol=1e-10, rtol=1e-8)
        assert v.diverged


class TestSingularOrigin:
    def test_bertrand_closed_form(self):
        # int_0^{e^-10} dx/(x |log x|^6) = 10^-5 / 5
        v = integrate_singular_origin(bertrand_integrand(6.0), math.exp(-10.0),
                                      atol=1e-18, rtol=1e-11)
        assert v.converged
        assert v.value == pytest.approx(2e-6, rel=1e-9)

    def test_inverse_x_diverges(self):
        v = integrate_singular_origin(Integrand.from_function(lambda x: 1.0 / x), 0.1)
        assert v.diverged

    def test_cusp_derivative_square_converges(self, f33):
        # |F'|^2 behaves like the Bertrand exponent 6 at the origin: finite
        from wienerlab.diagnostics import abs_deriv_pow_integrand
        g = abs_deriv_pow_integrand(f33, 2.0)

        def weighted(u):
            s, l = g.neglog_eval(u)
            return s, np.asarray(l) - 0.5 * np.exp(-2.0 * u) - 0.5 * math.log(2 * math.pi)

        gi = Integrand(log_eval=g.log_eval, neglog_eval=weighted,
                       singular_points=(0.0,))
        # weight the x-space form too
        def weighted_x(x):
            s, l = g.log_eval(x)
            return s, np.asarray(l) + gauss_log_pdf(x)

        gi = Integrand(log_eval=weighted_x, neglog_eval=weighted, singular_points=(0.0,))
        v = integrate_singular_origin(gi, 2e-4)
        assert v.converged
        assert v.value > 0.0

    def test_methods_agree_on_bertrand(self):
        # substitution route vs shrinking lower limits, 1e-8 relative
        for i in range(2, 9):
            b = bertrand_integrand(float(i))
            exact = 10.0 ** (1 - i) / (i - 1)
            va = integrate_singular_origin(b, math.exp(-10.0), atol=1e-14, rtol=1e-10)
            vb = integrate_singular_origin(b, math.exp(-10.0), atol=1e-14, rtol=1e-10,
                                           method="shrink")
            assert va.converged and vb.converged
            assert abs(va.value - vb.value) <= 1e-8 * exact
            assert va.value == pytest.approx(exact, rel=1e-9)


class TestGaussianExpectation:
    def test_second_moment(self):
        v = gaussian_expectation(Integrand.from_function(lambda x: x * x),
                                 atol=1e-12, rtol=1e-11)
        assert v.value == pytest.approx(1.0, abs=1e-10)

    def test_fourth_moment(self):
        v = gaussian_expectation(Integrand.from_function(lambda x: x ** 4),
                                 atol=1e-12, rtol=1e-11)
        assert v.value == pytest.approx(3.0, abs=1e-10)

    def test_tail_growth_square_matches_closed_form(self, f31):
        # |f|^2 phi is exactly x^-2a above the breakpoint and the bounded
        # completion squared below it: v0^2 Phi(2) + 1/24
        g = abs_value_pow_integrand(f31, 2.0)
        v = gaussian_expectation(g, atol=1e-11, rtol=1e-9)
        v0 = float(f31.value(2.0))
        exact = v0 * v0 * 0.5 * (1.0 + math.erf(2.0 / math.sqrt(2.0))) + 1.0 / 24.0
        assert v.converged
        assert v.value == pytest.approx(exact, rel=1e-8)

    def test_odd_moment_is_zero(self):
        v = gaussian_expectation(Integrand.from_function(lambda x: x ** 3),
                                 atol=1e-10, rtol=1e-9)
        assert v.converged
        assert abs(v.value) <= 1e-10


class TestVerdictProperties:
    def test_monotone_divergence(self):
        # nested nonnegative integrands: if the smaller diverges so does the larger
        verdicts = {}
        for i in (1.0, 0.75, 0.5):
            verdicts[i] = integrate_singular_origin(bertrand_integrand(i), 0.1)
        assert verdicts[1.0].diverged  # smallest of the three on (0, 0.1)
        assert verdicts[0.75].diverged
        assert verdicts[0.5].diverged

    def test_linearity_under_converged(self):
        base = integrate_semi_infinite(Integrand.from_function(lambda x: x ** -4.0), 2.0,
                                       atol=1e-12, rtol=1e-10)
        for alpha in (2.0, 10.0):
            scaled = integrate_semi_infinite(
                Integrand.from_function(lambda x, a=alpha: a * x ** -4.0), 2.0,
                atol=1e-12, rtol=1e-10)
            tol = alpha * base.abs_error + scaled.abs_error
            assert abs(scaled.value - alpha * base.value) <= tol + 1e-14

    def test_no_verdict_flip_under_tightening(self, f31, f33):
        # the acceptance catalog keeps its verdicts when tolerances tighten 10x
        from wienerlab.diagnostics import abs_deriv_pow_integrand
        cases = [
            (lambda a, r: integrate_semi_infinite(
                Integrand.from_function(lambda x: x ** -4.0), 2.0, atol=a, rtol=r), True),
            (lambda a, r: integrate_singular_origin(
                bertrand_integrand(6.0), math.exp(-10.0), atol=a, rtol=r), True),
            (lambda a, r: integrate_singular_origin(
                bertrand_integrand(1.0), 0.1, atol=a, rtol=r), False),
            (lambda a, r: gaussian_expectation(
                abs_value_pow_integrand(f31, 2.0), atol=a, rtol=r), True),
            (lambda a, r: gaussian_expectation(
                abs_deriv_pow_integrand(f33, 2.1), atol=a, rtol=r), False),
        ]
        for run, expect_converged in cases:
            loose = run(1e-10, 1e-8)
            tight = run(1e-11, 1e-9)
            assert loose.converged == expect_converged
            assert tight.status == loose.status
            if expect_converged:
                old_tol = max(1e-10, 1e-8 * abs(loose.value))
                assert abs(tight.value - loose.value) <= old_tol + loose.abs_error

    def test_converged_error_contract(self):
        # Converged implies abs_error <= max(atol, rtol |value|)
        atol, rtol = 1e-11, 1e-9
        v = integrate_semi_infinite(Integrand.from_function(lambda x: x ** -4.0), 2.0,
                                    atol=atol, rtol=rtol)
        assert v.converged
        assert v.abs_error <= max(atol, rtol * abs(v.value))
