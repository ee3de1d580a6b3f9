"""Gamma Gauss rule tests: closed-form small rules, polynomial
exactness, oracle cross-checks, and stability properties."""

import numpy as np
import pytest
from scipy import integrate
from scipy.special import exp1, gammaln, genlaguerre, roots_genlaguerre

from glfit import gamma_rule, mixture_expectation


class TestRuleConstruction:
    def test_one_point_rule_sits_at_the_mean(self):
        rule = gamma_rule(3.0, 1)
        np.testing.assert_allclose(rule.nodes, [3.0], rtol=1e-14)
        np.testing.assert_allclose(rule.weights, [1.0], rtol=1e-14)

    def test_two_point_exponential_rule(self):
        """alpha = 1, H = 2: nodes are the Laguerre-2 roots 2 +- sqrt(2)."""
        rule = gamma_rule(1.0, 2)
        np.testing.assert_allclose(rule.nodes, [2 - np.sqrt(2), 2 + np.sqrt(2)], rtol=1e-12)
        np.testing.assert_allclose(rule.weights.sum(), 1.0, atol=1e-14)

    def test_nodes_positive_ascending_weights_positive(self):
        for alpha in [0.05, 0.5, 1.0, 2.0, 10.0, 100.0]:
            for h in [1, 2, 20, 30]:
                rule = gamma_rule(alpha, h)
                assert np.all(rule.nodes > 0)
                assert np.all(np.diff(rule.nodes) > 0)
                assert np.all(rule.weights > 0)

    def test_moment_exactness(self):
        """Sum w = 1 and the first two gamma moments, exact for H >= 2."""
        for alpha in [0.5, 1.0, 2.0, 10.0]:
            for h in [2, 20, 30]:
                rule = gamma_rule(alpha, h)
                np.testing.assert_allclose(rule.weights.sum(), 1.0, atol=1e-12)
                np.testing.assert_allclose(np.dot(rule.weights, rule.nodes), alpha, rtol=1e-10)
                np.testing.assert_allclose(
                    np.dot(rule.weights, rule.nodes**2), alpha * (alpha + 1), rtol=1e-10
                )

    def test_polynomial_root_oracle_small_orders(self):
        """Golub-Welsch nodes equal the generalized Laguerre roots."""
        for alpha in [0.7, 2.0]:
            for h in [2, 3, 4, 5]:
                rule = gamma_rule(alpha, h)
                roots = np.sort(np.roots(genlaguerre(h, alpha - 1.0).coefficients))
                np.testing.assert_allclose(rule.nodes, roots, rtol=1e-8)

    def test_scipy_rule_oracle(self):
        """Nodes and re-normalized weights match roots_genlaguerre."""
        for alpha in [0.5, 2.0, 10.0]:
            rule = gamma_rule(alpha, 25)
            x, w = roots_genlaguerre(25, alpha - 1.0)
            np.testing.assert_allclose(rule.nodes, x, rtol=1e-12)
            np.testing.assert_allclose(rule.weights, w / np.exp(gammaln(alpha)), rtol=1e-11)

    def test_mgf_check(self):
        """E[e^{-v/2}] = 1.5^{-alpha}, integrable by a 20-point rule."""
        for alpha in [0.5, 1.0, 2.0, 10.0]:
            rule = gamma_rule(alpha, 20)
            approx = np.dot(rule.weights, np.exp(-0.5 * rule.nodes))
            np.testing.assert_allclose(approx, 1.5 ** (-alpha), rtol=1e-9)

    def test_adaptive_quadrature_oracle(self):
        """20-point rule reproduces the adaptive integral of e^{-v/2}
        against the gamma(2.5, 1) density."""
        alpha = 2.5
        dens = lambda v: np.exp((alpha - 1) * np.log(v) - v - gammaln(alpha))
        exact, _ = integrate.quad(lambda v: np.exp(-0.5 * v) * dens(v), 0, np.inf, limit=200)
        rule = gamma_rule(alpha, 20)
        np.testing.assert_allclose(np.dot(rule.weights, np.exp(-0.5 * rule.nodes)), exact, rtol=1e-9)

    def test_determinism_and_memo(self):
        a = gamma_rule(1.7, 20)
        b = gamma_rule(1.7, 20)
        assert a is b  # memoized
        np.testing.assert_array_equal(a.nodes, b.nodes)

    def test_rule_is_read_only(self):
        rule = gamma_rule(2.0, 5)
        with pytest.raises(ValueError):
            rule.nodes[0] = 99.0

    def test_continuity_in_alpha(self):
        """An 1e-8 shape perturbation moves nodes and weights by O(1e-6)."""
        a = gamma_rule(2.0, 20)
        b = gamma_rule(2.0 + 1e-8, 20)
        assert np.max(np.abs(a.nodes - b.nodes)) < 1e-6
        assert np.max(np.abs(a.weights - b.weights)) < 1e-6

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            gamma_rule(0.0, 10)
        with pytest.raises(ValueError):
            gamma_rule(-1.0, 10)
        with pytest.raises(ValueError):
            gamma_rule(np.inf, 10)
        with pytest.raises(ValueError):
            gamma_rule(1.0, 0)
        with pytest.raises(ValueError):
            gamma_rule(1.0, 201)
        with pytest.raises(ValueError):
            gamma_rule(1.0, 2.5)


class TestMixtureExpectation:
    def test_constant(self):
        rule = gamma_rule(3.3, 7)
        np.testing.assert_allclose(mixture_expectation(rule, lambda v: 1.0), 1.0, atol=1e-14)

    def test_identity_is_exact(self):
        rule = gamma_rule(4.0, 2)
        np.testing.assert_allclose(mixture_expectation(rule, lambda v: v), 4.0, rtol=1e-12)

    def test_exponential_integral_oracle(self):
        """E[1/(1+V)] for V ~ Exp(1) equals e*E1(1)."""
        rule = gamma_rule(1.0, 30)
        exact = float(np.e * exp1(1.0))
        np.testing.assert_allclose(
            mixture_expectation(rule, lambda v: 1.0 / (1.0 + v)), exact, atol=1e-6
        )
        np.testing.assert_allclose(exact, 0.596347362323194, rtol=1e-12)

    def test_error_decreases_with_order(self):
        """On smooth exponential integrands the absolute error never grows
        with H (until the roundoff floor)."""
        for c in [0.1, 1.0, 10.0]:
            for alpha in [0.8, 2.0]:
                exact = (1.0 + c) ** (-alpha)
                errs = []
                for h in [2, 4, 6, 8, 12]:
                    rule = gamma_rule(alpha, h)
                    errs.append(abs(np.dot(rule.weights, np.exp(-c * rule.nodes)) - exact))
                for lo, hi in zip(errs[1:], errs[:-1]):
                    assert lo <= hi + 1e-14

    def test_non_finite_integrand_reports_node(self):
        rule = gamma_rule(1.0, 5)
        with pytest.raises(RuntimeError, match="node"):
            mixture_expectation(rule, lambda v: np.inf)
