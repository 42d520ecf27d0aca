#!/usr/bin/env python3
import math
import pytest
import numpy as np

from sketchbit.bnp.core.quadrature import (
    QuadratureException,
    log_integral,
    log_integral_mapped,
    map_rule,
    tanh_sinh_rule,
)


"""
Tests for bnp.core.quadrature module
"""


class TestRule:
    """Test the tanh-sinh rule itself"""

    def test_node_count(self):
        """Test level 10 has 385 nodes"""
        assert tanh_sinh_rule(10).size == 385

    def test_weights_integrate_constant(self):
        """Test the weights sum to the length of (-1, 1)"""
        assert tanh_sinh_rule(8).weights.sum() == pytest.approx(2.0, rel=1e-10)

    def test_nodes_inside_interval(self):
        """Test every node lies in [-1, 1]"""
        nodes = tanh_sinh_rule().nodes
        assert np.all(np.abs(nodes) <= 1.0)

    def test_invalid_level(self):
        """Test level 0 is rejected"""
        with pytest.raises(QuadratureException):
            tanh_sinh_rule(0)

    def test_empty_domain(self):
        """Test lower >= upper is rejected"""
        with pytest.raises(QuadratureException):
            map_rule(tanh_sinh_rule(), 1.0, 1.0)


class TestLogIntegral:
    """Test integrals in log space"""

    @pytest.fixture
    def rule(self):
        """Default rule"""
        return tanh_sinh_rule()

    def test_exponential_half_line(self, rule):
        """Test the integral of exp(-x) over (0, inf) is 1"""
        assert log_integral(lambda x: -x, rule) == pytest.approx(0.0, abs=1e-9)

    def test_square_unit_interval(self, rule):
        """Test the integral of x^2 over (0, 1) is 1/3"""
        value = log_integral(lambda x: 2.0 * np.log(x), rule, 0.0, 1.0)
        assert value == pytest.approx(math.log(1.0 / 3.0), abs=1e-9)

    def test_gaussian_real_line(self, rule):
        """Test the integral of exp(-x^2/2) over the real line is sqrt(2 pi)"""
        value = log_integral(lambda x: -0.5 * x**2, rule, -math.inf, math.inf)
        assert value == pytest.approx(0.5 * math.log(2.0 * math.pi), abs=1e-9)

    def test_log_scale_argument(self, rule):
        """Test log_scale hands the integrand log(x - lower)"""
        value = log_integral(lambda log_x: -np.exp(log_x), rule, 0.0, math.inf, log_scale=True)
        assert value == pytest.approx(0.0, abs=1e-9)

    def test_log_scale_needs_finite_lower(self, rule):
        """Test log_scale is refused on a domain without a lower bound"""
        with pytest.raises(QuadratureException):
            log_integral(lambda x: -x, rule, -math.inf, 0.0, log_scale=True)

    def test_vanishing_integrand(self, rule):
        """Test an integrand that is zero everywhere gives -inf"""
        assert log_integral(lambda x: np.full_like(x, -np.inf), rule, 0.0, 1.0) == -math.inf

    def test_shifted_lower_bound(self, rule):
        """Test the integral of exp(-(x-3)) over (3, inf) is 1"""
        value = log_integral_mapped(lambda x: -(x - 3.0), map_rule(rule, 3.0, math.inf))
        assert value == pytest.approx(0.0, abs=1e-9)

    def test_nested_integral(self, rule):
        """Test log_integral nests: the integral of x + y over the unit square is 1"""

        def inner(xs):
            return np.array([log_integral(lambda y, x=x: np.log(x + y), rule, 0.0, 1.0) for x in xs])

        assert log_integral(inner, rule, 0.0, 1.0) == pytest.approx(0.0, abs=1e-9)

    def test_shift_invariance(self, rule):
        """Test adding a constant to the log-integrand shifts the result by that constant"""
        base = log_integral(lambda x: -0.5 * x**2, rule, -math.inf, math.inf)
        shifted = log_integral(lambda x: -0.5 * x**2 + 300.0, rule, -math.inf, math.inf)
        assert shifted - 300.0 == pytest.approx(base, abs=1e-12)
