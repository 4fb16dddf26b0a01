import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stirmix.quadrature import quadrature, segment_rule_for_dg, triangle_rule_for_dg

TRI_DEGREES = [1, 2, 4, 5, 8]


def exact_triangle_monomial(a: int, b: int) -> float:
    # int_T x^a y^b over the reference triangle
    return math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)


@pytest.mark.parametrize("deg", TRI_DEGREES)
def test_triangle_rules_integrate_monomials_exactly(deg):
    rule = quadrature("triangle", deg)
    assert rule.exact_degree >= deg
    x, y = rule.points.T
    for a in range(deg + 1):
        for b in range(deg + 1 - a):
            assert np.dot(rule.weights, x ** a * y ** b) == pytest.approx(
                exact_triangle_monomial(a, b), rel=1e-13, abs=1e-15)


@given(st.integers(min_value=0, max_value=31))
@settings(max_examples=40, deadline=None)
def test_segment_rule_exact(deg):
    rule = quadrature("segment", deg)
    assert np.dot(rule.weights, rule.points ** deg) == pytest.approx(1.0 / (deg + 1), rel=1e-12)


def test_weights_positive_and_inside():
    for deg in TRI_DEGREES:
        r = quadrature("triangle", deg)
        assert np.all(r.weights > 0)
        assert np.all(r.points >= -1e-15) and np.all(r.points.sum(axis=1) <= 1 + 1e-15)


def test_rejects_bad_requests():
    with pytest.raises(ValueError):
        quadrature("triangle", 40)
    with pytest.raises(ValueError):
        quadrature("square", 2)
    with pytest.raises(ValueError):
        quadrature("segment", -1)


def test_dg_rules_have_enough_points():
    for M in range(5):
        assert triangle_rule_for_dg(M).n_points >= (M + 1) * (M + 2) // 2
        assert segment_rule_for_dg(M).exact_degree >= 2 * M + 1
