import numpy as np
import pytest
from hypothesis import given, strategies as st

from hslab.symbolic import Poly, PowerExpr, multi_indices


def _fd(fun, v, u, axis, h=1e-5):
    if axis == "u":
        return (fun(v, u + h) - fun(v, u - h)) / (2 * h)
    e = np.zeros_like(v)
    e[:, axis] = h
    return (fun(v + e, u) - fun(v - e, u)) / (2 * h)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_power_expr_derivatives_match_finite_differences(n):
    rng = np.random.default_rng(1)
    v = rng.normal(size=(7, n))
    u = rng.uniform(0.5, 2.0, 7)
    expr = PowerExpr.monomial(n, 1.3, a=1, two_b=n + 1)
    np.testing.assert_allclose(expr.d_u()(v, u), _fd(expr, v, u, "u"), rtol=1e-7)
    for i in range(n):
        np.testing.assert_allclose(expr.d_v(i)(v, u), _fd(expr, v, u, i), rtol=1e-6, atol=1e-9)


def test_power_expr_mixed_derivative_commutes():
    expr = PowerExpr.monomial(2, 1.0, a=2, two_b=3)
    v = np.array([[0.3, -0.4]])
    u = np.array([0.7])
    a = expr.derivative((1, 0), 2)(v, u)
    b = expr.d_u().d_v(0).d_u()(v, u)
    np.testing.assert_allclose(a, b, rtol=1e-12)


@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_poly_arithmetic(x):
    X = np.array([x])
    a, b, c = (Poly.variable(3, i) for i in range(3))
    p = a * a * b - c.scale(2.0) + Poly.constant(3, 1.5)
    expected = x[0] ** 2 * x[1] - 2 * x[2] + 1.5
    assert p(X)[0] == pytest.approx(expected, abs=1e-12)
    assert p.diff(0)(X)[0] == pytest.approx(2 * x[0] * x[1], abs=1e-12)
    assert p.degree == 3


def test_poly_laplacian():
    x, y, z = (Poly.variable(3, i) for i in range(3))
    p = x * x - y * y + x * y * z
    assert p.laplacian()(np.array([[0.1, 0.2, 0.3]]))[0] == pytest.approx(0.0)


def test_multi_indices():
    idx = multi_indices(3, 2)
    assert len(idx) == 6
    assert all(sum(g) == 2 for g in idx)
    assert len(set(idx)) == 6
