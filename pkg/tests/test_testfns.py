import numpy as np
import pytest
from hypothesis import given, strategies as st

from hslab.errors import DomainError, ParameterError, UnsupportedError
from hslab.halfspace import HPoint
from hslab.testfns import (DerivativeKernel, GradientRequest, HarmonicPolynomialBall,
                           PoissonBallSlice, PoissonShift, ProductOnHm, Scaled, SolidHarmonic,
                           evaluate, fd_derivative, grad_components, grad_norm, laplacian_fd,
                           parse_testfn)
from hslab.kernels import poisson_h


def _halfspace_points(n, rng, count=6):
    return np.column_stack([rng.uniform(-2, 2, (count, n)), rng.uniform(0.3, 2, count)])


@pytest.mark.parametrize("f", [PoissonShift(1.0, 1), PoissonShift(0.5, 2), PoissonShift(1.0, 3),
                               DerivativeKernel(HPoint((0.2,), 1.0), 0),
                               DerivativeKernel(HPoint((0.2,), 1.0), 2),
                               DerivativeKernel(HPoint((0.2, -0.3), 0.5), 1),
                               DerivativeKernel(HPoint((0.0, 0.0, 0.0), 1.0), 3)])
def test_halfspace_families_are_harmonic(f):
    Z = _halfspace_points(f.n, np.random.default_rng(0))
    lap = laplacian_fd(f, Z, 1e-3 * Z[:, -1])
    assert np.max(np.abs(lap)) <= 1e-4 * np.max(np.abs(f(Z)) / Z[:, -1] ** 2)


def test_poisson_shift_values():
    f = PoissonShift(1.0, 1)
    Z = np.array([[0.5, 0.25]])
    np.testing.assert_allclose(f(Z), poisson_h(Z[:, :1], Z[:, 1] + 1.0, 1))


@pytest.mark.parametrize("f", [PoissonShift(1.0, 2), DerivativeKernel(HPoint((0.2,), 1.0), 0),
                               DerivativeKernel(HPoint((0.2,), 1.0), 2), SolidHarmonic(3, 2)])
@pytest.mark.parametrize("order", [1, 2])
def test_exact_derivatives_match_fd(f, order):
    rng = np.random.default_rng(2)
    if f.domain == "H":
        Z = _halfspace_points(f.n, rng)
    else:
        Z = rng.uniform(-0.4, 0.4, (5, 3))
    exact = grad_components(f, GradientRequest(order, "exact"), Z)
    fd = grad_components(f, GradientRequest(order, "fd"), Z)
    np.testing.assert_allclose(fd, exact, rtol=1e-5, atol=1e-6 * np.max(np.abs(exact)))


def test_grad_norm_solid_harmonic_degree_one():
    f = SolidHarmonic(1, 2)  # c * x_3 with c = sqrt(3 / (4 pi))
    val = grad_norm(f, GradientRequest(1), np.array([0.1, 0.2, 0.3]))
    assert val == pytest.approx(np.sqrt(3 / (4 * np.pi)))


def test_fd_derivative_polynomial():
    f = lambda P: P[:, 0] ** 3  # noqa: E731
    pts = np.array([[0.5]])
    assert fd_derivative(f, (3,), pts, 0.1)[0] == pytest.approx(6.0)


def test_ball_functions():
    f = HarmonicPolynomialBall({(0, 1): 2.0, (2, 3): 1.0})
    X = np.array([[0.1, 0.2, 0.3]])
    expected = 2 * SolidHarmonic(0, 1)(X) + SolidHarmonic(2, 3)(X)
    np.testing.assert_allclose(f(X), expected)
    assert f.degree == 2
    with pytest.raises(DomainError):
        f(np.array([[1.0, 0.0, 0.0]]))
    s = PoissonBallSlice((0.0, 0.0, 2.0))
    assert s.yp == (0.0, 0.0, 1.0)
    with pytest.raises(UnsupportedError):
        s.derivative((1, 0, 0), X)
    with pytest.raises(ParameterError):
        SolidHarmonic(1, 4)


def test_scaled_and_products():
    f = PoissonShift(1.0, 1)
    g = Scaled(3.0, f)
    Z = np.array([[0.1, 0.5], [1.0, 2.0]])
    np.testing.assert_allclose(g(Z), 3 * f(Z))
    np.testing.assert_allclose(g.derivative((1, 0), Z), 3 * f.derivative((1, 0), Z))
    p = ProductOnHm((f, g))
    np.testing.assert_allclose(p([Z, Z]), 3 * f(Z) ** 2)
    np.testing.assert_allclose(p.xt([Z[:, :1]] * 2, [Z[:, 1]] * 2), 3 * f(Z) ** 2)
    assert p.m == 2 and p.n == 1
    with pytest.raises(DomainError):
        f(np.array([0.0, -1.0]))
    assert isinstance(evaluate(f, np.array([0.0, 1.0])), float)


def test_gradient_request_validation():
    with pytest.raises(ParameterError):
        GradientRequest(0)
    with pytest.raises(UnsupportedError):
        GradientRequest(5, "fd")
    with pytest.raises(ParameterError):
        GradientRequest(1, "symbolic")


@given(st.floats(0.1, 5.0))
def test_parse_testfn(s0):
    f = parse_testfn(f"poisson_shift:{s0}", 1)
    assert isinstance(f, PoissonShift) and f.s0 == s0
    g = parse_testfn("derivative_kernel:0.5,1.0,2", 1)
    assert g.theta == HPoint((0.5,), 1.0) and g.l == 2
    p = parse_testfn(f"product:poisson_shift:{s0}|derivative_kernel:0,1,2", 1)
    assert p.m == 2
    with pytest.raises(ParameterError):
        parse_testfn("nope:1", 1)
