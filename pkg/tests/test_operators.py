import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special as sp

from hslab.errors import ParameterError
from hslab.halfspace import HPoint, whitney_cell_containing
from hslab.operators import (Extension, TraceView, VecExponents, extension_order_ok,
                             kernel_transform, r_admissible, r_expanded, reproduce,
                             reproducing_hypothesis, s_admissible, s_cell, s_expanded, s_tilde,
                             trace_eval)
from hslab.quadrature import HalfspaceQuadSpec
from hslab.testfns import DerivativeKernel, ProductOnHm


def ones(X, t):
    return np.ones_like(t)


def test_reproduce_recovers_derivative_kernel():
    f = DerivativeKernel(HPoint((0.0,), 1.0), 2)
    z = HPoint((0.3,), 0.7)
    res = reproduce(f, 1, z)
    assert res.status == "ok"
    assert res.value == pytest.approx(float(f(z)), rel=1e-6)
    assert "precondition-violated" not in res.flags


def test_reproduce_flags_outside_hypothesis():
    f = DerivativeKernel(HPoint((0.0,), 1.0), 2)
    res = reproduce(f, 0, HPoint((0.0,), 1.0), p=1.0, alpha=3.0)
    assert "precondition-violated" in res.flags


@pytest.mark.parametrize("n,c,d", [(1, 0.0, 3.0), (1, 0.5, 4.0), (2, 0.0, 4.0)])
def test_kernel_transform_closed_form(n, c, d):
    # int_{R^n} (|x|^2 + u^2)^(-d/2) dx = pi^(n/2) Gamma((d-n)/2) / Gamma(d/2) u^(n-d)
    # int_0^inf s^c (t + s)^(n-d) ds = t^(c+n-d+1) B(c+1, d-n-c-1)
    t = 0.8
    z = HPoint((0.0,) * n, t)
    res = kernel_transform(ones, [z], c, [d])
    exact = (math.pi ** (n / 2) * math.gamma((d - n) / 2) / math.gamma(d / 2)
             * t ** (c + n - d + 1) * sp.beta(c + 1, d - n - c - 1))
    assert res.value == pytest.approx(exact, rel=1e-5)


def test_admissibility_predicates():
    e = VecExponents((1.0,), (3.0,))
    assert s_admissible(e, 2.0, (0.0,), 1)
    assert not s_admissible(VecExponents((1.0,), (0.5,)), 2.0, (0.0,), 1)
    assert not s_admissible(e, 1.0, (0.0,), 1)
    assert r_admissible(VecExponents((2.0,), (3.0,)), 2.0, (0.0,), 1)
    assert reproducing_hypothesis(2.0, -0.5, 0, 1)
    assert not reproducing_hypothesis(1.0, 3.0, 0, 1)
    assert extension_order_ok(2.0, 3, 1, 2, (0.0, 0.0))
    assert not extension_order_ok(1.0, 0, 1, 3, (1.0, 1.0, 1.0))


def test_vec_exponents_validation():
    with pytest.raises(ParameterError):
        VecExponents((1.0, 2.0), (1.0,))


@given(st.floats(-2, 2), st.floats(0.2, 3))
def test_trace_of_product_is_product_of_values(x, t):
    f1 = DerivativeKernel(HPoint((0.0,), 1.0), 1)
    f2 = DerivativeKernel(HPoint((0.5,), 0.5), 2)
    z = HPoint((x,), t)
    tv = TraceView(ProductOnHm((f1, f2)), 2)
    assert trace_eval(tv, z) == pytest.approx(float(f1(z)) * float(f2(z)), rel=1e-12)


def test_s_cell_matches_region_restricted_expansion():
    n, a, b = 1, 1.0, 0.5
    f = DerivativeKernel(HPoint((0.2,), 1.0), 1)
    z = HPoint((0.1,), 0.6)
    cell = whitney_cell_containing(z)
    lhs = s_cell(a, b, cell, f, z, order=10)
    e = VecExponents((a,), (b + n + 1,))
    rhs = s_expanded(e, f, [z], region=cell.cube, order=10).value
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert s_tilde(a, b, f, z, order=10) == pytest.approx(lhs, rel=1e-12)


def test_s_cell_parameter_check():
    z = HPoint((0.0,), 1.0)
    with pytest.raises(ParameterError):
        s_cell(0.0, 0.5, whitney_cell_containing(z), ones, z)


def test_s_expanded_needs_one_point_per_factor():
    with pytest.raises(ParameterError):
        s_expanded(VecExponents((1.0, 1.0), (2.0, 2.0)), ones, [HPoint((0.0,), 1.0)])


def test_r_expanded_product_factorization_matches_tensor_rule():
    spec = HalfspaceQuadSpec(x_radius=16.0, t_floor=2.0 ** -5, t_ceiling=2.0 ** 5,
                             points_per_cell_axis=3, refinement_levels=1)
    g = ProductOnHm((DerivativeKernel(HPoint((0.0,), 1.0), 2),
                     DerivativeKernel(HPoint((0.3,), 0.8), 2)))
    e = VecExponents((1.0, 1.0), (2.0, 2.0))
    w = HPoint((0.1,), 0.9)
    auto = r_expanded(e, g, w, spec)
    tensor = r_expanded(e, g, w, spec, method="tensor")
    assert auto.value == pytest.approx(tensor.value, rel=1e-3)


def test_extension_trace_reproduces_input():
    g = DerivativeKernel(HPoint((0.0,), 1.0), 2)
    ext = Extension(g, 1, 2)
    z = HPoint((0.4,), 0.9)
    Z = np.array([0.4, 0.9])
    assert ext([Z, Z]) == pytest.approx(float(g(z)), rel=1e-6)
