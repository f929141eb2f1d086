import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special as sp

from hslab.ball import (CoeffTable, as_polynomial, convolve, expand, exponent_K, exponent_L,
                        exponent_N, functional_K, functional_L, functional_N, functional_N1,
                        gradient_mean_profile, lambda_factor, lambda_t, multiplier_functional,
                        multiplier_profile, synth, verify_convolution_identity)
from hslab.errors import ParameterError, UnsupportedError
from hslab.quadrature import SphereQuadSpec, sphere_nodes
from hslab.sphharm import SphericalBasis, basis_size
from hslab.testfns import SolidHarmonic

dims = st.sampled_from([2, 3])


def random_table(n, K, seed):
    rng = np.random.default_rng(seed)
    return CoeffTable(n, K, rng.normal(size=basis_size(n, K)))


def test_table_indexing_and_construction():
    t = CoeffTable.from_dict(3, 2, {(0, 1): 2.0, (2, 5): -1.0})
    assert t[0, 1] == 2.0 and t[2, 5] == -1.0 and t[1, 2] == 0.0
    assert t == CoeffTable.delta(3, 2, 0, 1, 2.0) + CoeffTable.delta(3, 2, 2, 5, -1.0)
    assert t.block(2).size == 5
    with pytest.raises(ParameterError):
        CoeffTable(4, 2)
    with pytest.raises(ParameterError):
        CoeffTable(3, 2, np.ones(3))
    with pytest.raises(ParameterError):
        CoeffTable(3, 1, [1.0, np.nan, 0.0, 0.0])


@given(dims, st.integers(0, 5), st.integers(0, 1000))
def test_text_roundtrip(n, K, seed):
    t = random_table(n, K, seed)
    assert CoeffTable.from_text(t.to_text()) == t


@pytest.mark.parametrize("n,k,j", [(2, 0, 1), (2, 3, 2), (3, 2, 4), (3, 3, 7)])
def test_expand_solid_harmonic_is_delta(n, k, j):
    table = expand(SolidHarmonic(k, j, n), 4)
    np.testing.assert_allclose(table.values, CoeffTable.delta(n, 4, k, j).values, atol=1e-12)


@given(dims, st.integers(0, 6), st.integers(0, 1000))
def test_expand_synth_roundtrip(n, K, seed):
    t = random_table(n, K, seed)
    f = lambda X: synth(t, X)  # noqa: E731
    f.n = n
    again = expand(f, K)
    np.testing.assert_allclose(again.values, t.values, atol=1e-10 * max(1.0, np.abs(t.values).max()))


@given(dims, st.integers(0, 5), st.integers(0, 1000))
def test_polynomial_matches_synth_and_is_harmonic(n, K, seed):
    t = random_table(n, K, seed)
    poly = as_polynomial(t)
    X = np.random.default_rng(seed).uniform(-0.6, 0.6, size=(5, n))
    np.testing.assert_allclose(poly(X), synth(t, X), rtol=1e-10, atol=1e-10)
    lap = None
    for i in range(n):
        gam = tuple(2 if d == i else 0 for d in range(n))
        d2 = poly.derivative(gam)
        lap = d2 if lap is None else lap + d2
    np.testing.assert_allclose(lap(X), 0.0, atol=1e-9 * max(1.0, np.abs(t.values).max()))


def test_expand_underflow_and_probe_checks():
    f = SolidHarmonic(1, 1, 3)
    with pytest.raises(ParameterError):
        expand(f, 2, r_probe=1.0)
    with pytest.raises(ParameterError):
        expand(f, 900, r_probe=0.5)


@given(st.floats(0.1, 6), st.integers(0, 30), dims)
def test_lambda_factor_against_scipy(t, k, n):
    exact = math.exp(sp.gammaln(k + n / 2 + t) - sp.gammaln(k + n / 2) - sp.gammaln(t))
    assert float(lambda_factor(t, k, n)) == pytest.approx(exact, rel=1e-10)


def test_lambda_t_order_one_is_degree_shift():
    # Gamma(k + n/2 + 1) / Gamma(k + n/2) = k + n/2
    t = CoeffTable.ones(3, 4)
    np.testing.assert_allclose(lambda_t(1.0, t).values, t.degrees + 1.5, rtol=1e-12)
    with pytest.raises(ParameterError):
        lambda_factor(0.0, 1, 3)


def test_convolve_shapes():
    with pytest.raises(ParameterError):
        convolve(CoeffTable.ones(3, 2), CoeffTable.ones(3, 3))
    a = random_table(2, 3, 1)
    b = random_table(2, 3, 2)
    np.testing.assert_allclose(convolve(a, b).values, a.values * b.values)


@pytest.mark.parametrize("n,s,m", [(3, 2.0, 1.0), (2, 1.0, 0.5), (3, 3.0, 0.0)])
def test_functional_of_constant_table(n, s, m):
    # only the degree-0 term survives at rho = 0, where (1 - rho)^e is largest:
    # lambda_0 Y_0^2 |S|^(1/s) = lambda_0 |S|^(1/s - 1)
    area = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    g = CoeffTable.delta(n, 3, 0, 1)
    res = multiplier_functional(g, s, m, 1.0, return_argmax=True)
    assert res.rho == 0.0
    expected = float(lambda_factor(m + 1, 0, n)) * area ** (1 / s - 1)
    assert res.value == pytest.approx(expected, rel=1e-12)


def test_profile_of_degree_one_table():
    # g = e_(1,j): profile(rho, y) = lambda_1 rho |Y(y)| (int |Y|^2)^(1/2) with int |Y|^2 = 1
    n, m = 3, 1.0
    g = CoeffTable.delta(n, 2, 1, 2)
    rho = np.array([0.0, 0.25, 0.5, 0.9])
    prof = multiplier_profile(g, 2.0, m, rho)
    yp, _ = sphere_nodes(SphereQuadSpec(n, 16, 8))
    Y = SphericalBasis(n, 2)(yp)[:, 2]
    expected = float(lambda_factor(m + 1, 1, n)) * rho[:, None] * np.abs(Y)[None, :]
    np.testing.assert_allclose(prof, expected, atol=1e-12)


def test_functional_exponents_and_wrappers():
    m, N, al, be = 1, 1, 0.5, 2.0
    assert (exponent_L(m, N, al, be), exponent_K(m, N, al, be), exponent_N(m, N, al, be)) == (4.5, 3.5, 4.5)
    g = CoeffTable.ones(3, 6)
    vals = [f(g, 2.0, m, N, al, be) for f in (functional_L, functional_K, functional_N)]
    assert vals == pytest.approx([1.0578554691520416] * 3, rel=1e-12)
    # s = 1: lambda_0 |S|^0 = Gamma(3.5) / (Gamma(1.5) Gamma(2)) = 3.75
    assert functional_N1(g, m, N, al, be) == pytest.approx(3.75, rel=1e-12)
    with pytest.raises(ParameterError):
        multiplier_functional(g, 0.5, m, 1.0)


@pytest.mark.parametrize("N", [1, 2])
@pytest.mark.parametrize("n", [2, 3])
def test_convolution_identity(n, N):
    K = 4
    g = random_table(n, K, 7)
    f = random_table(n, K, 8)
    chk = verify_convolution_identity(g, f, N, 1.0, 0.7, np.ones(n))
    assert chk.lhs > 0
    assert chk.rhs == pytest.approx(chk.lhs, rel=1e-10)
    np.testing.assert_allclose(chk.rhs_components, chk.lhs_components, rtol=1e-9, atol=1e-12)


def test_convolution_identity_literal_form_for_constant_multiplier():
    # with c constant the coefficient route and D^gamma(c * f) agree
    f = random_table(3, 4, 3)
    chk = verify_convolution_identity(CoeffTable.ones(3, 4).scale(2.0), f, 1, 0.5, 0.6, (0, 0, 1))
    assert chk.literal_lhs == pytest.approx(chk.lhs, rel=1e-12)


def test_convolution_identity_rejects_other_orders():
    t = CoeffTable.ones(3, 3)
    with pytest.raises(UnsupportedError):
        verify_convolution_identity(t, t, 3, 1.0, 0.5, (0, 0, 1))


def test_gradient_mean_of_linear_function_is_constant():
    # h = Y_(1,1) is linear, so |grad h| is constant and M_1 = |grad h| |S|
    t = CoeffTable.delta(3, 2, 1, 1)
    prof = gradient_mean_profile(t, 1, [0.1, 0.5, 0.9])
    np.testing.assert_allclose(prof, prof[0], rtol=1e-12)
    grad = math.sqrt(3 / (4 * math.pi))
    assert prof[0] == pytest.approx(grad * 4 * math.pi, rel=1e-10)
