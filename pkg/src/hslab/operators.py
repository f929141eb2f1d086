"""Integral operators on the half-space and its products.

All operators are evaluated by the graded half-space rule of
:mod:`hslab.quadrature`.  Whenever an integrand peaks at an evaluation point
``z`` the rule is graded around ``z.x`` as well as around the features of the
input function, so the near-diagonal part of the kernel is resolved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ParameterError
from .halfspace import HPoint, WeightSpec, whitney_cell_containing
from .kernels import bergman_h_array
from .quadrature import (HalfspaceQuadSpec, QuadResult, cube_nodes, halfspace_nodes,
                         integrate_halfspace, integrate_product_halfspace)
from .testfns import DerivativeKernel, ProductOnHm, Scaled, TestFunction


def _centers(f):
    """Horizontal grading centres attached to a function (if any)."""
    out = []
    base = f
    while isinstance(base, Scaled):
        base = base.base
    if isinstance(base, DerivativeKernel):
        out.append(base.theta.x)
    extra = getattr(base, "grading_centers", None)
    if extra:
        out.extend(extra)
    return out


def _values_xt(f, X, t):
    if isinstance(f, TestFunction):
        return f.xt(X, t)
    return np.asarray(f(X, t), float)


@dataclass(frozen=True)
class VecExponents:
    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in np.atleast_1d(self.a))
        b = tuple(float(v) for v in np.atleast_1d(self.b))
        if len(a) != len(b) or not a:
            raise ParameterError("a and b must be non-empty and of equal length")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def m(self):
        return len(self.a)


def s_admissible(e: VecExponents, p, s, n):
    """Hypotheses for boundedness of ``S_{a,b}: L^p(dm_lam) -> L^p_s`` (1 < p)."""
    m = e.m
    return p > 1 and all(
        p * aj > -1 - sj and p * (m * bj - n) > (m - 1) * (n + 1) + m * sj + 1
        for aj, bj, sj in zip(e.a, e.b, s))


def r_admissible(e: VecExponents, p, alphas, n):
    """Hypotheses for boundedness of ``R_{a,b}: L^p_alpha -> L^p(dm_lam)``."""
    m = e.m
    if p == 1:
        return all(m * (al + bj) > n and al < aj for aj, bj, al in zip(e.a, e.b, alphas))
    q = p / (p - 1.0)
    return all(q * (aj - al) > -1 - al and q * (m * (bj + al) - n) > (m - 1) * (n + 1) + m * al + 1
               for aj, bj, al in zip(e.a, e.b, alphas))


def reproducing_hypothesis(p, alpha, k, n):
    """Parameter range in which the weighted reproducing formula is known to hold."""
    if p >= 1:
        return k > (alpha + 1) / p - 1
    return k >= (alpha + n + 1) / p - (n + 1)


def extension_order_ok(p, k, n, m, s):
    """``p (n + k + 1) > (m - 1)(n + 1) + m s_j + p n + 1`` for every ``j``."""
    return all(p * (n + k + 1) > (m - 1) * (n + 1) + m * sj + p * n + 1 for sj in s)


# ---------------------------------------------------------------------------
# trace


@dataclass(frozen=True)
class TraceView:
    """Diagonal restriction of a function on ``H^m``."""

    base: object
    m: int

    def __call__(self, Z):
        return trace_eval(self, Z)


def trace_eval(tv: TraceView, z):
    """``Tr f(z) = f(z, ..., z)``."""
    if isinstance(z, HPoint):
        Z = z.as_array()[None, :]
        return float(np.asarray(tv.base([Z] * tv.m)).reshape(-1)[0])
    Z = np.asarray(z, float)
    return tv.base([Z] * tv.m)


# ---------------------------------------------------------------------------
# reproducing formula and the extension operator


def _points_array(zs):
    return np.array([z.x for z in zs]), np.array([z.t for z in zs])


def reproduce_many(f, k, zs, spec: HalfspaceQuadSpec | None = None, p=2.0, alpha=0.0):
    """``int_H f(w) Q_k(z, w) s^k dw`` for several points on shared nodes."""
    zs = list(zs)
    n = zs[0].n
    spec = (spec or HalfspaceQuadSpec()).with_centers(*[z.x for z in zs], *_centers(f))
    ZX, Zt = _points_array(zs)

    def integrand(X, t):
        fv = _values_xt(f, X, t)
        out = np.empty((X.shape[0], len(zs)))
        for j in range(len(zs)):
            out[:, j] = fv * bergman_h_array(n, k, ZX[j][None, :] - X, Zt[j] + t)
        return out

    res = integrate_halfspace(integrand, WeightSpec(k), spec, n=n)
    if not reproducing_hypothesis(p, alpha, k, n):
        res = res.with_flags("precondition-violated")
    return res


def reproduce(f, k, z: HPoint, spec=None, p=2.0, alpha=0.0):
    """Right-hand side of the reproducing formula at one point."""
    res = reproduce_many(f, k, [z], spec, p, alpha)
    levels = tuple(float(np.asarray(v).reshape(-1)[0]) for v in res.levels)
    return QuadResult(float(res.value[0]), float(res.error_estimate[0]), res.status, levels, res.flags)


def _mean_point(zs):
    X, t = _points_array(zs)
    return HPoint(tuple(X.mean(axis=0)), float(t.mean()))


def extend(g, k, zs, spec=None):
    """``f(z_1..z_m) = int_H Q_k((z_1 + ... + z_m)/m, w) g(w) s^k dw``."""
    return reproduce(g, k, _mean_point(zs), spec)


@dataclass(frozen=True, eq=False)
class Extension:
    """The extension of ``g`` to ``H^m`` as a callable on lists of point arrays.

    Grading centres are fixed at construction so that nearby evaluation
    points (finite-difference stencils) share one set of quadrature nodes.
    """

    g: object
    k: int
    m: int
    spec: HalfspaceQuadSpec = field(default_factory=HalfspaceQuadSpec)
    centers: tuple = ()

    def __call__(self, Zs):
        arrays = [np.atleast_2d(np.asarray(Z, float)) for Z in Zs]
        mean = sum(arrays) / self.m
        spec = self.spec.with_centers(*(self.centers or [tuple(r[:-1]) for r in mean]))
        zs = [HPoint(tuple(r[:-1]), r[-1]) for r in mean]
        res = reproduce_many(self.g, self.k, zs, spec)
        vals = np.asarray(res.value, float)
        return float(vals[0]) if np.ndim(Zs[0]) == 1 else vals


# ---------------------------------------------------------------------------
# expanded Bergman projection and the R family


def kernel_transform(F, zs, c, d, spec=None, weights_z=None):
    """``int_H F(w) s^c prod_j |z_j - conj(w)|^(-d_j) dw`` (a single column)."""
    zs = list(zs)
    n = zs[0].n
    d = np.broadcast_to(np.asarray(d, float), (len(zs),))
    spec = (spec or HalfspaceQuadSpec()).with_centers(*[z.x for z in zs], *_centers(F))
    ZX, Zt = _points_array(zs)

    def integrand(X, t):
        out = _values_xt(F, X, t)
        for j in range(len(zs)):
            dx = ZX[j][None, :] - X
            rho2 = np.einsum("ij,ij->i", dx, dx) + (Zt[j] + t) ** 2
            out = out * rho2 ** (-0.5 * d[j])
        return out

    return integrate_halfspace(integrand, WeightSpec(c), spec, n=n)


def s_expanded(e: VecExponents, f, zs, spec=None, region=None, order=8):
    """``prod t_j^a_j int_H f(w) s^(-n-1+sum b) / prod |z_j - conj(w)|^(a_j+b_j) dw``.

    With ``region`` (a Cube or Box) the integral is restricted to it and
    evaluated by one tensor Gauss-Legendre panel of the given order.
    """
    zs = list(zs)
    if len(zs) != e.m:
        raise ParameterError("need one point per factor")
    n = zs[0].n
    c = -n - 1 + sum(e.b)
    d = [aj + bj for aj, bj in zip(e.a, e.b)]
    pref = math.prod(z.t ** aj for z, aj in zip(zs, e.a))
    if region is not None:
        P, W = cube_nodes(region.lower, region.upper, order)
        X, t = P[:, :-1], P[:, -1]
        vals = _values_xt(f, X, t) * t ** c
        for z, dj in zip(zs, d):
            dx = np.asarray(z.x)[None, :] - X
            vals = vals * (np.einsum("ij,ij->i", dx, dx) + (z.t + t) ** 2) ** (-0.5 * dj)
        return QuadResult(pref * float(W @ vals), 0.0, "ok", (), ())
    res = kernel_transform(f, zs, c, d, spec)
    return QuadResult(pref * res.value, pref * res.error_estimate, res.status,
                      tuple(pref * v for v in res.levels), res.flags)


def s_cell(a, b, cell, f, z: HPoint, order=6):
    """``t^a int_{cell} s^b f(w) / |z - conj(w)|^(n+1+a+b) dw`` by one panel."""
    if not a > 0 or not b > -1:
        raise ParameterError("cell operator needs a > 0 and b > -1")
    cube = cell.cube
    P, W = cube_nodes(cube.lower, cube.upper, order)
    X, t = P[:, :-1], P[:, -1]
    n = cell.n
    dx = np.asarray(z.x)[None, :] - X
    ker = (np.einsum("ij,ij->i", dx, dx) + (z.t + t) ** 2) ** (-0.5 * (n + 1 + a + b))
    return z.t ** a * float(W @ (t ** b * _values_xt(f, X, t) * ker))


def s_cell_batch(a, b, cell, f, Z, order=6):
    """``s_cell`` at many points ``Z`` of shape ``(N, n+1)``, sharing the cell nodes."""
    cube = cell.cube
    P, W = cube_nodes(cube.lower, cube.upper, order)
    X, t = P[:, :-1], P[:, -1]
    n = cell.n
    fw = W * t ** b * _values_xt(f, X, t)
    dx = Z[:, None, :-1] - X[None, :, :]
    rho2 = np.sum(dx ** 2, axis=2) + (Z[:, -1][:, None] + t[None, :]) ** 2
    return Z[:, -1] ** a * (rho2 ** (-0.5 * (n + 1 + a + b)) @ fw)


def s_tilde(a, b, f, z: HPoint, order=6):
    """``S~ f(z) = S^k f(z)`` for the Whitney cell containing ``z``."""
    return s_cell(a, b, whitney_cell_containing(z), f, z, order)


def _factor_integral(g, w: HPoint, a, b, spec):
    """``int_H g(z) t^a |z - conj(w)|^-(a+b) dz``."""
    return kernel_transform(g, [w], a, [a + b], spec)


def r_expanded(e: VecExponents, g, w: HPoint, spec=None, method="auto"):
    """``s^(-m(n+1)+sum b) int_{H^m} g(z_1..z_m) prod t_j^a_j / |z_j - conj(w)|^(a_j+b_j) dz``.

    Product functions factorize exactly (``method="auto"``); ``"tensor"``
    forces the product rule.
    """
    n = w.n
    pref = w.t ** (-e.m * (n + 1) + sum(e.b))
    if isinstance(g, ProductOnHm) and method == "auto":
        if g.m != e.m:
            raise ParameterError("factor count mismatch")
        parts = [_factor_integral(gj, w, aj, bj, spec) for gj, aj, bj in zip(g.factors, e.a, e.b)]
        return _combine_product(parts, pref)
    if e.m == 1 and method == "auto":
        res = _factor_integral(g, w, e.a[0], e.b[0], spec)
        return _combine_product([res], pref)
    spec = (spec or HalfspaceQuadSpec()).with_centers(w.x)
    wx = np.asarray(w.x)

    def integrand(Xs, ts):
        vals = np.asarray(g(Xs, ts) if not isinstance(g, ProductOnHm) else g.xt(Xs, ts), float)
        for X, t, aj, bj in zip(Xs, ts, e.a, e.b):
            dx = wx[None, :] - X
            vals = vals * (np.einsum("ij,ij->i", dx, dx) + (w.t + t) ** 2) ** (-0.5 * (aj + bj))
        return vals

    res = integrate_product_halfspace(integrand, [WeightSpec(aj) for aj in e.a], spec, e.m, n=n)
    return QuadResult(pref * res.value, pref * res.error_estimate, res.status,
                      tuple(pref * v for v in res.levels), res.flags)


def _combine_product(parts, pref=1.0):
    value = pref * math.prod(r.value for r in parts)
    err = 0.0
    for r in parts:
        others = math.prod(abs(q.value) for q in parts if q is not r)
        err += abs(pref) * r.error_estimate * others
    status = "divergent" if any(r.status == "divergent" for r in parts) else "ok"
    flags = tuple(fl for r in parts for fl in r.flags)
    return QuadResult(value, err, status, tuple(r.value for r in parts), flags)


def r_k(k, g, w: HPoint, spec=None, method="auto"):
    """``int_{H^m} g(z_1..z_m) prod Q_k(z_j, w) dm_k(z_1)...dm_k(z_m)``."""
    n = w.n
    if isinstance(g, ProductOnHm) and method == "auto":
        return _combine_product([reproduce(gj, k, w, spec) for gj in g.factors])
    if not isinstance(g, ProductOnHm) and method == "auto":
        return reproduce(g, k, w, spec)
    m = g.m
    spec = (spec or HalfspaceQuadSpec()).with_centers(w.x)
    wx = np.asarray(w.x)

    def integrand(Xs, ts):
        vals = g.xt(Xs, ts)
        for X, t in zip(Xs, ts):
            vals = vals * bergman_h_array(n, k, X - wx[None, :], t + w.t)
        return vals

    return integrate_product_halfspace(integrand, [WeightSpec(k)] * m, spec, m, n=n)
