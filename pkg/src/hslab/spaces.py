"""Norms of harmonic functions on the half-space, its products and the ball."""

from __future__ import annotations

from dataclasses import dataclass, replace
import math

import numpy as np

from .errors import ParameterError
from .halfspace import WeightSpec
from .quadrature import (HalfspaceQuadSpec, QuadResult, SphereQuadSpec, integrate_halfspace,
                         integrate_product_halfspace, integrate_sphere, radial_rule, sphere_nodes)
from .special import gauss_jacobi
from .testfns import DerivativeKernel, GradientRequest, ProductOnHm, Scaled, grad_norm

NOT_IN_SPACE = "not-in-space"


@dataclass(frozen=True)
class BergmanNormParams:
    p: float = 2.0
    lam: float = 0.0
    alphas: tuple = ()

    def __post_init__(self):
        if not self.p > 0:
            raise ParameterError("p must be positive")
        if not self.lam > -1:
            raise ParameterError("weight exponent must exceed -1")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if any(not a > -1 for a in self.alphas):
            raise ParameterError("every factor weight exponent must exceed -1")

    @property
    def m(self):
        return max(1, len(self.alphas))


@dataclass(frozen=True)
class MixedNormParams:
    p: float = 2.0
    q: float = 2.0
    alpha: float = 1.0
    n: int = 3

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ParameterError("p and q must be positive")
        if not self.alpha > 0:
            raise ParameterError("alpha must be positive")


def trace_dimension_weight(m, n, s):
    """``lam = (m - 1)(n + 1) + sum_j s_j`` for the diagonal of ``H^m``."""
    return (m - 1) * (n + 1) + sum(s)


def _centers_of(f):
    base = f
    while isinstance(base, Scaled):
        base = base.base
    if isinstance(base, DerivativeKernel):
        return (base.theta.x,)
    return ((0.0,) * f.n,)


def _root(result: QuadResult, p):
    value = max(float(result.value), 0.0)
    root = value ** (1.0 / p)
    err = root / (p * value) * float(result.error_estimate) if value > 0 else 0.0
    status = NOT_IN_SPACE if result.status == "divergent" else result.status
    return QuadResult(root, err, status, result.levels, result.flags)


def pth_power_integral(f, p, lam, spec=None):
    """``int_H |f|^p t^lam`` for a half-space test function."""
    spec = spec or HalfspaceQuadSpec()
    spec = spec.with_centers(*_centers_of(f))
    return integrate_halfspace(lambda X, t: np.abs(f.xt(X, t)) ** p, WeightSpec(lam), spec, n=f.n)


def norm_bergman_h(f, params: BergmanNormParams, spec: HalfspaceQuadSpec | None = None):
    """``(int_H |f|^p t^lam dx dt)^(1/p)``; divergence yields status ``not-in-space``."""
    return _root(pth_power_integral(f, params.p, params.lam, spec), params.p)


def norm_product_h(f: ProductOnHm, params: BergmanNormParams, spec=None, method="auto"):
    """``(int_{H^m} |f|^p prod t_j^{alpha_j})^(1/p)``.

    For a product function the integral factorizes exactly and is computed
    per factor (``method="auto"`` or ``"separable"``); ``method="tensor"``
    runs the full product rule instead.
    """
    alphas = params.alphas or (params.lam,) * f.m
    if len(alphas) != f.m:
        raise ParameterError("one weight exponent per factor is required")
    if f.m == 1:
        return norm_bergman_h(f.factors[0], BergmanNormParams(params.p, alphas[0]), spec)
    p = params.p
    if method in ("auto", "separable"):
        parts = [pth_power_integral(g, p, a, spec) for g, a in zip(f.factors, alphas)]
        value = math.prod(r.value for r in parts)
        err = sum(r.error_estimate * math.prod(q.value for q in parts if q is not r) for r in parts)
        status = "divergent" if any(r.status == "divergent" for r in parts) else "ok"
        flags = tuple(fl for r in parts for fl in r.flags)
        return _root(QuadResult(value, err, status, tuple(r.value for r in parts), flags), p)
    if method != "tensor":
        raise ParameterError("method must be auto, separable or tensor")
    spec = spec or HalfspaceQuadSpec()
    spec = spec.with_centers(*_centers_of(f.factors[0]))
    res = integrate_product_halfspace(lambda Xs, ts: np.abs(f.xt(Xs, ts)) ** p,
                                      [WeightSpec(a) for a in alphas], spec, f.m, n=f.n)
    return _root(res, p)


# ---------------------------------------------------------------------------
# ball norms


def default_rho_grid(points=64):
    """Radii ``sin(pi i / 2N)``, ``i = 0..N-1``: Chebyshev-like, dense towards 1."""
    i = np.arange(points)
    return np.sin(np.pi * i / (2.0 * points))


def _ball_values(f, pts):
    return np.asarray(f(pts), float)


def mp_radial(f, p, r, sphere_spec: SphereQuadSpec | None = None):
    """``M_p(f, r) = (int_S |f(r x')|^p dx')^(1/p)``; ``p = inf`` takes the max over nodes."""
    sphere_spec = sphere_spec or SphereQuadSpec()
    if not 0 <= r < 1:
        raise ParameterError("radius must lie in [0, 1)")
    pts, w = sphere_nodes(sphere_spec)
    vals = np.abs(_ball_values(f, r * pts))
    if math.isinf(p):
        return float(vals.max())
    return float(w @ vals ** p) ** (1.0 / p)


def mp_profile(f, p, radii, sphere_spec=None):
    """``M_p(f, r)`` for every radius of a grid (one batched evaluation)."""
    sphere_spec = sphere_spec or SphereQuadSpec()
    pts, w = sphere_nodes(sphere_spec)
    radii = np.asarray(radii, float)
    X = (radii[:, None, None] * pts[None]).reshape(-1, sphere_spec.n)
    vals = np.abs(_ball_values(f, X)).reshape(radii.size, -1)
    if math.isinf(p):
        return vals.max(axis=1)
    return (vals ** p @ w) ** (1.0 / p)


def norm_mixed(f, params: MixedNormParams, radial_points=32, sphere_spec=None):
    """``(int_0^1 M_p(f, r)^q (1 - r^2)^(alpha q - 1) r^(n-1) dr)^(1/q)``."""
    sphere_spec = sphere_spec or SphereQuadSpec(params.n)
    e = params.alpha * params.q - 1.0
    r, w = radial_rule(radial_points, params.n, e)
    M = mp_profile(f, params.p, r, sphere_spec)
    return float(w @ (M ** params.q * (1.0 + r) ** e)) ** (1.0 / params.q)


def norm_ball_bergman(f, p, alpha, n=3, radial_points=32, sphere_spec=None):
    """``(int_B |f|^p (1 - |x|^2)^alpha dx)^(1/p)``, integrated point by point."""
    sphere_spec = sphere_spec or SphereQuadSpec(n)
    r, wr = radial_rule(radial_points, n, alpha)
    pts, ws = sphere_nodes(sphere_spec)
    X = (r[:, None, None] * pts[None]).reshape(-1, n)
    vals = np.abs(_ball_values(f, X)).reshape(r.size, -1) ** p
    return float((wr * (1.0 + r) ** alpha) @ vals @ ws) ** (1.0 / p)


def norm_triebel(f, p, q, alpha, sphere_spec=None, radial_points=32):
    """``(int_S (int_0^1 |f(r x')|^p (1 - r)^(alpha p - 1) dr)^(q/p) dx')^(1/q)``."""
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    sphere_spec = sphere_spec or SphereQuadSpec()
    u, w = gauss_jacobi(radial_points, alpha * p - 1.0, 0.0)
    r = (1.0 + u) / 2.0
    w = w * 0.5 ** (alpha * p)
    pts, ws = sphere_nodes(sphere_spec)
    X = (r[:, None, None] * pts[None]).reshape(-1, sphere_spec.n)
    vals = np.abs(_ball_values(f, X)).reshape(r.size, -1) ** p
    inner = w @ vals
    return float(ws @ inner ** (q / p)) ** (1.0 / q)


def norm_dn(f, N, p, q, alpha, grad_mode="exact", radial_points=32, sphere_spec=None, step=None):
    """``|f(0)| + || |nabla^N f| ||_{p,q,alpha}``."""
    sphere_spec = sphere_spec or SphereQuadSpec(f.n)
    req = GradientRequest(N, grad_mode, step)
    g = lambda X: grad_norm(f, req, X)  # noqa: E731
    f0 = abs(float(f(np.zeros(f.n))))
    return f0 + norm_mixed(g, MixedNormParams(p, q, alpha, f.n), radial_points, sphere_spec)


def hs_beta_functional(f, s, beta, rho_grid=None, sphere_spec=None, return_argmax=False):
    """``sup_rho (1 - rho)^beta M_s(f, rho)`` over a radial grid."""
    rho = default_rho_grid() if rho_grid is None else np.asarray(rho_grid, float)
    if rho.size == 0:
        raise ParameterError("empty radial grid")
    M = mp_profile(f, s, rho, sphere_spec)
    vals = (1.0 - rho) ** beta * M
    i = int(np.argmax(vals))
    return (float(vals[i]), float(rho[i])) if return_argmax else float(vals[i])
