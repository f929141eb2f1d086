"""Harmonic test functions on the half-space, its products and the ball.

Half-space families take points ``Z`` of shape ``(N, n+1)`` whose last
column is the height; ball families take points of shape ``(N, n)``.
Product families take a list of ``m`` such arrays.  Derivatives are with
respect to all ``n+1`` (resp. ``n``) coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError, ParameterError, UnsupportedError
from .halfspace import HPoint, SUPPORTED_DIMS
from .kernels import poisson_ball, poisson_expr
from .sphharm import degree_dim, solid_harmonic_poly
from .symbolic import Poly, PowerExpr, multi_indices


def _as_points(z, dim):
    if isinstance(z, HPoint):
        return z.as_array()[None, :], True
    arr = np.asarray(z, float)
    single = arr.ndim == 1
    return arr.reshape(-1, dim), single


class TestFunction:
    """Common interface: ``tf(Z)`` values, ``tf.derivative(gamma, Z)`` exact derivatives."""

    __test__ = False  # keep pytest from collecting the class
    domain = "H"
    exact_derivatives = True

    @property
    def dim(self):
        return self.n + 1 if self.domain == "H" else self.n

    def __call__(self, Z):
        pts, single = _as_points(Z, self.dim)
        self._check_domain(pts)
        vals = self._values(pts)
        return float(vals[0]) if single else vals

    def derivative(self, gamma, Z):
        if not self.exact_derivatives:
            raise UnsupportedError(f"{type(self).__name__} has no exact derivatives")
        gamma = tuple(int(g) for g in gamma)
        if len(gamma) != self.dim:
            raise ParameterError("multi-index length must match the coordinate count")
        pts, single = _as_points(Z, self.dim)
        self._check_domain(pts)
        vals = self._derivative(gamma, pts)
        return float(vals[0]) if single else vals

    def _check_domain(self, pts):
        if self.domain == "H" and np.any(pts[:, -1] <= 0):
            raise DomainError("half-space functions need t > 0")
        if self.domain == "B" and np.any(np.einsum("ij,ij->i", pts, pts) >= 1.0):
            raise DomainError("ball functions need |x| < 1")

    def scale_of(self, pts):
        """Local length scale used for finite-difference steps."""
        if self.domain == "H":
            return pts[:, -1]
        return np.maximum(1.0 - np.linalg.norm(pts, axis=1), 1e-3)

    def xt(self, X, t):
        """Values at ``x = X`` (N, n), ``t`` (N,) -- the quadrature calling convention."""
        return self._values(np.column_stack([X, t]))


class _PowerFamily(TestFunction):
    """``F(x - shift_x, t + shift_t)`` for a PowerExpr ``F``."""

    def _expr(self):
        raise NotImplementedError

    def _shift(self):
        raise NotImplementedError

    def _vu(self, pts):
        sx, st = self._shift()
        return pts[:, :-1] - np.asarray(sx)[None, :], pts[:, -1] + st

    def _values(self, pts):
        v, u = self._vu(pts)
        return self._expr()(v, u)

    def _derivative(self, gamma, pts):
        v, u = self._vu(pts)
        return self._expr().derivative(gamma[:-1], gamma[-1])(v, u)


@dataclass(frozen=True, eq=False)
class PoissonShift(_PowerFamily):
    """``f(x, t) = P(x, t + s0)``."""

    s0: float
    n: int = 1

    def __post_init__(self):
        if not self.s0 > 0:
            raise ParameterError("shift s0 must be positive")
        if self.n not in SUPPORTED_DIMS:
            raise ParameterError(f"dimension n={self.n} not supported")

    def _expr(self):
        return poisson_expr(self.n)

    def _shift(self):
        return (0.0,) * self.n, self.s0


@dataclass(frozen=True, eq=False)
class DerivativeKernel(_PowerFamily):
    """``d^l/dt^l |z - conj(theta)|^(1-n)``; for ``n = 1`` the base is ``-log |z - conj(theta)|``."""

    theta: HPoint
    l: int = 0

    def __post_init__(self):
        if self.l < 0:
            raise ParameterError("derivative order l must be >= 0")

    @property
    def n(self):
        return self.theta.n

    def _expr(self):
        n = self.n
        if n == 1:
            if self.l == 0:
                return None
            # d/du (-1/2 log rho) = -u / rho
            base = PowerExpr.monomial(1, -1.0, a=1, two_b=2)
            return base.derivative(order_u=self.l - 1)
        return PowerExpr.monomial(n, 1.0, two_b=n - 1).derivative(order_u=self.l)

    def _shift(self):
        return self.theta.x, self.theta.t

    def _values(self, pts):
        if self.n == 1 and self.l == 0:
            v, u = self._vu(pts)
            return -0.5 * np.log(v[:, 0] ** 2 + u ** 2)
        return super()._values(pts)

    def _derivative(self, gamma, pts):
        if self.n == 1 and self.l == 0:
            if sum(gamma) == 0:
                return self._values(pts)
            v, u = self._vu(pts)
            gx, gt = gamma
            # first derivative of -1/2 log rho, then the rest symbolically
            if gt:
                expr = PowerExpr.monomial(1, -1.0, a=1, two_b=2).derivative((gx,), gt - 1)
            else:
                expr = PowerExpr.monomial(1, -1.0, gamma=(1,), two_b=2).derivative((gx - 1,), 0)
            return expr(v, u)
        return super()._derivative(gamma, pts)


class _PolyFamily(TestFunction):
    domain = "B"

    def _poly(self) -> Poly:
        raise NotImplementedError

    def _values(self, pts):
        return self._poly()(pts)

    def _derivative(self, gamma, pts):
        return self._poly().derivative(gamma)(pts)


@dataclass(frozen=True, eq=False)
class SolidHarmonic(_PolyFamily):
    """``r^k Y_j^(k)(x')`` on the ball (1-based ``j``)."""

    k: int
    j: int
    n: int = 3

    def __post_init__(self):
        if not 1 <= self.j <= degree_dim(self.n, self.k):
            raise ParameterError(f"index j={self.j} out of range for degree {self.k}")

    def _poly(self):
        return solid_harmonic_poly(self.n, self.k, self.j)


@dataclass(frozen=True, eq=False)
class HarmonicPolynomialBall(_PolyFamily):
    """Finite combination ``sum c_kj r^k Y_j^(k)`` given as ``{(k, j): c}``."""

    coeffs: dict
    n: int = 3

    def _poly(self):
        cached = self.__dict__.get("_cache")
        if cached is None:
            cached = Poly(self.n)
            for (k, j), c in sorted(self.coeffs.items()):
                cached = cached + solid_harmonic_poly(self.n, k, j).scale(float(c))
            object.__setattr__(self, "_cache", cached)
        return cached

    @property
    def degree(self):
        return max((k for k, _ in self.coeffs), default=0)


@dataclass(frozen=True, eq=False)
class PoissonBallSlice(TestFunction):
    """``x -> P(x, y0')`` for a fixed unit vector ``y0'``."""

    yp: tuple
    domain = "B"
    exact_derivatives = False

    def __post_init__(self):
        yp = np.asarray(self.yp, float)
        yp = yp / np.linalg.norm(yp)
        object.__setattr__(self, "yp", tuple(yp))

    @property
    def n(self):
        return len(self.yp)

    def _values(self, pts):
        return poisson_ball(pts, np.broadcast_to(np.asarray(self.yp), pts.shape), self.n)


@dataclass(frozen=True, eq=False)
class Scaled(TestFunction):
    """``c * f``."""

    c: float
    base: TestFunction

    @property
    def n(self):
        return self.base.n

    @property
    def domain(self):
        return self.base.domain

    @property
    def exact_derivatives(self):
        return self.base.exact_derivatives

    def _values(self, pts):
        return self.c * self.base._values(pts)

    def _derivative(self, gamma, pts):
        return self.c * self.base._derivative(gamma, pts)


@dataclass(frozen=True, eq=False)
class ProductOnHm:
    """``f(z_1, ..., z_m) = prod_j f_j(z_j)`` on a product of half-spaces."""

    factors: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not 1 <= len(self.factors) <= 3:
            raise ParameterError("products of 1 to 3 factors are supported")
        ns = {f.n for f in self.factors}
        if len(ns) != 1:
            raise ParameterError("all factors must share the dimension n")

    @property
    def m(self):
        return len(self.factors)

    @property
    def n(self):
        return self.factors[0].n

    def __call__(self, Zs):
        out = None
        for f, Z in zip(self.factors, Zs):
            v = np.asarray(f(Z), float)
            out = v if out is None else out * v
        return float(out) if out.ndim == 0 else out

    def xt(self, Xs, ts):
        out = None
        for f, X, t in zip(self.factors, Xs, ts):
            v = f.xt(X, t)
            out = v if out is None else out * v
        return out


def evaluate(tf, z):
    """Value of a test function at one point or a batch of points."""
    return tf(z)


# ---------------------------------------------------------------------------
# gradients

# second-order central stencils for derivative orders 1..4: (offsets, weights)
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}
DEFAULT_RELATIVE_STEP = {1: 1e-4, 2: 1e-3, 3: 1e-2, 4: 2e-2}


@dataclass(frozen=True)
class GradientRequest:
    order: int = 1
    mode: str = "exact"
    step: float | None = None

    def __post_init__(self):
        if self.order < 1:
            raise ParameterError("gradient order must be >= 1")
        if self.mode not in ("exact", "fd"):
            raise ParameterError("mode must be 'exact' or 'fd'")
        if self.mode == "fd" and self.order > 4:
            raise UnsupportedError("finite-difference stencils exist up to order 4")
        if self.step is not None and not self.step > 0:
            raise ParameterError("step must be positive")


def fd_derivative(f, gamma, pts, h):
    """Tensor-product central difference for ``D^gamma f`` with per-point steps ``h``."""
    pts = np.asarray(pts, float)
    h = np.broadcast_to(np.asarray(h, float), (pts.shape[0],))
    axes = [_STENCILS[g] for g in gamma]
    total = np.zeros(pts.shape[0])
    for combo in np.ndindex(*[len(a[0]) for a in axes]):
        shift = np.array([axes[i][0][c] for i, c in enumerate(combo)], float)
        weight = math.prod(axes[i][1][c] for i, c in enumerate(combo))
        if weight == 0.0:
            continue
        total += weight * f(pts + h[:, None] * shift[None, :])
    return total / h ** sum(gamma)


def _batch_values(tf):
    def f(p):
        tf._check_domain(p)
        return tf._values(p)
    return f


def grad_components(tf, req: GradientRequest, Z):
    """All ``D^gamma f`` with ``|gamma| = N``, as an ``(N_points, #gamma)`` array."""
    pts, _ = _as_points(Z, tf.dim)
    gammas = multi_indices(tf.dim, req.order)
    if req.mode == "exact":
        if not tf.exact_derivatives:
            raise UnsupportedError(f"{type(tf).__name__} has no exact derivatives")
        tf._check_domain(pts)
        cols = [tf._derivative(g, pts) for g in gammas]
    else:
        h = req.step if req.step is not None else DEFAULT_RELATIVE_STEP[req.order] * tf.scale_of(pts)
        f = _batch_values(tf)
        cols = [fd_derivative(f, g, pts, h) for g in gammas]
    return np.stack(cols, axis=1)


def grad_norm(tf, req: GradientRequest, Z):
    """``|nabla^N f| = sqrt(sum_{|gamma| = N} |D^gamma f|^2)``."""
    _, single = _as_points(Z, tf.dim)
    vals = np.sqrt(np.sum(grad_components(tf, req, Z) ** 2, axis=1))
    return float(vals[0]) if single else vals


def laplacian_fd(f, pts, h):
    """Five-point (per axis) discrete Laplacian of a batch function ``f``."""
    pts = np.asarray(pts, float)
    h = np.broadcast_to(np.asarray(h, float), (pts.shape[0],))
    out = -2.0 * pts.shape[1] * f(pts)
    for i in range(pts.shape[1]):
        e = np.zeros(pts.shape[1])
        e[i] = 1.0
        out = out + f(pts + h[:, None] * e) + f(pts - h[:, None] * e)
    return out / h ** 2


def parse_testfn(text, n=1):
    """Parse ``name:arg,arg`` descriptors such as ``poisson_shift:1.0``.

    Recognized names: ``poisson_shift:s0``, ``derivative_kernel:x..,t,l``,
    ``solid_harmonic:k,j``, ``poisson_slice:y1,..,yn`` and ``product:a|b``
    for products of half-space descriptors.
    """
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    if name == "product":
        return ProductOnHm(tuple(parse_testfn(part, n) for part in rest.split("|")))
    args = [float(a) for a in rest.split(",") if a.strip()]
    if name == "poisson_shift":
        return PoissonShift(args[0] if args else 1.0, n)
    if name == "derivative_kernel":
        if len(args) != n + 2:
            raise ParameterError("derivative_kernel needs x1..xn, t, l")
        return DerivativeKernel(HPoint(tuple(args[:n]), args[n]), int(args[n + 1]))
    if name == "solid_harmonic":
        return SolidHarmonic(int(args[0]), int(args[1]), n)
    if name == "poisson_slice":
        return PoissonBallSlice(tuple(args))
    raise ParameterError(f"unknown test function family {name!r}")
