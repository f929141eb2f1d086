"""Poisson and Bergman kernels of the half-space and of the unit ball."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from .errors import DomainError, ParameterError, TruncationError
from .halfspace import HPoint, SUPPORTED_DIMS
from .special import gamma, gamma_ratio, sphere_area
from .sphharm import SphericalBasis, degree_dim
from .symbolic import PowerExpr


def poisson_constant(n):
    """``c_n = Gamma((n+1)/2) / pi^((n+1)/2)``, which makes ``int P(x, t) dx = 1``."""
    return gamma((n + 1) / 2.0) / math.pi ** ((n + 1) / 2.0)


@lru_cache(maxsize=None)
def poisson_expr(n):
    """``P(v, u) = c_n u (|v|^2 + u^2)^(-(n+1)/2)`` as a PowerExpr."""
    return PowerExpr.monomial(n, poisson_constant(n), a=1, two_b=n + 1)


def poisson_h(x, t, n=None):
    """Half-space Poisson kernel at ``(x, t)``; vectorized over leading axes of ``x``."""
    x = np.asarray(x, float)
    if n is None:
        n = x.shape[-1] if x.ndim else 1
    t_arr = np.asarray(t, float)
    if np.any(t_arr <= 0):
        raise DomainError("Poisson kernel needs t > 0")
    X = x.reshape(-1, n)
    T = np.broadcast_to(t_arr, (X.shape[0],)) if t_arr.ndim == 0 else t_arr.reshape(-1)
    vals = poisson_expr(n)(X, T)
    return float(vals[0]) if x.ndim <= 1 and t_arr.ndim == 0 else vals


@dataclass(frozen=True)
class HalfspaceKernelParams:
    n: int
    k: int

    def __post_init__(self):
        if self.n not in SUPPORTED_DIMS:
            raise ParameterError(f"dimension n={self.n} not supported")
        if self.k < 0 or int(self.k) != self.k:
            raise ParameterError("Bergman order k must be a non-negative integer")


@lru_cache(maxsize=None)
def bergman_expr(n, k):
    """``Q_k`` in the variables ``v = x - y``, ``u = t + s``."""
    coef = (-2.0) ** (k + 1) / math.factorial(k)
    return poisson_expr(n).derivative(order_u=k + 1).scale(coef)


def bergman_h_array(n, k, V, U):
    """``Q_k`` at arrays ``V = x - y`` of shape ``(N, n)`` and ``U = t + s`` of shape ``(N,)``."""
    return bergman_expr(n, k)(V, U)


def bergman_h(params: HalfspaceKernelParams, z: HPoint, w: HPoint):
    v = np.subtract(z.x, w.x)[None, :]
    return float(bergman_expr(params.n, params.k)(v, np.array([z.t + w.t]))[0])


def kernel_bound_ratio(params: HalfspaceKernelParams, z: HPoint, w: HPoint):
    """``|Q_k(z, w)| |z - conj(w)|^(k+n+1)``."""
    d = z.distance_to_reflection(w)
    return abs(bergman_h(params, z, w)) * d ** (params.k + params.n + 1)


def kernel_bound_ratio_array(n, k, V, U):
    rho = np.sqrt(np.einsum("ij,ij->i", V, V) + U * U)
    return np.abs(bergman_h_array(n, k, V, U)) * rho ** (k + n + 1)


# ---------------------------------------------------------------------------
# ball


def _check_interior(x):
    x = np.asarray(x, float)
    if np.any(np.linalg.norm(x.reshape(-1, x.shape[-1]), axis=1) >= 1.0):
        raise DomainError("point must lie in the open unit ball")
    return x


def poisson_ball(x, yp, n=None):
    """``(1 - |x|^2) / (n omega_n |x - y'|^n)``; vectorized over rows of ``x``/``yp``."""
    x = _check_interior(x)
    yp = np.asarray(yp, float)
    n = n or x.shape[-1]
    X = x.reshape(-1, n)
    Y = yp.reshape(-1, n)
    d = np.linalg.norm(X - Y, axis=1)
    vals = (1.0 - np.einsum("ij,ij->i", X, X)) / (sphere_area(n) * d ** n)
    return float(vals[0]) if x.ndim == 1 and yp.ndim == 1 else vals


def poisson_ball_series(x, yp, K):
    """Degree-``K`` truncation of ``sum_k r^k sum_j Y_j(y') Y_j(x')``."""
    x = np.asarray(x, float)
    n = x.shape[-1]
    B = SphericalBasis(n, K)
    return float(B.solid(x[None, :])[0] @ B(np.asarray(yp, float)[None, :])[0])


@dataclass(frozen=True)
class BallKernelParams:
    n: int
    m: float = 0.0
    truncation_degree: int = 40

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ParameterError("ball kernels are implemented for n = 2, 3")
        if not self.m > -1:
            raise ParameterError("Bergman weight m must exceed -1")
        if self.truncation_degree < 0:
            raise ParameterError("truncation degree must be >= 0")


@dataclass(frozen=True)
class SeriesValue:
    value: float
    tail_bound: float
    degree: int


def bergman_ball_coefficients(n, m, K):
    """``2 Gamma(m+1+k+n/2) / (Gamma(m+1) Gamma(k+n/2))`` for ``k = 0..K``."""
    k = np.arange(K + 1, dtype=float)
    return 2.0 * gamma_ratio(m + 1 + k + n / 2.0, k + n / 2.0) / gamma(m + 1.0)


def _tail_bound(n, m, K, q):
    """Bound for the terms of degree > K when ``|x||y| = q``."""
    if q == 0:
        return 0.0
    a = bergman_ball_coefficients(n, m, K + 2)
    d1, d2 = degree_dim(n, K + 1), degree_dim(n, K + 2)
    first = a[K + 1] * d1 / sphere_area(n) * q ** (K + 1)
    ratio = q * a[K + 2] * d2 / (a[K + 1] * d1)
    if ratio >= 1.0:
        return math.inf
    return first / (1.0 - ratio)


def bergman_ball(params: BallKernelParams, x, y, tol=None):
    """Truncated zonal series of the ball Bergman kernel ``Q_m(x, y)``.

    Raises TruncationError when the geometric tail bound exceeds ``tol``.
    """
    x = _check_interior(np.asarray(x, float))
    y = _check_interior(np.asarray(y, float))
    n, K = params.n, params.truncation_degree
    B = SphericalBasis(n, K)
    a = bergman_ball_coefficients(n, params.m, K)
    sx, sy = B.solid(x[None, :])[0], B.solid(y[None, :])[0]
    value = float(np.sum(a[B.degrees] * sx * sy))
    q = float(np.linalg.norm(x) * np.linalg.norm(y))
    tail = _tail_bound(n, params.m, K, q)
    if tol is not None and tail > tol:
        raise TruncationError(f"series tail bound {tail:.3g} exceeds tolerance {tol:.3g}", tail)
    return SeriesValue(value, tail, K)


def bergman_ball_array(params: BallKernelParams, X, y):
    """``Q_m(X_i, y)`` for rows ``X_i`` (no tail check)."""
    B = SphericalBasis(params.n, params.truncation_degree)
    a = bergman_ball_coefficients(params.n, params.m, params.truncation_degree)
    sy = B.solid(np.asarray(y, float)[None, :])[0] * a[B.degrees]
    return B.solid(X) @ sy
