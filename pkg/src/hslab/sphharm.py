"""Real spherical harmonics on S^(n-1) for n = 2, 3.

The basis is orthonormal for the unnormalized surface measure.  Within a
degree ``k`` the index ``j`` runs over ``1..d_k``:

* n = 2: ``j = 1`` is ``cos(k phi)/sqrt(pi)`` (the constant ``1/sqrt(2 pi)``
  when ``k = 0``) and ``j = 2`` is ``sin(k phi)/sqrt(pi)``.
* n = 3: ``j = 1..2k+1`` maps to the order ``m = j - 1 - k``; negative
  orders carry ``sin(|m| phi)``, non-negative ones ``cos(m phi)``.
"""

from __future__ import annotations

from functools import lru_cache
import math

import numpy as np

from .errors import ParameterError
from .special import normalized_legendre
from .symbolic import Poly


def degree_dim(n, k):
    """Dimension ``d_k`` of the degree-``k`` spherical harmonics on S^(n-1)."""
    if n == 2:
        return 1 if k == 0 else 2
    if n == 3:
        return 2 * k + 1
    raise ParameterError(f"spherical harmonics only for n in (2, 3), got {n}")


def basis_size(n, K):
    return sum(degree_dim(n, k) for k in range(K + 1))


def degree_offsets(n, K):
    """Start offset of each degree block in the flat ordering."""
    offs = [0]
    for k in range(K + 1):
        offs.append(offs[-1] + degree_dim(n, k))
    return offs


def _order(n, k, j):
    if n == 2:
        return 0 if k == 0 else (k if j == 1 else -k)
    return j - 1 - k


class SphericalBasis:
    """Orthonormal spherical harmonics of degree ``<= max_degree``."""

    def __init__(self, n, max_degree):
        if n not in (2, 3):
            raise ParameterError(f"spherical harmonics only for n in (2, 3), got {n}")
        if max_degree < 0:
            raise ParameterError("max_degree must be >= 0")
        self.n = n
        self.max_degree = int(max_degree)
        self.dims = [degree_dim(n, k) for k in range(max_degree + 1)]
        self.offsets = degree_offsets(n, max_degree)
        self.index = [(k, j) for k in range(max_degree + 1) for j in range(1, self.dims[k] + 1)]
        self.degrees = np.array([k for k, _ in self.index])

    def __len__(self):
        return self.offsets[-1]

    def flat(self, k, j):
        if not 1 <= j <= self.dims[k]:
            raise ParameterError(f"index j={j} out of range for degree {k}")
        return self.offsets[k] + j - 1

    def __call__(self, points):
        """Matrix ``Y[N, B]`` of basis values at unit vectors ``points`` (N, n)."""
        p = np.asarray(points, float).reshape(-1, self.n)
        norms = np.linalg.norm(p, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        u = p / safe[:, None]
        u[norms == 0] = np.eye(self.n)[-1]
        if self.n == 2:
            return self._eval2(u)
        return self._eval3(u)

    def _eval2(self, u):
        phi = np.arctan2(u[:, 1], u[:, 0])
        out = np.empty((u.shape[0], len(self)))
        out[:, 0] = 1.0 / math.sqrt(2 * math.pi)
        c = 1.0 / math.sqrt(math.pi)
        for k in range(1, self.max_degree + 1):
            o = self.offsets[k]
            out[:, o] = c * np.cos(k * phi)
            out[:, o + 1] = c * np.sin(k * phi)
        return out

    def _eval3(self, u):
        K = self.max_degree
        cos_t = np.clip(u[:, 2], -1.0, 1.0)
        phi = np.arctan2(u[:, 1], u[:, 0])
        P = normalized_legendre(K, cos_t)
        out = np.empty((u.shape[0], len(self)))
        c0 = 1.0 / math.sqrt(2 * math.pi)
        cm = 1.0 / math.sqrt(math.pi)
        cos_m = [np.cos(m * phi) for m in range(K + 1)]
        sin_m = [np.sin(m * phi) for m in range(K + 1)]
        for k in range(K + 1):
            o = self.offsets[k]
            for j in range(1, 2 * k + 2):
                m = j - 1 - k
                if m == 0:
                    out[:, o + j - 1] = c0 * P[k, 0]
                elif m > 0:
                    out[:, o + j - 1] = cm * P[k, m] * cos_m[m]
                else:
                    out[:, o + j - 1] = cm * P[k, -m] * sin_m[-m]
        return out

    def solid(self, points):
        """Values of the solid harmonics ``|x|^k Y(x/|x|)`` at interior points."""
        p = np.asarray(points, float).reshape(-1, self.n)
        r = np.linalg.norm(p, axis=1)
        return self(p) * r[:, None] ** self.degrees[None, :]

    def zonal(self, k, xp, yp):
        """``Z^(k)_{x'}(y') = sum_j Y_j^(k)(x') Y_j^(k)(y')`` (pairwise rows)."""
        sl = slice(self.offsets[k], self.offsets[k + 1])
        return np.sum(self(xp)[:, sl] * self(yp)[:, sl], axis=1)


@lru_cache(maxsize=1024)
def solid_harmonic_poly(n, k, j):
    """The solid harmonic ``r^k Y_j^(k)`` as an exact polynomial in ``x``."""
    m = _order(n, k, j)
    am = abs(m)
    X = Poly.variable(n, 0)
    Y = Poly.variable(n, 1)
    # Re/Im of (x + i y)^|m|
    re, im = Poly.constant(n, 1.0), Poly(n)
    for _ in range(am):
        re, im = re * X - im * Y, re * Y + im * X
    angular = re if m >= 0 else im
    if n == 2:
        c = 1.0 / math.sqrt(2 * math.pi) if k == 0 else 1.0 / math.sqrt(math.pi)
        return angular.scale(c)
    Z = Poly.variable(3, 2)
    R2 = X * X + Y * Y + Z * Z
    # r^(k-m) P_k^(m)(z/r) = sum_p c_p z^p r^(k-m-p)
    leg = np.polynomial.legendre.leg2poly([0] * k + [1])
    dleg = np.polynomial.polynomial.polyder(leg, am) if am else leg
    radial = Poly(3)
    for p, cp in enumerate(dleg):
        if abs(cp) < 1e-300:
            continue
        rest = k - am - p
        if rest < 0 or rest % 2:
            continue
        radial = radial + (Z ** p) * (R2 ** (rest // 2)) * float(cp)
    norm = math.sqrt((2 * k + 1) / 2.0 * math.factorial(k - am) / math.factorial(k + am))
    ang = 1.0 / math.sqrt(2 * math.pi) if m == 0 else 1.0 / math.sqrt(math.pi)
    return (radial * angular).scale(norm * ang)
