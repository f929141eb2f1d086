"""Exact derivative algebra for the closed-form kernels and test functions.

``PowerExpr`` holds finite sums

    sum c * v^gamma * u^a * rho^(-b),     rho = |v|^2 + u^2,

in the variables ``v`` in R^n and ``u``.  The family is closed under
``d/du`` and ``d/dv_i``, which is all the half-space kernels need: the
Poisson kernel is ``c_n u rho^(-(n+1)/2)`` and the Bergman kernels and the
derivative test functions are ``u``-derivatives of such terms.

``Poly`` is a plain multivariate polynomial used for solid harmonics.
"""

from __future__ import annotations

from collections import defaultdict
import itertools

import numpy as np


class PowerExpr:
    """Sum of terms ``coef * v^gamma * u^a * rho^(-two_b/2)``."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        self.terms = {}
        for key, c in (terms or {}).items():
            if c != 0:
                self.terms[key] = self.terms.get(key, 0.0) + c

    @classmethod
    def monomial(cls, n, coef=1.0, gamma=None, a=0, two_b=0):
        gamma = tuple(gamma) if gamma is not None else (0,) * n
        return cls(n, {(gamma, a, two_b): coef})

    def _collect(self, pairs):
        acc = defaultdict(float)
        for key, c in pairs:
            acc[key] += c
        return PowerExpr(self.n, {k: c for k, c in acc.items() if c != 0.0})

    def __add__(self, other):
        return self._collect(itertools.chain(self.terms.items(), other.terms.items()))

    def scale(self, c):
        return PowerExpr(self.n, {k: c * v for k, v in self.terms.items()})

    def d_u(self):
        out = []
        for (g, a, tb), c in self.terms.items():
            if a:
                out.append(((g, a - 1, tb), c * a))
            # d/du rho^(-b) = -2b u rho^(-b-1)
            if tb:
                out.append(((g, a + 1, tb + 2), -c * tb))
        return self._collect(out)

    def d_v(self, i):
        out = []
        for (g, a, tb), c in self.terms.items():
            if g[i]:
                g2 = list(g)
                g2[i] -= 1
                out.append(((tuple(g2), a, tb), c * g[i]))
            if tb:
                g2 = list(g)
                g2[i] += 1
                out.append(((tuple(g2), a, tb + 2), -c * tb))
        return self._collect(out)

    def derivative(self, gamma_v=None, order_u=0):
        """Mixed derivative ``D_v^gamma_v D_u^order_u``."""
        expr = self
        for _ in range(order_u):
            expr = expr.d_u()
        if gamma_v is not None:
            for i, gi in enumerate(gamma_v):
                for _ in range(gi):
                    expr = expr.d_v(i)
        return expr

    def __call__(self, v, u):
        """Evaluate at ``v`` of shape ``(N, n)`` and ``u`` of shape ``(N,)``."""
        v = np.asarray(v, float).reshape(-1, self.n)
        u = np.asarray(u, float).reshape(-1)
        rho = np.einsum("ij,ij->i", v, v) + u * u
        log_rho = np.log(rho)
        out = np.zeros_like(u)
        by_b = defaultdict(list)
        for (g, a, tb), c in self.terms.items():
            by_b[tb].append((g, a, c))
        for tb, group in by_b.items():
            inner = np.zeros_like(u)
            for g, a, c in group:
                term = np.full_like(u, c)
                if a:
                    term = term * u ** a
                for i, gi in enumerate(g):
                    if gi:
                        term = term * v[:, i] ** gi
                inner += term
            out += inner * np.exp(-0.5 * tb * log_rho)
        return out

    def __len__(self):
        return len(self.terms)


class Poly:
    """Multivariate polynomial stored as ``{exponent tuple: coefficient}``."""

    __slots__ = ("dim", "coef")

    def __init__(self, dim, coef=None):
        self.dim = dim
        self.coef = {k: v for k, v in (coef or {}).items() if v != 0.0}

    @classmethod
    def constant(cls, dim, c):
        return cls(dim, {(0,) * dim: float(c)})

    @classmethod
    def variable(cls, dim, i):
        e = [0] * dim
        e[i] = 1
        return cls(dim, {tuple(e): 1.0})

    def __add__(self, other):
        out = dict(self.coef)
        for k, v in other.coef.items():
            out[k] = out.get(k, 0.0) + v
        return Poly(self.dim, out)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, c):
        return Poly(self.dim, {k: c * v for k, v in self.coef.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(float(other))
        out = defaultdict(float)
        for k1, v1 in self.coef.items():
            for k2, v2 in other.coef.items():
                out[tuple(a + b for a, b in zip(k1, k2))] += v1 * v2
        return Poly(self.dim, dict(out))

    __rmul__ = __mul__

    def __pow__(self, p):
        out = Poly.constant(self.dim, 1.0)
        for _ in range(p):
            out = out * self
        return out

    def diff(self, i, times=1):
        out = self
        for _ in range(times):
            new = {}
            for k, v in out.coef.items():
                if k[i]:
                    e = list(k)
                    e[i] -= 1
                    new[tuple(e)] = new.get(tuple(e), 0.0) + v * k[i]
            out = Poly(self.dim, new)
        return out

    def derivative(self, gamma):
        out = self
        for i, g in enumerate(gamma):
            out = out.diff(i, g)
        return out

    @property
    def degree(self):
        return max((sum(k) for k in self.coef), default=0)

    def __call__(self, x):
        x = np.asarray(x, float).reshape(-1, self.dim)
        out = np.zeros(x.shape[0])
        deg = self.degree
        powers = [np.vander(x[:, i], deg + 1, increasing=True) for i in range(self.dim)]
        for k, v in self.coef.items():
            term = np.full(x.shape[0], v)
            for i, e in enumerate(k):
                if e:
                    term = term * powers[i][:, e]
            out += term
        return out

    def laplacian(self):
        out = Poly(self.dim)
        for i in range(self.dim):
            out = out + self.diff(i, 2)
        return out


def multi_indices(dim, order):
    """All multi-indices ``gamma`` in N^dim with ``|gamma| = order``."""
    if dim == 1:
        return [(order,)]
    out = []
    for first in range(order, -1, -1):
        for rest in multi_indices(dim - 1, order - first):
            out.append((first,) + rest)
    return out
