"""Spherical-harmonic coefficient algebra for harmonic functions on the ball.

A harmonic function is ``f(r x') = sum_k r^k sum_j b_k^j Y_j^(k)(x')``; a
:class:`CoeffTable` stores the ragged array ``b_k^j`` flattened in the
``(k, j)`` order of :class:`~hslab.sphharm.SphericalBasis`.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import ParameterError, UnsupportedError
from .quadrature import SphereQuadSpec, radial_rule, sphere_nodes
from .special import gamma_ratio, gamma
from .sphharm import SphericalBasis, basis_size, degree_offsets, solid_harmonic_poly
from .symbolic import Poly, multi_indices

UNDERFLOW = 1e-250


class CoeffTable:
    """Coefficients ``b_k^j`` for ``0 <= k <= K``, ``1 <= j <= d_k``."""

    def __init__(self, n, K, values=None):
        if n not in (2, 3):
            raise ParameterError("coefficient tables exist for n = 2, 3")
        if K < 0:
            raise ParameterError("degree cap must be >= 0")
        self.n, self.K = n, int(K)
        size = basis_size(n, K)
        vals = np.zeros(size) if values is None else np.array(values, float).reshape(-1)
        if vals.size != size:
            raise ParameterError(f"expected {size} coefficients, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("coefficients must be finite")
        self.values = vals
        self.offsets = degree_offsets(n, K)

    # construction helpers
    @classmethod
    def zeros(cls, n, K):
        return cls(n, K)

    @classmethod
    def ones(cls, n, K):
        return cls(n, K, np.ones(basis_size(n, K)))

    @classmethod
    def delta(cls, n, K, k, j, value=1.0):
        t = cls(n, K)
        t[k, j] = value
        return t

    @classmethod
    def from_dict(cls, n, K, entries):
        t = cls(n, K)
        for (k, j), v in entries.items():
            t[k, j] = v
        return t

    def _flat(self, k, j):
        if not 0 <= k <= self.K:
            raise ParameterError(f"degree {k} outside 0..{self.K}")
        dk = self.offsets[k + 1] - self.offsets[k]
        if not 1 <= j <= dk:
            raise ParameterError(f"index j={j} outside 1..{dk}")
        return self.offsets[k] + j - 1

    def __getitem__(self, kj):
        return float(self.values[self._flat(*kj)])

    def __setitem__(self, kj, v):
        self.values[self._flat(*kj)] = float(v)

    def block(self, k):
        return self.values[self.offsets[k]:self.offsets[k + 1]]

    @property
    def degrees(self):
        return SphericalBasis(self.n, self.K).degrees

    def _same_shape(self, other):
        if not isinstance(other, CoeffTable) or (self.n, self.K) != (other.n, other.K):
            raise ParameterError("coefficient tables have different shapes")

    def __add__(self, other):
        self._same_shape(other)
        return type(self)(self.n, self.K, self.values + other.values)

    def scale(self, c):
        return type(self)(self.n, self.K, c * self.values)

    def copy(self):
        return type(self)(self.n, self.K, self.values.copy())

    def truncated(self, K):
        out = type(self)(self.n, K)
        top = min(K, self.K)
        out.values[:out.offsets[top + 1]] = self.values[:self.offsets[top + 1]]
        return out

    def __eq__(self, other):
        return (isinstance(other, CoeffTable) and (self.n, self.K) == (other.n, other.K)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, K={self.K}, nnz={np.count_nonzero(self.values)})"

    # text format: "k j value" per line
    def to_text(self):
        basis = SphericalBasis(self.n, self.K)
        lines = [f"# n={self.n} K={self.K}"]
        for (k, j), v in zip(basis.index, self.values):
            lines.append(f"{k} {j} {float(v)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, n=None, K=None):
        entries = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if stripped.startswith("#"):
                for tok in stripped[1:].split():
                    key, _, val = tok.partition("=")
                    if key == "n" and n is None:
                        n = int(val)
                    elif key == "K" and K is None:
                        K = int(val)
                continue
            if not stripped:
                continue
            parts = stripped.split()
            if len(parts) != 3:
                raise ParameterError(f"line {lineno}: expected 'k j value'")
            try:
                entries[(int(parts[0]), int(parts[1]))] = float(parts[2])
            except ValueError as exc:
                raise ParameterError(f"line {lineno}: {exc}") from None
        if n is None:
            raise ParameterError("table dimension n not given")
        if K is None:
            K = max((k for k, _ in entries), default=0)
        try:
            return cls.from_dict(n, K, entries)
        except ParameterError as exc:
            raise ParameterError(f"bad table entry: {exc}") from None


class MultiplierSeq(CoeffTable):
    """Multiplier sequence ``c_k^j`` (same ragged shape as a coefficient table)."""


def default_sphere_spec(n, K):
    """A product rule that integrates products of two degree-``K`` harmonics exactly."""
    return SphereQuadSpec(n, azimuthal_points=2 * K + 4, polar_points=K + 2)


# ---------------------------------------------------------------------------
# expansion and synthesis


def expand(f, K, r_probe=0.5, sphere_spec=None):
    """``b_k^j = r^-k int_S f(r x') Y_j^(k)(x') dx'`` at the probe radius."""
    if not 0 < r_probe < 1:
        raise ParameterError("probe radius must lie in (0, 1)")
    if r_probe ** K < UNDERFLOW:
        raise ParameterError(f"r_probe^K = {r_probe}^{K} underflows")
    sphere_spec = sphere_spec or default_sphere_spec(_dim_of(f), K)
    n = sphere_spec.n
    basis = SphericalBasis(n, K)
    pts, w = sphere_nodes(sphere_spec)
    vals = np.asarray(f(r_probe * pts), float)
    coef = basis(pts).T @ (w * vals)
    return CoeffTable(n, K, coef / r_probe ** basis.degrees)


def _dim_of(f):
    n = getattr(f, "n", None)
    if n is None:
        raise ParameterError("cannot infer the dimension; pass sphere_spec")
    return n


def synth(table: CoeffTable, x):
    """Truncated series value at interior points ``x`` (shape ``(n,)`` or ``(N, n)``)."""
    x = np.asarray(x, float)
    basis = SphericalBasis(table.n, table.K)
    vals = basis.solid(x.reshape(-1, table.n)) @ table.values
    return float(vals[0]) if x.ndim == 1 else vals


def as_polynomial(table: CoeffTable) -> Poly:
    """The truncated series as an exact polynomial in ``x``."""
    out = Poly(table.n)
    basis = SphericalBasis(table.n, table.K)
    for (k, j), v in zip(basis.index, table.values):
        if v != 0.0:
            out = out + solid_harmonic_poly(table.n, k, j).scale(float(v))
    return out


class TableFunction:
    """Callable view of a table (``f(X)`` for rows ``X``)."""

    def __init__(self, table):
        self.table = table
        self.n = table.n

    def __call__(self, X):
        return synth(self.table, X)


# ---------------------------------------------------------------------------
# multipliers


def convolve(c: CoeffTable, f: CoeffTable):
    """``c * f``: the entrywise product of coefficient tables."""
    c._same_shape(f)
    return CoeffTable(f.n, f.K, c.values * f.values)


def lambda_factor(t, k, n):
    """``Gamma(k + n/2 + t) / (Gamma(k + n/2) Gamma(t))``."""
    if not t > 0:
        raise ParameterError("order t must be positive")
    k = np.asarray(k, float)
    return gamma_ratio(k + n / 2.0 + t, k + n / 2.0) / gamma(float(t))


def lambda_t(t, f: CoeffTable, n=None):
    """Fractional derivative ``Lambda_t``: degree-``k`` block times :func:`lambda_factor`."""
    n = n or f.n
    factors = lambda_factor(t, f.degrees, n)
    return CoeffTable(f.n, f.K, f.values * factors)


def g_of_c(c: CoeffTable):
    """The harmonic function with coefficient table ``c``."""
    return CoeffTable(c.n, c.K, c.values.copy())


def _functional_parts(g: CoeffTable, m, rho_grid, sphere_spec, outer_spec):
    sphere_spec = sphere_spec or default_sphere_spec(g.n, g.K)
    outer_spec = outer_spec or SphereQuadSpec(g.n, 16, 8)
    basis = SphericalBasis(g.n, g.K)
    xp, wx = sphere_nodes(sphere_spec)
    yp, _ = sphere_nodes(outer_spec)
    lam = lambda_factor(m + 1, basis.degrees, g.n)
    return basis(xp), wx, basis(yp), yp, lam * g.values, basis.degrees


def multiplier_profile(g: CoeffTable, s, m, rho_grid, sphere_spec=None, outer_spec=None):
    """``(int_S |Lambda_{m+1}(g * P_x')(rho y')|^s dx')^(1/s)`` as an array ``[rho, y']``.

    ``(g * P_x')(rho y')`` has coefficients ``c_k^j Y_j^(k)(x')`` so, for
    fixed ``rho``, the values over ``(y', x')`` form the matrix
    ``Y(y') diag(rho^k lambda_k c_k^j) Y(x')^T``.
    """
    rho = np.asarray(rho_grid, float)
    if rho.size == 0:
        raise ParameterError("empty radial grid")
    if np.any((rho < 0) | (rho >= 1)):
        raise ParameterError("radial grid must lie in [0, 1)")
    Yx, wx, Yy, _, coef, deg = _functional_parts(g, m, rho, sphere_spec, outer_spec)
    out = np.empty((rho.size, Yy.shape[0]))
    for i, r in enumerate(rho):
        A = (Yy * (coef * r ** deg)[None, :]) @ Yx.T
        if math.isinf(s):
            out[i] = np.abs(A).max(axis=1)
        else:
            out[i] = (np.abs(A) ** s @ wx) ** (1.0 / s)
    return out


@dataclass(frozen=True)
class FunctionalValue:
    value: float
    rho: float
    y: tuple


def multiplier_functional(g: CoeffTable, s, m, exponent_shift, rho_grid=None, sphere_spec=None,
                          outer_spec=None, return_argmax=False):
    """``sup_{rho, y'} (1 - rho)^e (int_S |Lambda_{m+1}(g * P_x')(rho y')|^s dx')^(1/s)``."""
    if not s >= 1:
        raise ParameterError("s must be >= 1")
    if not m > -1:
        raise ParameterError("m must exceed -1")
    if rho_grid is None:
        from .spaces import default_rho_grid
        rho_grid = default_rho_grid()
    rho = np.asarray(rho_grid, float)
    prof = multiplier_profile(g, s, m, rho, sphere_spec, outer_spec)
    weighted = (1.0 - rho)[:, None] ** exponent_shift * prof
    i, j = np.unravel_index(int(np.argmax(weighted)), weighted.shape)
    value = float(weighted[i, j])
    if not return_argmax:
        return value
    yp, _ = sphere_nodes(outer_spec or SphereQuadSpec(g.n, 16, 8))
    return FunctionalValue(value, float(rho[i]), tuple(float(v) for v in yp[j]))


def exponent_L(m, N, alpha, beta):
    return m + 1 + N + beta - alpha


def exponent_K(m, N, alpha, beta):
    return m + N + beta - alpha


def exponent_N(m, N, alpha, beta):
    return beta - alpha + m + N + 1


def functional_L(g, s, m, N, alpha, beta, **kw):
    return multiplier_functional(g, s, m, exponent_L(m, N, alpha, beta), **kw)


def functional_K(g, s, m, N, alpha, beta, **kw):
    return multiplier_functional(g, s, m, exponent_K(m, N, alpha, beta), **kw)


def functional_N(g, s, m, N, alpha, beta, **kw):
    return multiplier_functional(g, s, m, exponent_N(m, N, alpha, beta), **kw)


def functional_N1(g, m, N, alpha, beta, **kw):
    return multiplier_functional(g, 1.0, m, exponent_N(m, N, alpha, beta), **kw)


# ---------------------------------------------------------------------------
# the convolution identity for derivatives


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    lhs_components: tuple
    rhs_components: tuple
    literal_lhs: float
    literal_components: tuple


def _poly_table(poly: Poly, n, K):
    """Exact coefficient table of a harmonic polynomial of degree <= K."""
    return expand(poly, K, 0.5, default_sphere_spec(n, K))


def verify_convolution_identity(g: CoeffTable, f: CoeffTable, N, m, r, x_prime,
                                sphere_spec=None, radial_points=None):
    """Both sides of the derivative convolution identity at ``r^2 x'``.

    The right side is ``2 int_0^1 int_S Lambda_{m+1}(g * P_xi)(r R x')
    D^gamma f(r R xi) (1 - R^2)^m R^(n-1) dxi dR`` for every ``|gamma| = N``,
    computed by quadrature.  The left side is the coefficient-route value of
    ``c * (D^gamma f)`` at ``r^2 x'`` (``c`` the coefficients of ``g``).  The
    value of ``D^gamma (c * f)`` is returned as ``literal_*``; it coincides
    with the left side only when ``c`` is constant along the degree shift
    ``k -> k - N`` on the relevant blocks.
    """
    if N > 2 or N < 1:
        raise UnsupportedError("derivative identity is implemented for N = 1, 2")
    g._same_shape(f)
    n, K = f.n, f.K
    xp = np.asarray(x_prime, float)
    xp = xp / np.linalg.norm(xp)
    x0 = (r * r) * xp
    fpoly = as_polynomial(f)
    hpoly = as_polynomial(convolve(g, f))
    gammas = multi_indices(n, N)
    lhs, rhs, literal = [], [], []
    sphere_spec = sphere_spec or default_sphere_spec(n, K + 1)
    radial_points = radial_points or (K + 2)
    R, wR = radial_rule(radial_points, n, m)
    wR = wR * (1.0 + R) ** m
    xi, wxi = sphere_nodes(sphere_spec)
    basis = SphericalBasis(n, K)
    lam = lambda_factor(m + 1, basis.degrees, n)
    # Lambda_{m+1}(g * P_xi)(rR x') = sum rho^k lam_k c_kj Y_kj(xi) Y_kj(x') with rho = rR
    Yxi = basis(xi)
    Yx = basis(xp[None, :])[0]
    for gam in gammas:
        Df = fpoly.derivative(gam)
        Dtable = _poly_table(Df, n, K)
        lhs.append(synth(convolve(g, Dtable), x0))
        literal.append(float(hpoly.derivative(gam)(x0[None, :])[0]))
        total = 0.0
        for Ri, wi in zip(R, wR):
            rho = r * Ri
            kern = Yxi @ (lam * g.values * rho ** basis.degrees * Yx)
            vals = Df(rho * xi)
            total += wi * float(wxi @ (kern * vals))
        rhs.append(2.0 * total)
    norm = lambda v: float(np.sqrt(np.sum(np.square(v))))  # noqa: E731
    return IdentityCheck(norm(lhs), norm(rhs), tuple(lhs), tuple(rhs), norm(literal), tuple(literal))


def gradient_mean_profile(table: CoeffTable, N, radii, sphere_spec=None):
    """``M_1(nabla^N h, r)`` on a radius grid for the synthesized polynomial ``h``."""
    n = table.n
    poly = as_polynomial(table)
    derivs = [poly.derivative(g) for g in multi_indices(n, N)]
    sphere_spec = sphere_spec or default_sphere_spec(n, table.K)
    pts, w = sphere_nodes(sphere_spec)
    out = []
    for r in radii:
        comps = np.stack([d(r * pts) for d in derivs], axis=1)
        out.append(float(w @ np.sqrt(np.sum(comps ** 2, axis=1))))
    return np.array(out)
