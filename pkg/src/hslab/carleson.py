"""Carleson-type conditions for discrete measures on H and H^m.

A :class:`DiscreteMeasure` stores atoms as an array of shape ``(N, m, n+1)``
(``m`` half-space factors, last coordinate the height) and positive masses.
Suprema over ``w`` in H^m are realized as maxima over structured candidate
sets built from the atoms; every result reports the maximizing candidate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import itertools
import math

import numpy as np

from .errors import DomainError, ParameterError
from .halfspace import (Cube, HPoint, WeightSpec, enlarged_cell, weighted_box_measure,
                        whitney_cell_containing)
from .quadrature import cube_nodes


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, float)
        if pts.ndim == 2:
            pts = pts[:, None, :]
        masses = np.asarray(self.masses, float).reshape(-1)
        if pts.ndim != 3 or pts.shape[0] != masses.size:
            raise ParameterError("points must have shape (N, m, n+1) matching the masses")
        if np.any(masses <= 0):
            raise ParameterError("atom masses must be positive")
        if np.any(pts[..., -1] <= 0):
            raise DomainError("atoms must lie in the open half-space")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_atoms(cls, atoms):
        """``atoms`` is a list of ``(point_or_tuple_of_points, mass)``."""
        pts, masses = [], []
        for where, mass in atoms:
            if isinstance(where, HPoint):
                where = (where,)
            pts.append([p.as_array() for p in where])
            masses.append(mass)
        return cls(np.array(pts), np.array(masses))

    @property
    def m(self):
        return self.points.shape[1]

    @property
    def n(self):
        return self.points.shape[2] - 1

    def __len__(self):
        return self.masses.size

    def scaled(self, c):
        return DiscreteMeasure(self.points, self.masses * c)

    def __add__(self, other):
        return DiscreteMeasure(np.concatenate([self.points, other.points]),
                               np.concatenate([self.masses, other.masses]))

    def to_text(self):
        lines = []
        for pt, mass in zip(self.points, self.masses):
            coords = " ".join(repr(float(v)) for v in pt.ravel())
            lines.append(f"{coords} {float(mass)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, m=1, n=1):
        rows = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            vals = line.split()
            if len(vals) != m * (n + 1) + 1:
                raise ParameterError(f"line {lineno}: expected {m * (n + 1) + 1} numbers, got {len(vals)}")
            try:
                rows.append([float(v) for v in vals])
            except ValueError as exc:
                raise ParameterError(f"line {lineno}: {exc}") from None
        if not rows:
            raise ParameterError("measure file has no atoms")
        arr = np.array(rows)
        return cls(arr[:, :-1].reshape(-1, m, n + 1), arr[:, -1])

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path, m=1, n=1):
        with open(path) as fh:
            return cls.from_text(fh.read(), m, n)


@dataclass(frozen=True)
class CarlesonParams:
    r: tuple
    tau: tuple = ()

    def __post_init__(self):
        r = tuple(float(v) for v in np.atleast_1d(self.r))
        tau = tuple(float(v) for v in np.atleast_1d(self.tau)) if len(np.atleast_1d(self.tau)) else (1.0,) * len(r)
        if len(tau) != len(r):
            raise ParameterError("r and tau must have equal length")
        if any(t <= 0 for t in tau):
            raise ParameterError("tau entries must be positive")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "tau", tau)

    @property
    def m(self):
        return len(self.r)


@dataclass(frozen=True)
class SupResult:
    value: float
    argmax: tuple
    atoms_used: int
    candidates: int


# ---------------------------------------------------------------------------
# candidates


def factor_candidates(pts, density=1):
    """Candidate centres ``w = (y, s)`` for one factor, shape ``(C, n+1)``.

    Heights put an atom on the bottom or top face of ``Q_w`` (``s = 2t/3``,
    ``2t``), at the atom's own height, and on a dyadic grid refined by
    ``density``; horizontal positions are atom positions, positions putting
    an atom on a side face, and pairwise midpoints.
    """
    pts = np.asarray(pts, float)
    n = pts.shape[1] - 1
    heights = set()
    for t in pts[:, -1]:
        heights.update((2.0 * t / 3.0, t, 2.0 * t))
    t_lo, t_hi = pts[:, -1].min() / 2, pts[:, -1].max() * 4
    j = math.floor(math.log2(t_lo) * density)
    while 2.0 ** (j / density) <= t_hi:
        heights.add(2.0 ** (j / density))
        j += 1
    xs = {tuple(p[:-1]) for p in pts}
    if density > 1:
        for a, b in itertools.combinations(pts, 2):
            xs.add(tuple((a[:-1] + b[:-1]) / 2))
    out = []
    for s in sorted(heights):
        ys = set(xs)
        for x in xs:
            for i in range(n):
                for sign in (-0.5, 0.5):
                    y = list(x)
                    y[i] += sign * s
                    ys.add(tuple(y))
        for y in sorted(ys):
            out.append(y + (s,))
    return np.array(out)


def _default_candidates(mu, density):
    return [factor_candidates(mu.points[:, j, :], density) for j in range(mu.m)]


def in_carleson_box(atoms, cands, rel_tol=1e-12):
    """``[C, N]`` membership of atoms ``(N, n+1)`` in closed boxes ``Q_w`` for candidates ``(C, n+1)``."""
    half = cands[:, -1][:, None, None] / 2.0 * (1 + rel_tol)
    diff = np.abs(atoms[None, :, :] - cands[:, None, :])
    return np.all(diff <= half, axis=2)


def _pt(row):
    return tuple(float(v) for v in row)


def _maximize(per_factor, masses, cand_lists):
    """Max over candidate tuples of ``sum_atoms mass * prod_j A_j[c_j, atom]``."""
    m = len(per_factor)
    if m == 1:
        vals = per_factor[0] @ masses
        i = int(np.argmax(vals))
        return float(vals[i]), (_pt(cand_lists[0][i]),)
    best, arg = -1.0, None
    A0 = per_factor[0] * masses[None, :]
    if m == 2:
        vals = A0 @ per_factor[1].T
        i, k = np.unravel_index(int(np.argmax(vals)), vals.shape)
        return float(vals[i, k]), (_pt(cand_lists[0][i]), _pt(cand_lists[1][k]))
    for i in range(A0.shape[0]):
        B = A0[i][None, :] * per_factor[1]
        vals = B @ per_factor[2].T
        k, l = np.unravel_index(int(np.argmax(vals)), vals.shape)
        if vals[k, l] > best:
            best = float(vals[k, l])
            arg = (_pt(cand_lists[0][i]), _pt(cand_lists[1][k]), _pt(cand_lists[2][l]))
    return best, arg


def carleson_norm(mu: DiscreteMeasure, params: CarlesonParams, candidates=None, density=1):
    """``sup mu(Q_w1 x ... x Q_wm) / prod s_j^r_j`` over candidate tuples."""
    if params.m != mu.m:
        raise ParameterError("parameter count must match the measure's factor count")
    cands = candidates if candidates is not None else _default_candidates(mu, density)
    per_factor = []
    for j in range(mu.m):
        c = np.asarray(cands[j], float)
        A = in_carleson_box(mu.points[:, j, :], c).astype(float)
        per_factor.append(A / c[:, -1][:, None] ** params.r[j])
    value, arg = _maximize(per_factor, mu.masses, cands)
    return SupResult(value, arg, len(mu), math.prod(len(c) for c in cands))


def star_factor(atoms, cands, r, tau, restricted=True):
    """``[C, N]`` matrix of ``t^tau / |z - conj(w)|^(r + tau)`` (zero outside ``t <= 3 s``).

    The power ``tau`` is applied to the height of the integration variable,
    i.e. of the atom.
    """
    dx = atoms[None, :, :-1] - cands[:, None, :-1]
    ssum = atoms[None, :, -1] + cands[:, None, -1]
    dist2 = np.sum(dx ** 2, axis=2) + ssum ** 2
    vals = atoms[None, :, -1] ** tau / dist2 ** (0.5 * (r + tau))
    if restricted:
        vals = np.where(atoms[None, :, -1] <= 3.0 * cands[:, None, -1], vals, 0.0)
    return vals


def carleson_star(mu: DiscreteMeasure, params: CarlesonParams, candidates=None, density=1,
                  restricted=True):
    """Supremum of the kernel integral of ``mu`` over the truncated half-spaces."""
    if params.m != mu.m:
        raise ParameterError("parameter count must match the measure's factor count")
    cands = candidates if candidates is not None else _default_candidates(mu, density)
    per_factor = [star_factor(mu.points[:, j, :], np.asarray(cands[j], float), params.r[j],
                              params.tau[j], restricted) for j in range(mu.m)]
    value, arg = _maximize(per_factor, mu.masses, cands)
    return SupResult(value, arg, len(mu), math.prod(len(c) for c in cands))


def counterexample_measure(K_atoms):
    """``sum_{k=1..K} 2^(2k) delta_(0, 2^k)`` on the half-plane."""
    k = np.arange(1, K_atoms + 1)
    pts = np.column_stack([np.zeros(K_atoms), 2.0 ** k])
    return DiscreteMeasure(pts, 2.0 ** (2 * k))


def counterexample_partial_sums(K_atoms, K_height, r=2.0, tau=1.0):
    """Restricted star value at ``w = (0, 2^K_height)`` and running unrestricted sums."""
    if not K_atoms >= K_height >= 1:
        raise ParameterError("need K_atoms >= K_height >= 1")
    mu = counterexample_measure(K_atoms)
    w = np.array([[0.0, 2.0 ** K_height]])
    restricted = carleson_star(mu, CarlesonParams((r,), (tau,)), candidates=[w]).value
    terms = star_factor(mu.points[:, 0, :], w, r, tau, restricted=False)[0] * mu.masses
    return restricted, list(np.cumsum(terms))


def layer_partition_index(t, s):
    """Indices ``k >= 0`` with ``2^-k s <= t < 3 * 2^-k s`` (empty when ``t > 3s``)."""
    if t > 3 * s:
        return []
    out = []
    k = max(0, math.floor(math.log2(s / t)) - 1)
    while 2.0 ** -k * s > t / 4:
        if 2.0 ** -k * s <= t < 3 * 2.0 ** -k * s:
            out.append(k)
        k += 1
    return out


# ---------------------------------------------------------------------------
# Whitney-cell conditions


def whitney_carleson_check(mu: DiscreteMeasure, theta, window):
    """``max_k mu(Delta_k) / eta_k^theta`` over a window of cells (single factor)."""
    if not window:
        raise ParameterError("empty cell window")
    if mu.m != 1:
        raise ParameterError("cell condition is for measures on H")
    index = {c.sort_key(): i for i, c in enumerate(window)}
    mass = np.zeros(len(window))
    for pt, w in zip(mu.points[:, 0, :], mu.masses):
        cell = whitney_cell_containing(HPoint(tuple(pt[:-1]), pt[-1]))
        i = index.get(cell.sort_key())
        if i is not None:
            mass[i] += w
    eta = np.array([c.eta for c in window])
    ratios = mass / eta ** theta
    i = int(np.argmax(ratios))
    return SupResult(float(ratios[i]), (window[i].sort_key(),), int(np.count_nonzero(mass)), len(window))


def atomize_weighted_measure(window, lam):
    """``m_lam`` restricted to the cells of a window, one atom per cell at its centre."""
    pts = np.array([c.center.as_array() for c in window])
    masses = np.array([weighted_box_measure(c.cube, WeightSpec(lam)) for c in window])
    return DiscreteMeasure(pts, masses)


def cell_integral(u, cube: Cube, alpha, order=6):
    """``int_cube u dm_alpha`` by one tensor Gauss-Legendre panel."""
    lower = np.maximum(cube.lower, [-np.inf] * cube.n + [0.0])
    P, W = cube_nodes(lower, cube.upper, order)
    return float(W @ (u(P) * P[:, -1] ** alpha))


def cell_sum_comparison(u, alpha, beta, window, order=6):
    """The two sums ``sum eta^(n+1) (int_{Delta*} u dm_alpha)^beta`` and the same over ``Delta``."""
    n = window[0].n
    enlarged = sum(c.eta ** (n + 1) * cell_integral(u, enlarged_cell(c), alpha, order) ** beta for c in window)
    plain = sum(c.eta ** (n + 1) * cell_integral(u, c.cube, alpha, order) ** beta for c in window)
    return enlarged, plain


# ---------------------------------------------------------------------------
# MH(p) weights


def mh_ratio(V, p, cube: Cube, order=12):
    """``(avg_Q V) (avg_Q V^(-q/p))^(p/q)`` with ``q`` the conjugate exponent."""
    if not p > 1:
        raise ParameterError("p must exceed 1")
    q = p / (p - 1.0)
    P, W = cube_nodes(cube.lower, cube.upper, order)
    v = np.asarray(V(P), float)
    if np.any(~(v > 0)):
        raise DomainError("weight must be positive at every node")
    vol = cube.volume
    return float(W @ v / vol) * float(W @ v ** (-q / p) / vol) ** (p / q)


def mh_sup(V, p, cube_sample, order=12):
    """Maximum of :func:`mh_ratio` over a list of cubes."""
    return max(mh_ratio(V, p, c, order) for c in cube_sample)


def power_weight(alpha):
    return lambda P: P[:, -1] ** alpha


# ---------------------------------------------------------------------------
# elementary sums


def elementary_sum_exact(x, p, q):
    """Exact check of ``(sum_k prod_i x_ik^p)^(1/p) <= prod_i (sum_k x_ik^q_i)^(1/q_i)``.

    ``x`` holds non-negative Fractions (rows ``i``, columns ``k``); ``p`` and
    ``q_i <= p`` are positive integers.  Both sides are raised to the power
    ``L = lcm(p, q_1, ..., q_m)`` so the comparison is in exact rationals.
    Returns ``(holds, lhs^L, rhs^L)``.
    """
    if any(qi > p or qi < 1 for qi in q) or p < 1:
        raise ParameterError("need integers 1 <= q_i <= p")
    L = math.lcm(p, *q)
    lhs = sum((math.prod(Fraction(row[k]) for row in x) ** p for k in range(len(x[0]))), Fraction(0))
    lhs_L = lhs ** (L // p)
    rhs_L = Fraction(1)
    for row, qi in zip(x, q):
        rhs_L *= sum((Fraction(v) ** qi for v in row), Fraction(0)) ** (L // qi)
    return lhs_L <= rhs_L, lhs_L, rhs_L
