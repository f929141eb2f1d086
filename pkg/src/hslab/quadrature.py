"""Weighted quadrature on the half-space, its finite products, the sphere and the ball.

Half-space rule
---------------
Heights are split along the dyadic Whitney layers ``[2^j, 2^(j+1)]`` between
the floor ``eps`` and the ceiling ``T``.  The strip ``(0, eps]`` is one
Gauss-Jacobi panel that absorbs the weight ``t^lam`` exactly (when
``lam > -1``) and ``[T, inf)`` is one Gauss-Legendre panel in ``u = T/t``.
Horizontally each layer of height ``h`` is cut at ``c +- min(h, 1) 2^j`` around
every grading centre ``c`` up to ``|x_i| = R``, with two mapped panels
``x = +-R/u`` covering the rest of the line.  Refinement level ``l`` halves
``eps``, doubles ``R`` and ``T`` and raises the per-axis order by one.

Non-convergence is reported in the result status (``"divergent"``), never
as a silently large number.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .errors import CapacityError, DivergenceError, DomainError, EvaluationError, ParameterError
from .halfspace import WeightSpec
from .special import gauss_jacobi, gauss_legendre

CHUNK = 400_000
GROWTH_FACTOR = 2.0
LAYER_RATIO_LIMIT = 0.95
LAYER_SIGNIFICANCE = 1e-6
TAIL_POWER = 8


@dataclass(frozen=True)
class HalfspaceQuadSpec:
    x_radius: float = 32.0
    t_floor: float = 2.0 ** -8
    t_ceiling: float = 2.0 ** 8
    points_per_cell_axis: int = 4
    refinement_levels: int = 3
    x_centers: tuple = ()

    def __post_init__(self):
        if not self.x_radius > 0:
            raise ParameterError("x_radius must be positive")
        if not 0 < self.t_floor < self.t_ceiling:
            raise ParameterError("need 0 < t_floor < t_ceiling")
        if self.points_per_cell_axis < 2:
            raise ParameterError("points_per_cell_axis must be >= 2")
        if self.refinement_levels < 1:
            raise ParameterError("refinement_levels must be >= 1")
        object.__setattr__(self, "x_centers", tuple(
            tuple(float(v) for v in np.atleast_1d(c)) for c in self.x_centers))

    def level(self, l):
        """``(eps, R, T, order)`` at refinement level ``l`` (0-based)."""
        return (self.t_floor / 2 ** l, self.x_radius * 2 ** l,
                self.t_ceiling * 2 ** l, self.points_per_cell_axis + l)

    def with_centers(self, *centers):
        merged = list(self.x_centers)
        for c in centers:
            c = tuple(float(v) for v in np.atleast_1d(c))
            if c not in merged:
                merged.append(c)
        return replace(self, x_centers=tuple(merged))


@dataclass(frozen=True)
class SphereQuadSpec:
    n: int = 3
    azimuthal_points: int = 64
    polar_points: int = 32

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ParameterError("sphere rules exist for n = 2, 3")
        if self.azimuthal_points < 4:
            raise ParameterError("azimuthal_points must be >= 4")
        if self.n == 3 and self.polar_points < 2:
            raise ParameterError("polar_points must be >= 2")


@dataclass(frozen=True)
class QuadResult:
    value: object
    error_estimate: object
    status: str = "ok"
    levels: tuple = ()
    flags: tuple = field(default_factory=tuple)

    @property
    def ok(self):
        return self.status == "ok"

    def raise_if_divergent(self):
        if self.status == "divergent":
            raise DivergenceError("integral diverges under refinement", self.levels)
        return self

    def with_flags(self, *flags):
        return replace(self, flags=self.flags + tuple(flags))


# ---------------------------------------------------------------------------
# one-dimensional panels


def _t_panels(eps, T, order, lam):
    """List of ``(nodes, weights)`` in ``t``; the weights include ``t^lam``."""
    panels = []
    if lam > -1:
        u, w = gauss_jacobi(order, 0.0, lam)
        t = eps * (1.0 + u) / 2.0
        panels.append((t, w * (eps / 2.0) ** (lam + 1.0), eps))
    else:
        # not absorbable: plain Gauss-Legendre; convergence then rests on the integrand
        t, w = gauss_legendre(order, 0.0, eps)
        panels.append((t, w * t ** lam, eps))
    cuts = [eps]
    j = math.floor(math.log2(eps)) + 1
    while 2.0 ** j < T:
        if 2.0 ** j > eps * (1 + 1e-12):
            cuts.append(2.0 ** j)
        j += 1
    cuts.append(T)
    for a, b in zip(cuts[:-1], cuts[1:]):
        t, w = gauss_legendre(order, a, b)
        panels.append((t, w * t ** lam, a))
    u, w = gauss_legendre(order, 0.0, 1.0)
    # t = T u^-q: an algebraic tail t^-a becomes u^(q(a-1)-1), smooth for slow decay
    q = TAIL_POWER
    t = T / u ** q
    panels.append((t, w * q * T / u ** (q + 1) * t ** lam, T))
    return panels


def _axis_breaks(h, centers, R):
    pts = {-R, R}
    for c in centers:
        c = min(max(c, -R), R)
        pts.add(c)
        step = h
        while step < 2 * R:
            for v in (c - step, c + step):
                if -R < v < R:
                    pts.add(v)
            step *= 2.0
    pts = sorted(pts)
    kept = [pts[0]]
    for v in pts[1:-1]:
        if v - kept[-1] >= 0.5 * h:
            kept.append(v)
    if pts[-1] - kept[-1] < 0.5 * h and len(kept) > 1:
        kept.pop()
    kept.append(pts[-1])
    return kept


def axis_rule(h, centers, R, order):
    """Nodes and weights on the real line graded at scale ``h`` around ``centers``."""
    breaks = _axis_breaks(h, centers, R)
    xs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        x, w = gauss_legendre(order, a, b)
        xs.append(x)
        ws.append(w)
    u, w = gauss_legendre(order, 0.0, 1.0)
    tail_w = w * R / u ** 2
    xs.extend([-R / u, R / u])
    ws.extend([tail_w, tail_w])
    return np.concatenate(xs), np.concatenate(ws)


def _tensor_x(h, centers, R, order, n, floor=1.0):
    # grade from the layer scale, but never coarser than unit scale so that
    # integrands with a fixed horizontal length scale stay resolved
    h = min(h, floor)
    per_axis = []
    for i in range(n):
        axis_centers = sorted({c[i] for c in centers}) if centers else [0.0]
        per_axis.append(axis_rule(h, axis_centers, R, order))
    if n == 1:
        x, w = per_axis[0]
        return x[:, None], w
    grids = np.meshgrid(*[p[0] for p in per_axis], indexing="ij")
    wgrids = np.meshgrid(*[p[1] for p in per_axis], indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1)
    W = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return X, W


def halfspace_panels(n, spec: HalfspaceQuadSpec, level, lam):
    """Yield ``(X, t, W)`` node blocks, one per height panel, for a refinement level.

    ``W`` already contains the weight ``t^lam``.
    """
    eps, R, T, order = spec.level(level)
    centers = spec.x_centers or ((0.0,) * n,)
    for t_nodes, t_w, h in _t_panels(eps, T, order, lam):
        if h >= T:
            # closure panel: one self-similar x-rule per height node
            blocks = [_scaled_x(t, h, centers, R, order, n) for t in t_nodes]
            Xf = np.concatenate([b[0] for b in blocks])
            tf = np.concatenate([np.full(b[0].shape[0], t) for b, t in zip(blocks, t_nodes)])
            Wf = np.concatenate([b[1] * w for b, w in zip(blocks, t_w)])
        else:
            X, Wx = _scaled_x(float(t_nodes.max()), h, centers, R, order, n)
            nx = X.shape[0]
            Xf = np.repeat(X, t_nodes.size, axis=0)
            tf = np.tile(t_nodes, nx)
            Wf = np.repeat(Wx, t_nodes.size) * np.tile(t_w, nx)
        yield Xf, tf, Wf


def _scaled_x(top, h, centers, R, order, n):
    # an integrand at height t spreads horizontally over a width ~t, so layers
    # reaching above R/4 use the same rule dilated to cover radius 4 t
    sigma = max(1.0, 4.0 * top / R)
    if sigma == 1.0:
        return _tensor_x(h, centers, R, order, n)
    scaled = tuple(tuple(ci / sigma for ci in c) for c in centers)
    X, W = _tensor_x(h / sigma, scaled, R, order, n, floor=1.0 / sigma)
    return X * sigma, W * sigma ** n


def halfspace_nodes(n, spec, level, lam):
    """All nodes of a level concatenated: ``(X, t, W)``."""
    blocks = list(halfspace_panels(n, spec, level, lam))
    return (np.concatenate([b[0] for b in blocks]), np.concatenate([b[1] for b in blocks]),
            np.concatenate([b[2] for b in blocks]))


def _evaluate(f, X, t):
    vals = np.asarray(f(X, t), dtype=float)
    if vals.shape[0] != X.shape[0]:
        raise ParameterError("integrand must return one row per node")
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = np.argwhere(bad)[0][0]
        node = tuple(X[idx]) + (float(t[idx]),)
        raise EvaluationError(f"non-finite integrand value at node {node}", node=node)
    return vals


def _integrate_level(f, n, spec, level, lam):
    total = None
    layer_abs = []
    for X, t, W in halfspace_panels(n, spec, level, lam):
        acc = None
        acc_abs = 0.0
        for s in range(0, X.shape[0], CHUNK):
            vals = _evaluate(f, X[s:s + CHUNK], t[s:s + CHUNK])
            w = W[s:s + CHUNK]
            part = np.tensordot(w, vals, axes=(0, 0))
            acc = part if acc is None else acc + part
            acc_abs += float(np.sum(np.abs(w[:, None] * vals.reshape(vals.shape[0], -1))))
        total = acc if total is None else total + acc
        layer_abs.append(acc_abs)
    return total, layer_abs


def _layer_ratio_flags(layer_abs, lam):
    """Non-decay of the per-layer absolute mass at either end of the height range."""
    flags = []
    mass = sum(layer_abs)
    if mass == 0:
        return flags
    inner = layer_abs[1:-1]
    if len(inner) >= 3:
        top, below = inner[-1], inner[-2]
        if top > LAYER_SIGNIFICANCE * mass and below > 0 and top / below > LAYER_RATIO_LIMIT:
            flags.append("no-decay-at-infinity")
        low, above = inner[0], inner[1]
        if low > LAYER_SIGNIFICANCE * mass and above > 0 and low / above > LAYER_RATIO_LIMIT:
            flags.append("no-decay-at-boundary")
    return flags


def integrate_halfspace(f, w: WeightSpec, spec: HalfspaceQuadSpec | None = None, n=None):
    """``int_H f(x, t) t^lam dx dt``.

    ``f(X, t)`` receives ``X`` of shape ``(N, n)`` and ``t`` of shape ``(N,)``
    and returns ``(N,)`` or ``(N, P)`` values; vector-valued integrands are
    integrated column by column on shared nodes.
    """
    spec = spec or HalfspaceQuadSpec()
    if n is None:
        n = len(spec.x_centers[0]) if spec.x_centers else 1
    lam = w.lam
    values = []
    layer_abs = []
    for level in range(spec.refinement_levels):
        v, layer_abs = _integrate_level(f, n, spec, level, lam)
        values.append(v)
    value = values[-1]
    if len(values) > 1:
        err = np.abs(values[-1] - values[-2])
    else:
        err = np.zeros_like(np.asarray(value, float))
    flags = _layer_ratio_flags(layer_abs, lam)
    status = "ok"
    if len(values) > 1:
        prev = np.abs(np.asarray(values[-2], float))
        cur = np.abs(np.asarray(value, float))
        if np.any(cur > GROWTH_FACTOR * prev + 1e-300):
            flags.append("growth-under-refinement")
    if flags:
        status = "divergent"
    if np.ndim(value) == 0:
        value, err = float(value), float(err)
        levels = tuple(float(v) for v in values)
    else:
        levels = tuple(np.asarray(v) for v in values)
    return QuadResult(value, err, status, levels, tuple(flags))


# ---------------------------------------------------------------------------
# products


MAX_PRODUCT_EVALS = 400_000_000


def _product_sum(f, nodes, weights_lam):
    """Iterated sum over the tensor product of per-factor node sets."""
    m = len(nodes)
    sizes = [nd[0].shape[0] for nd in nodes]
    if math.prod(sizes) > MAX_PRODUCT_EVALS:
        raise CapacityError(f"product rule needs {math.prod(sizes)} evaluations")
    if m == 1:
        X, t, W = nodes[0]
        return float(W @ _evaluate(lambda a, b: f([a], [b]), X, t))
    X1, t1, W1 = nodes[0]
    rest = nodes[1:]
    total = 0.0
    inner_size = math.prod(sizes[1:])
    block = max(1, CHUNK // inner_size)
    # flatten the remaining factors once
    grids = np.meshgrid(*[np.arange(s) for s in sizes[1:]], indexing="ij")
    idx = [g.ravel() for g in grids]
    Xr = [nd[0][i] for nd, i in zip(rest, idx)]
    tr = [nd[1][i] for nd, i in zip(rest, idx)]
    Wr = np.prod([nd[2][i] for nd, i in zip(rest, idx)], axis=0)
    for s in range(0, X1.shape[0], block):
        xb, tb, wb = X1[s:s + block], t1[s:s + block], W1[s:s + block]
        nb = xb.shape[0]
        xs = [np.repeat(xb, inner_size, axis=0)] + [np.tile(x, (nb, 1)) for x in Xr]
        ts = [np.repeat(tb, inner_size)] + [np.tile(t, nb) for t in tr]
        vals = np.asarray(f(xs, ts), float)
        if not np.all(np.isfinite(vals)):
            raise EvaluationError("non-finite integrand value in product rule")
        total += float(np.sum(vals.reshape(nb, inner_size) * wb[:, None] * Wr[None, :]))
    return total


def integrate_product_halfspace(f, weights, spec: HalfspaceQuadSpec | None = None, m=None, n=None):
    """``int_{H^m} f(z_1..z_m) prod_j t_j^{lam_j} dz``.

    ``f(xs, ts)`` receives lists of ``m`` coordinate arrays.  The value uses the
    finest level on every factor; the error estimate sums, over factors, the
    change from coarsening that factor alone by one level.
    """
    spec = spec or HalfspaceQuadSpec()
    m = m or len(weights)
    if m != len(weights):
        raise ParameterError("one WeightSpec per factor is required")
    if m > 3:
        raise CapacityError("product domains are limited to m <= 3")
    if n is None:
        n = len(spec.x_centers[0]) if spec.x_centers else 1
    if m == 1:
        return integrate_halfspace(lambda X, t: f([X], [t]), weights[0], spec, n=n)
    L = spec.refinement_levels - 1
    fine = [halfspace_nodes(n, spec, L, w.lam) for w in weights]
    value = _product_sum(f, fine, weights)
    err = 0.0
    levels = [value]
    status, flags = "ok", []
    if L > 0:
        for j, w in enumerate(weights):
            nodes = list(fine)
            nodes[j] = halfspace_nodes(n, spec, L - 1, w.lam)
            coarse = _product_sum(f, nodes, weights)
            levels.append(coarse)
            err += abs(value - coarse)
            if abs(value) > GROWTH_FACTOR * abs(coarse) + 1e-300:
                status = "divergent"
                flags.append(f"growth-under-refinement-factor-{j}")
    return QuadResult(value, err, status, tuple(levels), tuple(flags))


def integrate_separable(factors, weights, spec: HalfspaceQuadSpec | None = None, n=None):
    """Product of single-factor integrals for ``f = f_1 (x) ... (x) f_m``."""
    results = [integrate_halfspace(g, w, spec, n=n) for g, w in zip(factors, weights)]
    value = math.prod(r.value for r in results)
    err = 0.0
    for j, r in enumerate(results):
        others = math.prod(abs(q.value) for i, q in enumerate(results) if i != j)
        err += r.error_estimate * others
    status = "divergent" if any(r.status == "divergent" for r in results) else "ok"
    flags = tuple(fl for r in results for fl in r.flags)
    return QuadResult(value, err, status, tuple(r.value for r in results), flags)


def integrate_rn(g, n, scale=1.0, x_radius=32.0, order=6, levels=3, centers=None):
    """``int_{R^n} g(X) dX`` with the graded horizontal rule of the half-space."""
    centers = centers or ((0.0,) * n,)
    vals = []
    for l in range(levels):
        X, W = _tensor_x(scale, centers, x_radius * 2 ** l, order + l, n)
        vals.append(float(W @ _evaluate(lambda x, t: g(x), X, np.zeros(X.shape[0]))))
    err = abs(vals[-1] - vals[-2]) if levels > 1 else 0.0
    return QuadResult(vals[-1], err, "ok", tuple(vals))


# ---------------------------------------------------------------------------
# sphere and ball


def sphere_nodes(spec: SphereQuadSpec):
    """Unit vectors ``(N, n)`` and weights for the surface measure."""
    N = spec.azimuthal_points
    phi = 2 * math.pi * np.arange(N) / N
    if spec.n == 2:
        pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        return pts, np.full(N, 2 * math.pi / N)
    c, wc = gauss_legendre(spec.polar_points)
    C, PHI = np.meshgrid(c, phi, indexing="ij")
    S = np.sqrt(1 - C * C)
    pts = np.stack([(S * np.cos(PHI)).ravel(), (S * np.sin(PHI)).ravel(), C.ravel()], axis=1)
    w = np.repeat(wc, N) * (2 * math.pi / N)
    return pts, w


def integrate_sphere(g, spec: SphereQuadSpec | None = None):
    """``int_S g(x') dx'`` against the unnormalized surface measure."""
    spec = spec or SphereQuadSpec()
    pts, w = sphere_nodes(spec)
    vals = np.asarray(g(pts), float)
    if not np.all(np.isfinite(vals)):
        idx = int(np.argwhere(~np.isfinite(vals))[0][0])
        raise EvaluationError("non-finite value on the sphere", node=tuple(pts[idx]))
    return np.tensordot(w, vals, axes=(0, 0)) if vals.ndim > 1 else float(w @ vals)


def radial_rule(radial_points, n, weight_exponent):
    """Nodes ``r`` and weights for ``int_0^1 h(r) (1-r)^e r^(n-1) dr``."""
    if weight_exponent <= -1:
        raise DivergenceError(f"(1-r)^{weight_exponent} is not integrable at r = 1")
    u, w = gauss_jacobi(radial_points, weight_exponent, n - 1)
    r = (1.0 + u) / 2.0
    return r, w * 0.5 ** (weight_exponent + n)


def integrate_ball(g, radial_points=24, sphere_spec: SphereQuadSpec | None = None,
                   radial_weight_exponent=0.0):
    """``int_0^1 int_S g(r x') (1-r)^e r^(n-1) dx' dr``."""
    sphere_spec = sphere_spec or SphereQuadSpec()
    n = sphere_spec.n
    r, wr = radial_rule(radial_points, n, radial_weight_exponent)
    pts, ws = sphere_nodes(sphere_spec)
    X = (r[:, None, None] * pts[None, :, :]).reshape(-1, n)
    vals = np.asarray(g(X), float).reshape(r.size, pts.shape[0])
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("non-finite value in the ball")
    return float(wr @ vals @ ws)


def cube_nodes(lower, upper, order):
    """Tensor Gauss-Legendre nodes ``(P, W)`` on the box ``[lower, upper]``."""
    axes = [gauss_legendre(order, a, b) for a, b in zip(lower, upper)]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    P = np.stack([g.ravel() for g in grids], axis=1)
    W = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return P, W


def integrate_box(f, lower, upper, order=6, lam=0.0):
    """``int_box f(x, t) t^lam`` by one tensor Gauss-Legendre panel; ``f(X, t)`` as usual."""
    P, W = cube_nodes(lower, upper, order)
    vals = _evaluate(f, P[:, :-1], P[:, -1])
    return np.tensordot(W * P[:, -1] ** lam, vals, axes=(0, 0))


def check_weight(lam):
    if not lam > -1:
        raise DomainError(f"weight exponent {lam} must exceed -1")
