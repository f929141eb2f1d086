"""Points, cubes and the dyadic Whitney decomposition of the upper half-space.

The half-space is ``H = {(x, t) : x in R^n, t > 0}`` with ``n`` in {1, 2, 3}.
Whitney cells are the closed dyadic cubes

    layer k:  t in [2^-k, 2^(1-k)],  x in prod_i [l_i 2^-k, (l_i + 1) 2^-k]

indexed by ``(k, l)`` with ``k`` an integer and ``l`` in Z^n.
"""

from __future__ import annotations

from dataclasses import dataclass
import itertools
import math

import numpy as np

from .errors import CapacityError, DomainError, ParameterError

SUPPORTED_DIMS = (1, 2, 3)
ENLARGEMENT = 1.25
MAX_ENUMERATED_CELLS = 2_000_000


def _check_dim(n):
    if n not in SUPPORTED_DIMS:
        raise ParameterError(f"dimension n={n} not supported (use 1, 2 or 3)")


@dataclass(frozen=True)
class HPoint:
    """A point ``z = (x, t)`` of the upper half-space."""

    x: tuple
    t: float

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", float(self.t))
        _check_dim(len(x))
        if not self.t > 0:
            raise DomainError(f"height must be positive, got t={self.t}")

    @property
    def n(self):
        return len(self.x)

    def as_array(self):
        return np.array(self.x + (self.t,))

    def reflected(self):
        """Coordinates of the mirror point ``(x, -t)``."""
        return np.array(self.x + (-self.t,))

    def distance_to_reflection(self, other):
        """``|z - conj(w)|`` for ``z = self`` and ``w = other``."""
        dx = np.subtract(self.x, other.x)
        return math.sqrt(float(dx @ dx) + (self.t + other.t) ** 2)


def hpoint(*coords):
    """``hpoint(x1, ..., xn, t)`` shorthand."""
    return HPoint(coords[:-1], coords[-1])


@dataclass(frozen=True)
class Cube:
    """Closed axis-parallel cube in R^(n+1); the last coordinate is the height."""

    center: tuple
    side: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "side", float(self.side))
        if not self.side > 0:
            raise ParameterError("cube side must be positive")
        if len(self.center) < 2:
            raise ParameterError("cube needs at least one horizontal coordinate")
        if self.t_min < -1e-15 * self.side:
            raise DomainError("cube extends below the boundary t = 0")

    @classmethod
    def from_bounds(cls, lower, upper):
        lower = np.asarray(lower, float)
        upper = np.asarray(upper, float)
        sides = upper - lower
        if not np.allclose(sides, sides[0], rtol=1e-12, atol=0):
            raise ParameterError("bounds do not describe a cube")
        return cls(tuple((lower + upper) / 2), float(sides[0]))

    @classmethod
    def carleson_box(cls, w: HPoint):
        """The cube ``Q_w`` centred at ``w = (y, s)`` with side ``s``."""
        return cls(w.x + (w.t,), w.t)

    @property
    def n(self):
        return len(self.center) - 1

    @property
    def lower(self):
        return np.asarray(self.center) - self.side / 2

    @property
    def upper(self):
        return np.asarray(self.center) + self.side / 2

    @property
    def t_min(self):
        return self.center[-1] - self.side / 2

    @property
    def t_max(self):
        return self.center[-1] + self.side / 2

    @property
    def diameter(self):
        return self.side * math.sqrt(self.n + 1)

    @property
    def volume(self):
        return self.side ** (self.n + 1)

    def contains(self, points, rel_tol=0.0):
        """Membership of points (shape ``(N, n+1)`` or ``(n+1,)``) in the closed cube."""
        p = np.asarray(points, float)
        slack = rel_tol * self.side
        lo, hi = self.lower - slack, self.upper + slack
        return np.all((p >= lo) & (p <= hi), axis=-1)

    def contains_cube(self, other):
        return bool(np.all(self.lower <= other.lower) and np.all(other.upper <= self.upper))

    def overlaps(self, other):
        """True when the interiors intersect."""
        return bool(np.all(self.lower < other.upper) and np.all(other.lower < self.upper))


@dataclass(frozen=True)
class Box:
    """Closed axis-parallel box in R^(n+1) given by its corners."""

    lower_corner: tuple
    upper_corner: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower_corner)
        hi = tuple(float(v) for v in self.upper_corner)
        if len(lo) != len(hi) or len(lo) < 2:
            raise ParameterError("box corners must have matching length >= 2")
        if any(b < a for a, b in zip(lo, hi)):
            raise ParameterError("box upper corner below lower corner")
        if lo[-1] < 0:
            raise DomainError("box extends below the boundary t = 0")
        object.__setattr__(self, "lower_corner", lo)
        object.__setattr__(self, "upper_corner", hi)

    @property
    def n(self):
        return len(self.lower_corner) - 1

    @property
    def lower(self):
        return np.asarray(self.lower_corner)

    @property
    def upper(self):
        return np.asarray(self.upper_corner)

    @property
    def t_min(self):
        return self.lower_corner[-1]

    @property
    def t_max(self):
        return self.upper_corner[-1]


@dataclass(frozen=True)
class WhitneyCell:
    layer: int
    lattice: tuple

    def __post_init__(self):
        object.__setattr__(self, "layer", int(self.layer))
        object.__setattr__(self, "lattice", tuple(int(i) for i in self.lattice))
        _check_dim(len(self.lattice))

    @property
    def n(self):
        return len(self.lattice)

    @property
    def side(self):
        return math.ldexp(1.0, -self.layer)

    @property
    def cube(self):
        h = self.side
        center = tuple((i + 0.5) * h for i in self.lattice) + (1.5 * h,)
        return Cube(center, h)

    @property
    def center(self):
        """The centre ``zeta_k = (xi_k, eta_k)`` as a point of H."""
        h = self.side
        return HPoint(tuple((i + 0.5) * h for i in self.lattice), 1.5 * h)

    @property
    def eta(self):
        return 1.5 * self.side

    def sort_key(self):
        return (self.layer, self.lattice)


def layer_of_height(t):
    """Layer index ``k`` with ``t`` in ``[2^-k, 2^(1-k)]``; shared faces go to the smaller ``k``."""
    if not t > 0:
        raise DomainError(f"height must be positive, got t={t}")
    # t = m * 2**e with m in [1/2, 1); the t = 2**j face belongs to layer -j.
    _, e = math.frexp(t)
    return 1 - e


def whitney_cell_containing(z: HPoint) -> WhitneyCell:
    """The Whitney cell whose closed cube contains ``z``.

    Ties on shared faces resolve to the smaller layer and then to the
    lexicographically smallest lattice index.
    """
    k = layer_of_height(z.t)
    h = math.ldexp(1.0, -k)
    lattice = tuple(math.ceil(xi / h) - 1 for xi in z.x)
    return WhitneyCell(k, lattice)


def enlarged_cell(cell: WhitneyCell) -> Cube:
    """The cube ``Delta*`` with the centre of ``cell`` and 5/4 of its side."""
    c = cell.cube
    return Cube(c.center, c.side * ENLARGEMENT)


def enlarged_cells_containing(z: HPoint):
    """All cells whose enlarged cube contains ``z``."""
    k0 = layer_of_height(z.t)
    out = []
    point = z.as_array()
    for k in (k0 - 1, k0, k0 + 1):
        h = math.ldexp(1.0, -k)
        ranges = []
        for xi in z.x:
            base = math.floor(xi / h)
            ranges.append(range(base - 1, base + 2))
        for lattice in itertools.product(*ranges):
            cell = WhitneyCell(k, lattice)
            if enlarged_cell(cell).contains(point):
                out.append(cell)
    return out


def cells_covering(region, max_layer=None):
    """Whitney cells whose interiors meet the interior of ``region`` (a Cube or Box).

    Cells are restricted to ``layer <= max_layer`` when a cap is given and
    returned in ``(layer, lattice)`` order.
    """
    n = region.n
    _check_dim(n)
    t_lo, t_hi = region.t_min, region.t_max
    if t_lo <= 0 and max_layer is None:
        raise CapacityError("region touches t = 0; a layer cap is required")
    # layer k overlaps (t_lo, t_hi) iff 2^-k < t_hi and 2^(1-k) > t_lo
    k_min = math.floor(-math.log2(t_hi)) + 1
    while math.ldexp(1.0, -k_min) >= t_hi:
        k_min += 1
    while math.ldexp(1.0, -(k_min - 1)) < t_hi:
        k_min -= 1
    if t_lo > 0:
        k_max = math.ceil(1 - math.log2(t_lo)) - 1
        while math.ldexp(1.0, 1 - k_max) <= t_lo:
            k_max -= 1
        while math.ldexp(1.0, -k_max) > t_lo:
            k_max += 1
        if max_layer is not None:
            k_max = min(k_max, max_layer)
    else:
        k_max = max_layer
    lo, hi = region.lower[:-1], region.upper[:-1]
    cells = []
    for k in range(k_min, k_max + 1):
        h = math.ldexp(1.0, -k)
        ranges = []
        for a, b in zip(lo, hi):
            ranges.append(range(math.floor(a / h), math.ceil(b / h)))
        count = math.prod(len(r) for r in ranges)
        if len(cells) + count > MAX_ENUMERATED_CELLS:
            raise CapacityError("enumeration exceeds the cell budget")
        for lattice in itertools.product(*ranges):
            cells.append(WhitneyCell(k, lattice))
    return cells


def cell_window(n, layers, x_extent):
    """Cells of the given layers whose x-projection lies in ``[-x_extent, x_extent]^n``."""
    _check_dim(n)
    cells = []
    for k in sorted(layers):
        h = math.ldexp(1.0, -k)
        m = math.floor(x_extent / h)
        for lattice in itertools.product(range(-m, m), repeat=n):
            cells.append(WhitneyCell(k, lattice))
    if len(cells) > MAX_ENUMERATED_CELLS:
        raise CapacityError("window exceeds the cell budget")
    return cells


@dataclass(frozen=True)
class WeightSpec:
    """The weight ``t^lam`` of the measure ``dm_lam = t^lam dx dt``."""

    lam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        if not math.isfinite(self.lam):
            raise ParameterError("weight exponent must be finite")

    def __call__(self, t):
        return np.asarray(t, float) ** self.lam


def height_moment(t_lo, t_hi, lam):
    """``int_{t_lo}^{t_hi} t^lam dt``."""
    if t_lo <= 0 and lam <= -1:
        raise DomainError("t^lam is not integrable at t = 0 for lam <= -1")
    if lam == -1:
        return math.log(t_hi / t_lo)
    return (t_hi ** (lam + 1) - t_lo ** (lam + 1)) / (lam + 1)


def weighted_box_measure(box: Cube, w: WeightSpec) -> float:
    """``m_lam(box)`` in closed form."""
    t_lo = max(box.t_min, 0.0)
    return box.side ** box.n * height_moment(t_lo, box.t_max, w.lam)


def in_truncated_halfspace(w_ref: HPoint, z: HPoint) -> bool:
    """Membership of ``z`` in ``{(x, t) : t <= 3 * w_ref.t}``."""
    return z.t <= 3.0 * w_ref.t
