import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hslab.errors import CapacityError, DomainError, ParameterError
from hslab.halfspace import (Box, Cube, HPoint, WeightSpec, cell_window, cells_covering,
                             enlarged_cell, enlarged_cells_containing, height_moment, hpoint,
                             in_truncated_halfspace, layer_of_height, weighted_box_measure,
                             whitney_cell_containing)

heights = st.floats(1e-6, 1e6)
coords = st.floats(-100, 100)


def test_hpoint_basics():
    z = hpoint(1.0, 2.0, 0.5)
    assert z.n == 2 and z.t == 0.5
    np.testing.assert_allclose(z.reflected(), [1.0, 2.0, -0.5])
    np.testing.assert_allclose(z.as_array(), [1.0, 2.0, 0.5])
    w = HPoint((0.0, 0.0), 1.0)
    assert z.distance_to_reflection(w) == pytest.approx(math.sqrt(1 + 4 + 1.5 ** 2))
    with pytest.raises(DomainError):
        HPoint((0.0,), 0.0)


@given(heights)
def test_layer_contains_height(t):
    k = layer_of_height(t)
    assert 2.0 ** -k <= t <= 2.0 ** (1 - k)


def test_layer_faces_go_to_smaller_layer():
    assert layer_of_height(1.0) == 0
    assert layer_of_height(2.0) == -1
    assert layer_of_height(0.5) == 1


@given(coords, coords, heights)
def test_cell_contains_point(x1, x2, t):
    z = HPoint((x1, x2), t)
    cell = whitney_cell_containing(z)
    assert cell.cube.contains(z.as_array(), rel_tol=1e-12)
    assert z in [c for c in [z]]  # points are hashable values
    assert cell in enlarged_cells_containing(z)


@given(coords, heights)
def test_whitney_geometry(x, t):
    cell = whitney_cell_containing(HPoint((x,), t))
    cube = cell.cube
    # diameter over distance to the boundary
    assert cube.diameter / cube.t_min == pytest.approx(math.sqrt(2), rel=1e-15)
    assert cell.eta == pytest.approx(cube.center[-1])


@given(coords, coords, heights)
def test_enlarged_cells_overlap_bounded_and_heights_comparable(x1, x2, t):
    z = HPoint((x1, x2), t)
    cells = enlarged_cells_containing(z)
    assert 1 <= len(cells) <= 3 ** 3
    for c in cells:
        assert enlarged_cell(c).contains(z.as_array())
        assert 1 / 4 <= t / c.eta <= 4


def test_cells_covering_tiles_box():
    region = Box((-1.0, 0.25), (1.0, 2.0))
    cells = cells_covering(region)
    assert sum(c.cube.volume for c in cells) == pytest.approx(2 * 1.75)
    cubes = [c.cube for c in cells]
    for i, a in enumerate(cubes):
        for b in cubes[i + 1:]:
            assert not a.overlaps(b)


def test_cells_covering_cube_and_caps():
    cells = cells_covering(Cube((0.5, 1.5), 1.0))
    assert [c.sort_key() for c in cells] == sorted(c.sort_key() for c in cells)
    with pytest.raises(CapacityError):
        cells_covering(Cube((0.0, 0.5), 1.0))
    capped = cells_covering(Cube((0.0, 0.5), 1.0), max_layer=3)
    assert max(c.layer for c in capped) == 3


def test_cell_window_counts():
    w = cell_window(1, [0, 1, 2], 1.0)
    assert len(w) == 2 + 4 + 8


@given(st.floats(-0.9, 3.0), st.integers(-5, 8))
def test_measure_law(lam, k):
    cell = whitney_cell_containing(HPoint((0.0,), 1.5 * 2.0 ** -k))
    ref = whitney_cell_containing(HPoint((0.0,), 1.5))
    q = weighted_box_measure(cell.cube, WeightSpec(lam)) / cell.eta ** (2 + lam)
    q0 = weighted_box_measure(ref.cube, WeightSpec(lam)) / ref.eta ** (2 + lam)
    assert q == pytest.approx(q0, rel=1e-10)


def test_height_moment():
    assert height_moment(0.0, 2.0, 1.0) == pytest.approx(2.0)
    assert height_moment(1.0, math.e, -1.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        height_moment(0.0, 1.0, -1.0)


def test_carleson_box_and_truncation():
    w = HPoint((0.0,), 2.0)
    box = Cube.carleson_box(w)
    assert box.t_min == 1.0 and box.t_max == 3.0
    assert in_truncated_halfspace(w, HPoint((5.0,), 6.0))
    assert not in_truncated_halfspace(w, HPoint((0.0,), 6.5))


def test_weight_spec_rejects_nonfinite():
    with pytest.raises(ParameterError):
        WeightSpec(float("nan"))


def test_cells_covering_unit_strip():
    # x in [0, 1], t in [1/2, 2]: the layer-0 cell and the two layer-1 cells below it;
    # cells meeting the region only along a face are excluded
    cells = cells_covering(Box((0.0, 0.5), (1.0, 2.0)))
    assert [c.sort_key() for c in cells] == [(0, (0,)), (1, (0,)), (1, (1,))]
