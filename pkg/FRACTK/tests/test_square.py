import math

import numpy as np
import pytest
from scipy.spatial import cKDTree

from config import settings
from geometry.geom import (
    INSIDE, OUTSIDE, AxisSquare, GeometryError, Point, intersection_area_convex, polyline_segments,
)
from geometry.ifs import CapacityError, ifs_iterate, open_set_condition, similarity_dimension
from geometry.square import (
    QuarterComplex, boundary_units, collar, collar_area_square, collar_complex, collar_pieces_square,
    inner_outer, square_dimension, square_ifs, square_leg, square_open_set, square_prefractal, tiling_check,
)

UNIT = np.array([[[0.0, 0.0], [1.0, 0.0]]])


# ── Boundary ──────────────────────────────────────────────────
def test_level_zero_is_the_unit_square():
    level = square_prefractal(0)
    assert len(level.edges) == 4
    assert np.allclose(np.linalg.norm(level.edges[:, 1] - level.edges[:, 0], axis=1), 1.0)
    assert level.boundary.area == pytest.approx(1.0)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_edges_and_unit_area(j):
    level = square_prefractal(j)
    assert len(boundary_units(j)) == 4 * 8 ** j
    lengths = np.linalg.norm(level.edges[:, 1] - level.edges[:, 0], axis=1)
    assert np.allclose(lengths, 4.0 ** -j)
    assert level.boundary.area == pytest.approx(1.0, rel=1e-12)
    assert len(level.cells) == 16 ** j


def test_first_level_has_thirty_two_edges():
    assert len(square_prefractal(1).edges) == 32


def test_boundary_is_simple():
    assert square_prefractal(2).boundary.is_simple()


def test_cap_is_enforced(monkeypatch):
    monkeypatch.setattr(settings, "max_segments", 100)
    with pytest.raises(CapacityError):
        square_prefractal(2)


# ── Collar ────────────────────────────────────────────────────
@pytest.mark.parametrize("j, count, area", [(0, 4, 2.0), (1, 32, 1.0)])
def test_collar_pieces_and_area(j, count, area):
    pieces, total = collar(j)
    assert len(pieces) == count
    assert total == pytest.approx(area)
    assert len(collar_pieces_square(j)) == count


@pytest.mark.parametrize("j", [1, 2, 3])
def test_tilted_squares_have_disjoint_interiors(j):
    pieces, _ = collar(j)
    verts = collar_pieces_square(j)
    assert np.allclose(np.array([t.vertices for t in pieces]), verts)
    # squares on diagonals of length 4^-j can only meet when their centers are that close
    pairs = cKDTree(verts.mean(axis=1)).query_pairs(4.0 ** -j * (1.0 + 1e-9), output_type="ndarray")
    assert len(pairs) > 0
    assert max(intersection_area_convex(verts[a], verts[b]) for a, b in pairs) < 1e-12


@pytest.mark.parametrize("j", range(5))
def test_collar_area_closed_form(j):
    assert collar_area_square(j) == pytest.approx(2.0 ** (1 - j))


def test_collar_area_at_level_three():
    assert collar_area_square(3) == 0.25
    assert collar_complex(3).area == pytest.approx(0.25)


# ── Nested pair ───────────────────────────────────────────────
def test_level_zero_inner_is_empty():
    inner, outer = inner_outer(0)
    assert inner.is_empty()
    assert outer.area == pytest.approx(2.0)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_inner_outer_areas(j):
    inner, outer = inner_outer(j)
    assert inner.area == pytest.approx(1.0 - 2.0 ** -j)
    assert outer.area == pytest.approx(1.0 + 2.0 ** -j)
    assert outer.area - inner.area == pytest.approx(collar_area_square(j))


@pytest.mark.parametrize("j", [1, 2, pytest.param(3, marks=pytest.mark.slow), pytest.param(4, marks=pytest.mark.slow)])
def test_pairs_nest_across_levels(j):
    inner, outer = inner_outer(j)
    inner_next, outer_next = inner_outer(j + 1)
    assert inner.issubset(outer)
    assert inner.issubset(inner_next)
    assert outer_next.issubset(outer)
    assert not outer.issubset(inner)


def test_quarter_complex_location():
    inner, outer = inner_outer(1)
    codes = inner.classify(np.array([[0.5, 0.5], [5.0, 5.0]]))
    assert codes[0] == INSIDE
    assert codes[1] == OUTSIDE


def test_quarter_complex_area_in_square():
    _, outer = inner_outer(2)
    assert outer.area_in_square(AxisSquare(Point(-1.0, -1.0), 3.0)) == pytest.approx(outer.area)
    # off the half-cell lattice: clipped per triangle
    assert outer.area_in_square(AxisSquare(Point(-1.01, -1.01), 3.02)) == pytest.approx(outer.area)
    _, coarse = inner_outer(1)
    assert coarse.area_in_square(AxisSquare(Point(0.25, 0.25), 0.5)) == pytest.approx(0.25)


def test_lattice_and_clipped_area_agree():
    inner, _ = inner_outer(2)
    on_grid = AxisSquare(Point(0.125, 0.0625), 0.375)
    nudged = AxisSquare(Point(0.125 - 1e-7, 0.0625 - 1e-7), 0.375 + 2e-7)
    assert inner.area_in_square(on_grid) == pytest.approx(inner.area_in_square(nudged), abs=1e-6)


def test_quarter_complex_translation():
    inner, _ = inner_outer(1)
    moved = inner.translated(1.0, 0.0)
    assert moved.area == pytest.approx(inner.area)
    assert moved.classify(np.array([[1.5, 0.5]]))[0] == INSIDE
    with pytest.raises(GeometryError):
        inner.translated(0.1, 0.0)


def test_refinement_preserves_the_set():
    inner, _ = inner_outer(1)
    fine = inner.refined()
    assert fine.level == 2
    assert fine.area == pytest.approx(inner.area)
    assert fine.issubset(inner) and inner.issubset(fine)
    with pytest.raises(ValueError):
        fine.at_level(1)


def test_quarter_complex_json():
    inner, _ = inner_outer(1)
    data = inner.to_json()
    assert data["resolution"] == 0.25
    assert len(data["quarters"]) == inner.quarter_count
    assert {q[2] for q in data["quarters"]} <= {"S", "E", "N", "W"}


def test_bad_membership_shape():
    with pytest.raises(GeometryError):
        QuarterComplex(1, (0, 0), np.zeros((3, 2, 2), dtype=bool))


# ── IFS and tiling ────────────────────────────────────────────
def test_ifs_endpoint_images():
    maps = square_ifs()
    assert len(maps) == 8
    assert np.allclose(maps[0](np.array([1.0, 0.0])), [0.25, 0.0])
    assert np.allclose(maps[7](np.array([1.0, 0.0])), [1.0, 0.0])


@pytest.mark.parametrize("j", [1, 2, 3])
def test_ifs_reproduces_the_leg(j):
    assert np.allclose(ifs_iterate(square_ifs(), UNIT, j), polyline_segments(square_leg(j)), atol=1e-12)


def test_open_set_condition():
    assert open_set_condition(square_ifs(), square_open_set()).satisfied


def test_dimension_is_three_halves():
    assert square_dimension() == 1.5
    assert similarity_dimension(square_ifs()) == pytest.approx(1.5)
    assert math.log(8) / math.log(4) == pytest.approx(square_dimension())


@pytest.mark.parametrize("j", [0, 1, 2])
def test_translates_tile_the_plane(j):
    assert tiling_check(j)


def test_overlapping_block_is_detected():
    assert not tiling_check(1, block=[(0, 0), (0, 0)])


def test_tiling_check_level_limit():
    with pytest.raises(ValueError):
        tiling_check(4)
