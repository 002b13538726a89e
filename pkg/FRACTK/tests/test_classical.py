import math

import numpy as np
import pytest

from config import settings
from geometry.classical import (
    BASE_TRIANGLE, ClassicalParams, carved_outer_triangles, classical_dimension, classical_ifs, classical_leg,
    classical_level, classical_open_set, collar_area, collar_pieces, inner_prefractal, new_inner_triangles,
    outer_prefractal, xi_of_beta,
)
from geometry.geom import OUTSIDE, polyline_segments
from geometry.ifs import CapacityError, ifs_iterate, open_set_condition, similarity_dimension

UNIT = np.array([[[0.0, 0.0], [1.0, 0.0]]])


# ── Parameters ────────────────────────────────────────────────
def test_xi_of_beta_reference_values():
    assert xi_of_beta(math.pi / 6.0) == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert xi_of_beta(math.pi / 3.0) == pytest.approx(1.0 / (2.0 + math.sqrt(3.0)), rel=1e-14)


def test_xi_approaches_half_as_beta_shrinks():
    values = [xi_of_beta(b) for b in (0.1, 0.01, 0.001, 1e-6)]
    assert all(a < b < 0.5 for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("beta", [0.0, -0.1, math.pi / 2.0, 2.0])
def test_beta_out_of_range(beta):
    with pytest.raises(ValueError):
        ClassicalParams(beta)


# ── Prefractals ───────────────────────────────────────────────
def test_level_zero_is_the_base_triangle(koch):
    assert np.allclose(inner_prefractal(koch, 0).vertices, BASE_TRIANGLE)


@pytest.mark.parametrize("j", [0, 1, 2, 3])
def test_edge_counts_and_lengths(koch, j):
    level = classical_level(koch, j)
    assert len(level.inner) == 3 * 4 ** j
    assert len(level.outer) == 6 * 4 ** j
    assert np.allclose(level.inner.edge_lengths(), koch.xi ** j)
    assert np.allclose(level.outer.edge_lengths(), koch.xi ** (j + 0.5))


def test_first_refinement_adds_three_triangles(koch):
    gain = inner_prefractal(koch, 1).area - inner_prefractal(koch, 0).area
    assert gain == pytest.approx(3.0 * (0.5 * (1.0 / 3.0) * math.sqrt(1.0 / 12.0)), rel=1e-12)


def test_outer_level_zero_is_a_hexagon(koch):
    outer = outer_prefractal(koch, 0)
    assert len(outer) == 6
    assert np.allclose(outer.edge_lengths(), 3.0 ** -0.5)


@pytest.mark.parametrize("beta", [math.pi / 3.0, math.pi / 6.0])
def test_prefractals_are_simple(beta):
    level = classical_level(ClassicalParams(beta), 3)
    assert level.inner.is_simple()
    assert level.outer.is_simple()


@pytest.mark.parametrize("j", [0, 1, 2, pytest.param(3, marks=pytest.mark.slow), pytest.param(4, marks=pytest.mark.slow)])
def test_levels_nest(koch, j):
    here, there = classical_level(koch, j), classical_level(koch, j + 1)
    assert np.all(here.outer.classify(here.inner.vertices) != OUTSIDE)
    assert np.all(there.inner.classify(here.inner.vertices) != OUTSIDE)
    assert np.all(here.outer.classify(there.outer.vertices) != OUTSIDE)


# ── Collar ────────────────────────────────────────────────────
def test_collar_area_closed_form(koch):
    assert collar_area(koch, 0) == pytest.approx(1.5 * math.sqrt(1.0 / 12.0), rel=1e-12)
    assert collar_area(koch, 1) == pytest.approx((2.0 / 3.0) ** 2 * 1.5 * math.sqrt(1.0 / 12.0), rel=1e-12)
    with pytest.raises(ValueError):
        collar_area(koch, -1)


@pytest.mark.parametrize("beta", [math.pi / 3.0, math.pi / 6.0, math.pi / 20.0])
@pytest.mark.parametrize("j", [0, 1, 3])
def test_collar_area_matches_geometry(beta, j):
    p = ClassicalParams(beta)
    level = classical_level(p, j)
    assert level.outer.area - level.inner.area == pytest.approx(collar_area(p, j), rel=1e-9)
    tents = collar_pieces(p, j)
    assert len(tents) == 3 * 4 ** j


def test_new_and_carved_triangles(koch):
    inner = new_inner_triangles(koch, 2)
    outer = carved_outer_triangles(koch, 2)
    assert inner.shape == (3 * 4, 3, 2)
    assert outer.shape == (6 * 4, 3, 2)
    legs = np.linalg.norm(inner[:, 1] - inner[:, 0], axis=1)
    assert np.allclose(legs, koch.xi ** 2)
    legs = np.linalg.norm(outer[:, 2] - outer[:, 0], axis=1)
    assert np.allclose(legs, koch.xi ** 2.5)
    with pytest.raises(ValueError):
        new_inner_triangles(koch, 0)


# ── IFS ───────────────────────────────────────────────────────
def test_ifs_endpoint_images(koch):
    maps = classical_ifs(koch)
    assert len(maps) == 4
    assert np.allclose(maps[0](np.array([1.0, 0.0])), [koch.xi, 0.0])
    assert np.allclose(maps[3](np.array([1.0, 0.0])), [1.0, 0.0])


def test_ifs_iteration_counts(koch):
    maps = classical_ifs(koch)
    assert np.array_equal(ifs_iterate(maps, UNIT, 0), UNIT)
    assert len(ifs_iterate(maps, UNIT, 2)) == 16


@pytest.mark.parametrize("beta", [math.pi / 3.0, math.pi / 6.0, math.pi / 20.0])
def test_ifs_reproduces_the_leg(beta):
    p = ClassicalParams(beta)
    assert np.allclose(ifs_iterate(classical_ifs(p), UNIT, 3), polyline_segments(classical_leg(p, 3)), atol=1e-12)


def test_ifs_iteration_respects_cap(koch):
    with pytest.raises(CapacityError):
        ifs_iterate(classical_ifs(koch), UNIT, 10, cap=1000)


def test_leg_respects_configured_cap(koch, monkeypatch):
    monkeypatch.setattr(settings, "max_segments", 100)
    with pytest.raises(CapacityError):
        classical_leg(koch, 4)


def test_open_set_condition(koch):
    report = open_set_condition(classical_ifs(koch), classical_open_set(koch))
    assert report.satisfied
    assert report.images == 4


def test_map_composition(koch):
    a, b = classical_ifs(koch)[1], classical_ifs(koch)[2]
    point = np.array([0.3, 0.2])
    assert np.allclose(a.compose(b)(point), a(b(point)))
    assert a.compose(b).ratio == pytest.approx(koch.xi ** 2)


# ── Dimension ─────────────────────────────────────────────────
def test_classical_dimension_values(koch):
    assert classical_dimension(koch) == pytest.approx(math.log(4.0) / math.log(3.0), rel=1e-12)
    steep = classical_dimension(ClassicalParams(math.pi / 3.0))
    assert steep == pytest.approx(math.log(4.0) / math.log(2.0 + math.sqrt(3.0)), rel=1e-12)
    assert steep == pytest.approx(1.0526, abs=1e-3)
    assert similarity_dimension(classical_ifs(koch)) == pytest.approx(classical_dimension(koch))


def test_dimension_spans_one_to_two():
    flat = classical_dimension(ClassicalParams(math.pi / 2.0 - 1e-6))
    sharp = classical_dimension(ClassicalParams(1e-6))
    assert 1.0 < flat < 1.001
    assert 1.999 < sharp < 2.0


def test_extended_precision_agrees_with_double(koch, monkeypatch):
    plain = classical_leg(koch, 4)
    monkeypatch.setattr(settings, "extended_precision", True)
    assert np.allclose(classical_leg(koch, 4), plain, atol=1e-13)
