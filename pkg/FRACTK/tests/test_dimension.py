import math

import numpy as np
import pytest
from pydantic import ValidationError

from config import settings
from analysis.dimension import (
    BoxCountSeries, box_count, box_count_series, collar_measure_series, dimension_pipeline, dset_ring_check,
    family_xi, fit_dimension, hausdorff_convergence,
)
from geometry.classical import classical_dimension, classical_level
from geometry.geom import polyline_segments
from geometry.square import square_prefractal

UNIT_SQUARE = polyline_segments(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]), closed=True)


# ── Box counting ──────────────────────────────────────────────
def test_horizontal_segment_box_count():
    assert box_count(np.array([[[0.0, 0.1], [1.0, 0.1]]]), 0.25) == 4


def test_empty_set_has_no_boxes():
    assert box_count(np.empty((0, 2, 2)), 0.25) == 0


def test_unit_square_boundary_at_half():
    assert box_count(UNIT_SQUARE, 0.5) == 4


def test_unit_square_boundary_at_quarter():
    # 4 cells per side, corners shared
    assert box_count(UNIT_SQUARE, 0.25) == 12


def test_diagonal_segment_box_count():
    diagonal = np.array([[[0.05, 0.05], [0.95, 0.95]]])
    assert box_count(diagonal, 0.1) == 10
    assert box_count(diagonal, 0.25) == 4


def test_box_count_independent_of_chunking(koch, monkeypatch):
    segments = classical_level(koch, 3).inner.edges
    whole = box_count(segments, 1.0 / 27.0)
    monkeypatch.setattr(settings, "chunk_rows", 256)
    assert box_count(segments, 1.0 / 27.0) == whole


@pytest.mark.parametrize("r", [0.0, -1.0])
def test_box_count_needs_positive_size(r):
    with pytest.raises(ValueError):
        box_count(UNIT_SQUARE, r)


def test_series_is_sorted_coarse_to_fine():
    series = box_count_series(UNIT_SQUARE, [0.25, 0.5, 0.125])
    assert [r for r, _ in series.entries] == [0.5, 0.25, 0.125]
    assert [n for _, n in series.entries] == [4, 12, 28]
    assert series.rows()[0]["logr"] == pytest.approx(math.log(0.5))


def test_series_rejects_bad_radii():
    with pytest.raises(ValidationError):
        BoxCountSeries(entries=[(0.25, 4), (0.5, 8)])
    with pytest.raises(ValidationError):
        BoxCountSeries(entries=[(0.0, 4)])


# ── Fitting ───────────────────────────────────────────────────
def test_fit_recovers_an_exact_power_law():
    series = BoxCountSeries(entries=[(4.0 ** -k, 8 ** k) for k in range(1, 7)])
    fit = fit_dimension(series, drop_low=0, drop_high=0)
    assert fit.slope == pytest.approx(1.5, abs=1e-12)
    assert fit.residual < 1e-12
    assert fit.points == 6
    assert fit.range_used == (4.0 ** -6, 0.25)


def test_fit_drops_scales():
    series = BoxCountSeries(entries=[(4.0 ** -k, 8 ** k) for k in range(1, 7)])
    fit = fit_dimension(series)
    assert fit.points == 4
    assert fit.range_used == pytest.approx((4.0 ** -5, 4.0 ** -2))


def test_fit_needs_three_entries():
    series = BoxCountSeries(entries=[(0.5, 2), (0.25, 4), (0.125, 8)])
    with pytest.raises(ValueError):
        fit_dimension(series)
    assert fit_dimension(series, 0, 0).slope == pytest.approx(1.0)


def test_fit_rejects_empty_boxes():
    series = BoxCountSeries(entries=[(0.5, 0), (0.25, 4), (0.125, 8)])
    with pytest.raises(ValueError):
        fit_dimension(series, 0, 0)


# ── Rings ─────────────────────────────────────────────────────
def test_ring_check_on_the_full_boundary(koch):
    edges = classical_level(koch, 3).inner.edges
    report = dset_ring_check(edges, koch.xi, classical_dimension(koch), np.array([[0.0, 0.0]]), [1.0])
    assert report.c1_hat > 0.0
    assert report.evaluations == 1


def test_ring_ratios_stay_bounded(koch):
    level = classical_level(koch, 5).inner
    centers = level.vertices[::97]
    report = dset_ring_check(level.edges, koch.xi, classical_dimension(koch), centers, [1.0 / 3.0, 1.0 / 9.0])
    assert report.c1_hat > 0.0
    assert report.spread < 20.0
    assert report.edge_length == pytest.approx(3.0 ** -5)


def test_ring_radius_below_resolution(koch):
    edges = classical_level(koch, 2).inner.edges
    with pytest.raises(ValueError):
        dset_ring_check(edges, koch.xi, 1.26, np.array([[0.0, 0.0]]), [0.05])


# ── Convergence and measures ──────────────────────────────────
@pytest.mark.parametrize("family", ["classical", "square"])
def test_hausdorff_convergence_within_bound(koch, family):
    rows = hausdorff_convergence(family, koch.beta, j_max=4)
    assert [r.j for r in rows] == [0, 1, 2, 3, 4]
    assert rows[-1].distance == 0.0
    assert all(r.within_bound for r in rows)


def test_convergence_level_range():
    with pytest.raises(ValueError):
        hausdorff_convergence("square", None, j_max=1, j_min=2)


def test_square_collar_series():
    rows = collar_measure_series("square", None, 4)
    assert [r.area for r in rows] == pytest.approx([2.0, 1.0, 0.5, 0.25, 0.125])
    assert all(r.relative_error < 1e-9 for r in rows)


def test_classical_collar_series(koch):
    rows = collar_measure_series("classical", koch.beta, 3)
    assert rows[0].closed_form == pytest.approx(1.5 * math.sqrt(1.0 / 12.0))
    assert all(r.relative_error < 1e-9 for r in rows)
    areas = [r.area for r in rows]
    assert all(b < a for a, b in zip(areas, areas[1:]))


def test_family_arguments():
    assert family_xi("square") == 0.25
    with pytest.raises(ValueError):
        family_xi("classical")
    with pytest.raises(ValueError):
        collar_measure_series("hexagonal", None, 1)


def test_pipeline_reports_its_inputs(koch):
    estimate = dimension_pipeline("classical", koch.beta, 4, (1, 4), 0, 0)
    assert estimate.target == pytest.approx(classical_dimension(koch))
    assert len(estimate.series.entries) == 4
    assert estimate.fit.points == 4
    with pytest.raises(ValueError):
        dimension_pipeline("classical", koch.beta, 4, (4, 1))


@pytest.mark.slow
def test_koch_dimension_estimate(koch):
    estimate = dimension_pipeline("classical", koch.beta, 7, (1, 6))
    assert estimate.fit.slope == pytest.approx(math.log(4.0) / math.log(3.0), abs=0.05)


@pytest.mark.slow
def test_square_dimension_estimate():
    estimate = dimension_pipeline("square", None, 6, (1, 5))
    assert estimate.fit.slope == pytest.approx(1.5, abs=0.05)


@pytest.mark.slow
def test_square_boundary_box_counts_grow():
    edges = square_prefractal(4).edges
    counts = [box_count(edges, 4.0 ** -k) for k in range(1, 5)]
    assert counts == sorted(counts)
