"""
Analysis: Dimension and Measure
Box counting with exact segment-grid traversal, log-log dimension fits, d-set ring
checks, Hausdorff convergence of prefractal legs and collar measure bookkeeping.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, field_validator

from geometry.classical import (
    ClassicalParams, classical_dimension, classical_leg, classical_level, collar_area,
)
from geometry.geom import SegmentIndex, SegmentsLike, as_segments, hausdorff_distance, polyline_segments
from geometry.square import collar_area_square, inner_outer, square_dimension, square_leg, square_prefractal
from utils.chunker import chunk_ranges

logger = logging.getLogger(__name__)

_GRID_SNAP = 1e-9


class BoxCountSeries(BaseModel):
    entries: list[tuple[float, int]]

    @field_validator("entries")
    @classmethod
    def _decreasing_radii(cls, entries):
        radii = [r for r, _ in entries]
        if any(r <= 0.0 for r in radii):
            raise ValueError("grid sizes must be positive")
        if any(b >= a for a, b in zip(radii, radii[1:])):
            raise ValueError("grid sizes must be strictly decreasing")
        counts = [c for _, c in entries]
        if any(b < a for a, b in zip(counts, counts[1:])):
            logger.warning("box counts are not monotone in the grid size: %s", counts)
        return entries

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        r = np.array([e[0] for e in self.entries], dtype=np.float64)
        n = np.array([e[1] for e in self.entries], dtype=np.float64)
        return r, n

    def rows(self) -> list[dict]:
        """CSV rows: r, count, logr, logcount."""
        return [
            {"r": r, "count": n, "logr": math.log(r), "logcount": math.log(n) if n > 0 else float("-inf")}
            for r, n in self.entries
        ]


class DimensionFit(BaseModel):
    slope: float
    intercept: float
    residual: float
    range_used: tuple[float, float]
    points: int
    drop_low: int = 1
    drop_high: int = 1


class DimensionEstimate(BaseModel):
    family: str
    level: int
    target: float
    series: BoxCountSeries
    fit: DimensionFit


class RingReport(BaseModel):
    c1_hat: float
    c2_hat: float
    spread: float
    evaluations: int
    edge_length: float


class ConvergenceRow(BaseModel):
    j: int
    distance: float
    bound: float
    error_bound: float
    within_bound: bool


class CollarRow(BaseModel):
    j: int
    area: float
    closed_form: float
    relative_error: float


# ── Box counting ──────────────────────────────────────────────
def _crossings(c0: np.ndarray, c1: np.ndarray, r: float) -> tuple[np.ndarray, np.ndarray]:
    """(owner, t) for every grid line k·r crossed by the coordinate running from c0 to c1."""
    lo, hi = np.minimum(c0, c1), np.maximum(c0, c1)
    first = np.ceil(lo / r)
    last = np.floor(hi / r)
    count = np.where(c1 != c0, np.maximum(0.0, last - first + 1.0), 0.0).astype(np.int64)
    owner = np.repeat(np.arange(len(c0)), count)
    step = np.arange(int(count.sum())) - np.repeat(np.cumsum(count) - count, count)
    k = first[owner] + step
    t = (k * r - c0[owner]) / (c1 - c0)[owner]
    return owner, t


def _cell_index(coord: np.ndarray, along_line: np.ndarray, r: float) -> np.ndarray:
    """floor(coord/r); a segment lying on a grid line goes to the cell below it."""
    u = coord / r
    nearest = np.round(u)
    on_line = along_line & (np.abs(u - nearest) <= _GRID_SNAP)
    return np.where(on_line, nearest - 1.0, np.floor(u)).astype(np.int64)


def box_count(segments: SegmentsLike, r: float) -> int:
    """
    Occupied cells of the origin-anchored grid [ir,(i+1)r)×[kr,(k+1)r).
    Cell indices are clamped to the grid range spanned by the set, so the closing edge of a
    set that ends on a grid line is counted in the last cell it reaches.
    """
    if not r > 0.0:
        raise ValueError(f"grid size must be positive, got {r}")
    seg = as_segments(segments)
    if len(seg) == 0:
        return 0
    pts = seg.reshape(-1, 2)
    lo_cell = np.floor(pts.min(axis=0) / r).astype(np.int64)
    hi_cell = np.maximum(lo_cell, np.ceil(pts.max(axis=0) / r).astype(np.int64) - 1)
    span = hi_cell - lo_cell + 1

    extent = np.abs(seg[:, 1] - seg[:, 0]).max(axis=0)
    width = int(np.ceil(extent.sum() / r)) + 2
    keys = []
    for block in chunk_ranges(len(seg), width=width):
        a, b = seg[block, 0], seg[block, 1]
        n = len(a)
        ox, tx = _crossings(a[:, 0], b[:, 0], r)
        oy, ty = _crossings(a[:, 1], b[:, 1], r)
        owner = np.concatenate([np.arange(n), np.arange(n), ox, oy])
        t = np.concatenate([np.zeros(n), np.ones(n), tx, ty])
        order = np.lexsort((t, owner))
        owner, t = owner[order], t[order]
        same = (owner[1:] == owner[:-1]) & (t[1:] - t[:-1] > 1e-12)
        o = owner[:-1][same]
        mid = 0.5 * (t[:-1][same] + t[1:][same])
        p = a[o] + mid[:, None] * (b[o] - a[o])
        d = b[o] - a[o]
        ix = _cell_index(p[:, 0], d[:, 0] == 0.0, r)
        iy = _cell_index(p[:, 1], d[:, 1] == 0.0, r)
        ix = np.clip(ix, lo_cell[0], hi_cell[0]) - lo_cell[0]
        iy = np.clip(iy, lo_cell[1], hi_cell[1]) - lo_cell[1]
        keys.append(np.unique(ix * span[1] + iy))
    return int(len(np.unique(np.concatenate(keys))))


def box_count_series(segments: SegmentsLike, radii: Sequence[float]) -> BoxCountSeries:
    seg = as_segments(segments)
    entries = [(float(r), box_count(seg, r)) for r in sorted({float(r) for r in radii}, reverse=True)]
    logger.debug("box counts: %s", entries)
    return BoxCountSeries(entries=entries)


def fit_dimension(series: BoxCountSeries, drop_low: int = 1, drop_high: int = 1) -> DimensionFit:
    """Least-squares slope of log count against log(1/r) after dropping the coarsest/finest scales."""
    if drop_low < 0 or drop_high < 0:
        raise ValueError("drop counts must be >= 0")
    r, n = series.as_arrays()
    r, n = r[drop_low:len(r) - drop_high], n[drop_low:len(n) - drop_high]
    if len(r) < 3:
        raise ValueError(f"need at least 3 usable entries after drops, got {len(r)}")
    if np.any(n <= 0):
        raise ValueError("box counts must be positive to fit a dimension")
    x, y = np.log(1.0 / r), np.log(n)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return DimensionFit(slope=float(slope), intercept=float(intercept), residual=residual,
                        range_used=(float(r.min()), float(r.max())), points=len(r),
                        drop_low=drop_low, drop_high=drop_high)


# ── d-set rings ───────────────────────────────────────────────
def dset_ring_check(segments: SegmentsLike, xi: float, d: float, centers: np.ndarray,
                    radii: Sequence[float]) -> RingReport:
    """
    Empirical c₁, c₂ with c₁r^d ≤ H^d(B(γ,r)∩Γ) ≤ c₂r^d, H^d approximated by
    (edges meeting the ball)·(edge length)^d at the finest level.
    """
    seg = as_segments(segments)
    if len(seg) == 0:
        raise ValueError("ring check needs a non-empty segment set")
    edge = float(np.median(np.linalg.norm(seg[:, 1] - seg[:, 0], axis=1)))
    floor = edge / (xi * xi)
    radii = [float(r) for r in radii]
    bad = [r for r in radii if not (floor < r <= 1.0)]
    if bad:
        raise ValueError(f"radii must lie in ({floor:.4g}, 1] for this resolution, got {bad}")
    index = SegmentIndex(seg)
    ratios = []
    for c in np.atleast_2d(np.asarray(centers, dtype=np.float64)):
        for r in radii:
            hits = len(index.within(c, r))
            ratios.append(hits * edge ** d / r ** d)
    lo, hi = min(ratios), max(ratios)
    return RingReport(c1_hat=lo, c2_hat=hi, spread=hi / lo if lo > 0 else math.inf,
                      evaluations=len(ratios), edge_length=edge)


# ── Convergence and measures ──────────────────────────────────
def _leg(family: str, beta: Optional[float], j: int) -> np.ndarray:
    if family == "classical":
        return polyline_segments(classical_leg(ClassicalParams(_need_beta(beta)), j))
    if family == "square":
        return polyline_segments(square_leg(j))
    raise ValueError(f"family must be classical or square, got {family!r}")


def _need_beta(beta: Optional[float]) -> float:
    if beta is None:
        raise ValueError("the classical family needs beta")
    return beta


def family_xi(family: str, beta: Optional[float] = None) -> float:
    return ClassicalParams(_need_beta(beta)).xi if family == "classical" else 0.25


def hausdorff_convergence(family: str, beta: Optional[float], j_max: int, j_min: int = 0,
                          spacing: Optional[float] = None) -> list[ConvergenceRow]:
    """d_H between the level-j leg and the level-j_max leg, against kξ^j + kξ^{j_max} + sampling error."""
    if j_max < j_min or j_min < 0:
        raise ValueError(f"need 0 <= j_min <= j_max, got {j_min}, {j_max}")
    xi = family_xi(family, beta)
    k = 1.0 / math.sqrt(2.0) if family == "classical" else 1.0
    spacing = xi ** j_max if spacing is None else spacing
    finest = _leg(family, beta, j_max)
    rows = []
    for j in range(j_min, j_max + 1):
        value, err = hausdorff_distance(_leg(family, beta, j), finest, spacing)
        bound = k * xi ** j + k * xi ** j_max + err
        rows.append(ConvergenceRow(j=j, distance=value, bound=bound, error_bound=err, within_bound=value <= bound))
    return rows


def collar_measure_series(family: str, beta: Optional[float], j_max: int) -> list[CollarRow]:
    """|Γ_j⁺| − |Γ_j⁻| from the constructed regions next to the closed form."""
    rows = []
    for j in range(j_max + 1):
        if family == "classical":
            p = ClassicalParams(_need_beta(beta))
            level = classical_level(p, j)
            area, closed = level.outer.area - level.inner.area, collar_area(p, j)
        elif family == "square":
            inner, outer = inner_outer(j)
            area, closed = outer.area - inner.area, collar_area_square(j)
        else:
            raise ValueError(f"family must be classical or square, got {family!r}")
        rows.append(CollarRow(j=j, area=area, closed_form=closed, relative_error=abs(area - closed) / closed))
    return rows


def dimension_pipeline(family: str, beta: Optional[float], level: int, scales: tuple[int, int],
                       drop_low: int = 1, drop_high: int = 1) -> DimensionEstimate:
    """Generate the level boundary, count boxes at r = ξ^k for k in scales, fit."""
    k1, k2 = scales
    if k1 > k2:
        raise ValueError(f"scale range must be increasing, got {k1}..{k2}")
    xi = family_xi(family, beta)
    if family == "classical":
        p = ClassicalParams(_need_beta(beta))
        segments = classical_level(p, level).inner.edges
        target = classical_dimension(p)
    else:
        segments = square_prefractal(level).edges
        target = square_dimension()
    series = box_count_series(segments, [xi ** k for k in range(k1, k2 + 1)])
    fit = fit_dimension(series, drop_low, drop_high)
    logger.info("%s dimension at level %d: %.4f (target %.4f)", family, level, fit.slope, target)
    return DimensionEstimate(family=family, level=level, target=target, series=series, fit=fit)
