"""
Geometry: Square Snowflake
Non-nested prefractals Γ_j from the 8-edge replacement rule, tilted-square collars Δ_j,
the nested pair Γ_j⁻ = Γ_j ∖ Δ_j, Γ_j⁺ = Γ_j ∪ Δ_j and the eight-map IFS.

Coordinates are integers in units of ℓ_j = 4^{-j} and only become floats at the
interface. Γ_j^± are stored as quarter complexes: every grid cell is split by its
diagonals into four quarter triangles (S, E, N, W), and a tilted square of Δ_j is
exactly the pair of quarters meeting across one boundary edge.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from geometry.geom import (
    BOUNDARY, INSIDE, OUTSIDE, AxisSquare, GeometryError, Point, Polygon, Segment, SegmentIndex,
    Tolerance, clip_polygon_to_square, polyline_segments,
)
from geometry.ifs import SimilarityMap, check_cap

logger = logging.getLogger(__name__)

XI = 0.25

# replacement rule for a directed unit edge in its (tangent, left normal) frame
_RULE = np.array([(0, 0), (1, 0), (1, 1), (2, 1), (2, 0), (2, -1), (3, -1), (3, 0)], dtype=np.int64)
_UNIT_SQUARE = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=np.int64)

QUARTERS = ("S", "E", "N", "W")
_STEP = np.array([[0, -1], [1, 0], [0, 1], [-1, 0]], dtype=np.int64)
_TRIANGLES = np.array([
    [[0.0, 0.0], [1.0, 0.0], [0.5, 0.5]],
    [[1.0, 0.0], [1.0, 1.0], [0.5, 0.5]],
    [[1.0, 1.0], [0.0, 1.0], [0.5, 0.5]],
    [[0.0, 1.0], [0.0, 0.0], [0.5, 0.5]],
])
# corner of the half-diagonal between quarter s and quarter s+1
_SPOKE_CORNER = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])
# quarters owning the octants of each half-cell (dx, dy)
_HALF_CELL_OWNERS = {(0, 0): (0, 3), (1, 0): (0, 1), (0, 1): (3, 2), (1, 1): (2, 1)}


def _which_quarter(dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """Quarter index for offsets (dx, dy) from a cell centre."""
    vertical = np.abs(dy) >= np.abs(dx)
    return np.where(vertical, np.where(dy < 0.0, 0, 2), np.where(dx > 0.0, 1, 3)).astype(np.int8)


def _refine_table() -> np.ndarray:
    """table[s, a, b]: the coarse quarter holding fine quarter s of fine cell (a, b)."""
    centroids = _TRIANGLES.mean(axis=1)
    a, b = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
    table = np.empty((4, 4, 4), dtype=np.int8)
    for s in range(4):
        x = (a + centroids[s, 0]) / 4.0
        y = (b + centroids[s, 1]) / 4.0
        table[s] = _which_quarter(x - 0.5, y - 0.5)
    return table


_REFINE = _refine_table()


# ── Boundary construction ─────────────────────────────────────
def _refine_units(points: np.ndarray, closed: bool) -> np.ndarray:
    a = points if closed else points[:-1]
    b = np.roll(points, -1, axis=0) if closed else points[1:]
    t = b - a
    n = np.stack([-t[:, 1], t[:, 0]], axis=1)
    body = 4 * a[:, None, :] + _RULE[None, :, 0, None] * t[:, None, :] + _RULE[None, :, 1, None] * n[:, None, :]
    body = body.reshape(-1, 2)
    return body if closed else np.concatenate([body, 4 * points[-1:]])


def boundary_units(j: int) -> np.ndarray:
    """Vertex loop of ∂Γ_j in integer units of 4^{-j} (4·8^j vertices, CCW)."""
    if j < 0:
        raise ValueError(f"level must be >= 0, got {j}")
    check_cap(4 * 8 ** j)
    loop = _UNIT_SQUARE.copy()
    for _ in range(j):
        loop = _refine_units(loop, closed=True)
    return loop


def square_leg(j: int) -> np.ndarray:
    """ψ^j(Λ): the 8^j-edge polyline from (0,0) to (1,0), first bump on the left."""
    if j < 0:
        raise ValueError(f"level must be >= 0, got {j}")
    check_cap(8 ** j)
    pts = np.array([[0, 0], [1, 0]], dtype=np.int64)
    for _ in range(j):
        pts = _refine_units(pts, closed=False)
    return pts / float(4 ** j)


def _raster(loop: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cells enclosed by an axis-parallel unit-step loop, by scanline parity."""
    lo = loop.min(axis=0)
    width, height = loop.max(axis=0) - lo
    nxt = np.roll(loop, -1, axis=0)
    vertical = loop[:, 0] == nxt[:, 0]
    x = loop[vertical, 0] - lo[0]
    y = np.minimum(loop[vertical, 1], nxt[vertical, 1]) - lo[1]
    toggle = np.zeros((width + 1, height), dtype=np.int8)
    np.add.at(toggle, (x, y), 1)
    inside = np.logical_xor.accumulate(toggle % 2 == 1, axis=0)[:width]
    return inside, lo


# ── Tilted squares ────────────────────────────────────────────
def tilted_vertices(diagonals: np.ndarray) -> np.ndarray:
    """(N, 4, 2) CCW vertices a, right corner, b, left corner of tilted squares on diagonals a→b."""
    a, b = diagonals[:, 0], diagonals[:, 1]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    left = np.stack([-half[:, 1], half[:, 0]], axis=1)
    return np.stack([a, mid - left, b, mid + left], axis=1)


@dataclass(frozen=True)
class TiltedSquare:
    diagonal: Segment

    @property
    def vertices(self) -> np.ndarray:
        return tilted_vertices(self.diagonal.as_array()[None])[0]

    @property
    def area(self) -> float:
        return 0.5 * self.diagonal.length ** 2


# ── Quarter complexes ─────────────────────────────────────────
class QuarterComplex:
    """
    A union of quarter triangles on the level-j grid.
    `members[s, i, k]` says whether quarter s of cell (origin + (i, k)) belongs to the set.
    Exposes classify / boundary_index so it can stand in for a Polygon in containment tests.
    """

    def __init__(self, level: int, origin: Iterable[int], members: np.ndarray, tol: Optional[Tolerance] = None):
        members = np.asarray(members, dtype=bool)
        if members.ndim != 3 or members.shape[0] != 4:
            raise GeometryError(f"quarter membership must have shape (4, W, H), got {members.shape}")
        self.level = level
        self.origin = np.asarray(tuple(origin), dtype=np.int64)
        self.members = members
        self.tol = tol or Tolerance()

    @classmethod
    def from_cells(cls, level: int, origin: Iterable[int], cells: np.ndarray, mode: str) -> "QuarterComplex":
        """
        Quarters of a cell raster by neighbour rule: 'inner' keeps quarters whose cell and
        neighbour across the quarter's side are both in, 'outer' quarters where either is,
        'collar' where exactly one is.
        """
        grid = np.pad(np.asarray(cells, dtype=bool), 1)
        members = np.empty((4,) + grid.shape, dtype=bool)
        for s, (dx, dy) in enumerate(_STEP):
            neighbour = np.roll(grid, (-dx, -dy), axis=(0, 1))
            if mode == "inner":
                members[s] = grid & neighbour
            elif mode == "outer":
                members[s] = grid | neighbour
            elif mode == "collar":
                members[s] = grid ^ neighbour
            else:
                raise ValueError(f"mode must be inner, outer or collar, got {mode!r}")
        return cls(level, np.asarray(tuple(origin)) - 1, members)

    @property
    def resolution(self) -> float:
        return 4.0 ** -self.level

    @property
    def quarter_count(self) -> int:
        return int(np.count_nonzero(self.members))

    @property
    def area(self) -> float:
        return self.quarter_count * self.resolution ** 2 / 4.0

    def is_empty(self) -> bool:
        return self.quarter_count == 0

    def __repr__(self) -> str:
        return f"QuarterComplex(j={self.level}, quarters={self.quarter_count})"

    def triangles(self) -> np.ndarray:
        s, i, k = np.nonzero(self.members)
        base = np.stack([i, k], axis=1) + self.origin
        return (base[:, None, :] + _TRIANGLES[s]) * self.resolution

    def boundary_segments(self) -> np.ndarray:
        """Half-diagonals separating a member quarter from a non-member quarter of the same cell."""
        parts = []
        for s in range(4):
            i, k = np.nonzero(self.members[s] ^ self.members[(s + 1) % 4])
            base = np.stack([i, k], axis=1) + self.origin
            parts.append(np.stack([base + _SPOKE_CORNER[s], base + 0.5], axis=1))
        return np.concatenate(parts) * self.resolution

    @cached_property
    def boundary_index(self) -> SegmentIndex:
        segments = self.boundary_segments()
        if len(segments) == 0:
            raise GeometryError(f"level-{self.level} quarter complex has no boundary")
        return SegmentIndex(segments)

    def locate(self, points: np.ndarray) -> np.ndarray:
        """Membership of the quarter containing each point (off-grid points are non-members)."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64)) / self.resolution
        cell = np.floor(pts).astype(np.int64)
        frac = pts - cell
        s = _which_quarter(frac[:, 0] - 0.5, frac[:, 1] - 0.5)
        idx = cell - self.origin
        width, height = self.members.shape[1:]
        valid = (idx[:, 0] >= 0) & (idx[:, 0] < width) & (idx[:, 1] >= 0) & (idx[:, 1] < height)
        out = np.zeros(len(pts), dtype=bool)
        out[valid] = self.members[s[valid], idx[valid, 0], idx[valid, 1]]
        return out

    def classify(self, points: np.ndarray, tol: Optional[Tolerance] = None) -> np.ndarray:
        tol = tol or self.tol
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        out = np.where(self.locate(pts), INSIDE, OUTSIDE).astype(np.int8)
        if not self.is_empty():
            out[self.boundary_index.distances(pts) <= tol.eps] = BOUNDARY
        return out

    def refined(self) -> "QuarterComplex":
        """The same set on the level j+1 grid (16 fine quarters per coarse quarter)."""
        _, width, height = self.members.shape
        fine = np.zeros((4, 4 * width, 4 * height), dtype=bool)
        for s in range(4):
            for a in range(4):
                for b in range(4):
                    fine[s, a::4, b::4] = self.members[_REFINE[s, a, b]]
        return QuarterComplex(self.level + 1, 4 * self.origin, fine, self.tol)

    def translated(self, dx: float, dy: float) -> "QuarterComplex":
        shift = np.array([dx, dy]) / self.resolution
        steps = np.round(shift)
        if np.any(np.abs(shift - steps) > 1e-9):
            raise GeometryError("quarter complexes translate only by multiples of the grid pitch")
        return QuarterComplex(self.level, self.origin + steps.astype(np.int64), self.members, self.tol)

    def at_level(self, level: int) -> "QuarterComplex":
        if level < self.level:
            raise ValueError(f"cannot coarsen a level-{self.level} complex to level {level}")
        out = self
        while out.level < level:
            out = out.refined()
        return out

    def issubset(self, other: "QuarterComplex") -> bool:
        """Exact set inclusion, refining the coarser complex to the common level."""
        level = max(self.level, other.level)
        a, b = self.at_level(level), other.at_level(level)
        lo = np.minimum(a.origin, b.origin)
        hi = np.maximum(a.origin + a.members.shape[1:], b.origin + b.members.shape[1:])
        return not np.any(a._embedded(lo, hi) & ~b._embedded(lo, hi))

    def _embedded(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        frame = np.zeros((4,) + tuple(hi - lo), dtype=bool)
        off = self.origin - lo
        _, width, height = self.members.shape
        frame[:, off[0]:off[0] + width, off[1]:off[1] + height] = self.members
        return frame

    def area_in_square(self, square: AxisSquare) -> float:
        """
        |set ∩ Q|. Exact octant counting when Q's corners lie on the half-cell lattice,
        per-triangle clipping otherwise.
        """
        ell = self.resolution
        corner = 2.0 * np.array([square.min_corner.x, square.min_corner.y]) / ell
        span = 2.0 * square.side / ell
        snapped = np.round(np.append(corner, span))
        if np.all(np.abs(np.append(corner, span) - snapped) <= 1e-9 * np.maximum(1.0, np.abs(snapped))):
            lo = snapped[:2].astype(np.int64) - 2 * self.origin
            return self._octants_in_window(lo, lo + int(snapped[2])) * ell * ell / 8.0
        return self._clipped_area(square)

    def _octants_in_window(self, lo: np.ndarray, hi: np.ndarray) -> int:
        _, width, height = self.members.shape
        lo = np.clip(lo, 0, [2 * width, 2 * height])
        hi = np.clip(hi, 0, [2 * width, 2 * height])
        if np.any(hi <= lo):
            return 0
        c0, c1 = lo // 2, (hi + 1) // 2
        sub = self.members[:, c0[0]:c1[0], c0[1]:c1[1]].astype(np.int32)
        counts = np.zeros((2 * sub.shape[1], 2 * sub.shape[2]), dtype=np.int32)
        for (dx, dy), (s1, s2) in _HALF_CELL_OWNERS.items():
            counts[dx::2, dy::2] = sub[s1] + sub[s2]
        start = lo - 2 * c0
        stop = hi - 2 * c0
        return int(counts[start[0]:stop[0], start[1]:stop[1]].sum())

    def _clipped_area(self, square: AxisSquare) -> float:
        ell = self.resolution
        x0, y0 = square.min_corner.x / ell, square.min_corner.y / ell
        x1, y1 = x0 + square.side / ell, y0 + square.side / ell
        lo = np.array([math.floor(x0), math.floor(y0)]) - self.origin
        hi = np.array([math.ceil(x1), math.ceil(y1)]) - self.origin
        _, width, height = self.members.shape
        lo = np.clip(lo, 0, [width, height])
        hi = np.clip(hi, 0, [width, height])
        s, i, k = np.nonzero(self.members[:, lo[0]:hi[0], lo[1]:hi[1]])
        base = np.stack([i, k], axis=1) + lo + self.origin
        tris = (base[:, None, :] + _TRIANGLES[s]) * ell
        return float(sum(clip_polygon_to_square(t, square) for t in tris))

    def to_json(self) -> dict:
        s, i, k = np.nonzero(self.members)
        cells = np.stack([i, k], axis=1) + self.origin
        return {
            "resolution": self.resolution,
            "quarters": [[int(c[0]), int(c[1]), QUARTERS[q]] for c, q in zip(cells, s)],
        }


# ── Levels ────────────────────────────────────────────────────
@dataclass(frozen=True)
class SquareLevel:
    j: int
    boundary: Polygon
    raster: np.ndarray
    origin: np.ndarray
    units: np.ndarray

    @property
    def resolution(self) -> float:
        return 4.0 ** -self.j

    @cached_property
    def cells(self) -> np.ndarray:
        """(16^j, 2) integer cell indices (i, k) of Γ_j, cell = [i, i+1]×[k, k+1]·4^{-j}."""
        return np.argwhere(self.raster) + self.origin

    @cached_property
    def edges(self) -> np.ndarray:
        return polyline_segments(self.units, closed=True) * self.resolution

    @cached_property
    def tilted(self) -> list[TiltedSquare]:
        return [TiltedSquare(Segment(Point.of(e[0]), Point.of(e[1]))) for e in self.edges]

    def cells_json(self) -> dict:
        return {"resolution": self.resolution, "cells": self.cells.tolist()}


def square_prefractal(j: int) -> SquareLevel:
    loop = boundary_units(j)
    raster, origin = _raster(loop)
    count = int(np.count_nonzero(raster))
    if count != 16 ** j:
        raise GeometryError(f"square prefractal j={j}: {count} cells, expected {16 ** j}")
    boundary = Polygon(loop / float(4 ** j))
    logger.debug("square level j=%d: %d edges, %d cells", j, len(loop), count)
    return SquareLevel(j=j, boundary=boundary, raster=raster, origin=origin, units=loop)


def collar_pieces_square(j: int) -> np.ndarray:
    """(4·8^j, 4, 2) vertices of the tilted squares of Δ_j."""
    return tilted_vertices(polyline_segments(boundary_units(j), closed=True) / float(4 ** j))


def collar(j: int) -> tuple[list[TiltedSquare], float]:
    level = square_prefractal(j)
    pieces = level.tilted
    # interiors are pairwise disjoint, so the areas add
    return pieces, float(sum(t.area for t in pieces))


def collar_area_square(j: int) -> float:
    if j < 0:
        raise ValueError(f"level must be >= 0, got {j}")
    return 2.0 ** (1 - j)


def inner_outer(j: int, level: Optional[SquareLevel] = None) -> tuple[QuarterComplex, QuarterComplex]:
    """(Γ_j⁻, Γ_j⁺) as quarter complexes; Γ_0⁻ is empty."""
    level = level or square_prefractal(j)
    inner = QuarterComplex.from_cells(j, level.origin, level.raster, "inner")
    outer = QuarterComplex.from_cells(j, level.origin, level.raster, "outer")
    return inner, outer


def collar_complex(j: int, level: Optional[SquareLevel] = None) -> QuarterComplex:
    level = level or square_prefractal(j)
    return QuarterComplex.from_cells(j, level.origin, level.raster, "collar")


# ── IFS and tiling ────────────────────────────────────────────
def square_ifs() -> list[SimilarityMap]:
    x, half = XI, math.pi / 2.0
    return [
        SimilarityMap(x, 0.0, Point(0.0, 0.0)),
        SimilarityMap(x, half, Point(x, 0.0)),
        SimilarityMap(x, 0.0, Point(x, x)),
        SimilarityMap(x, -half, Point(2 * x, x)),
        SimilarityMap(x, -half, Point(2 * x, 0.0)),
        SimilarityMap(x, 0.0, Point(2 * x, -x)),
        SimilarityMap(x, half, Point(3 * x, -x)),
        SimilarityMap(x, 0.0, Point(3 * x, 0.0)),
    ]


def square_open_set() -> np.ndarray:
    """The tilted square of Δ₀ on the diagonal [(0,0),(1,0)]."""
    return np.array([[0.0, 0.0], [0.5, -0.5], [1.0, 0.0], [0.5, 0.5]])


def square_dimension() -> float:
    return math.log(8.0) / math.log(4.0)


def tiling_check(j: int, block: Optional[Iterable[tuple[int, int]]] = None) -> bool:
    """
    Translates Γ_j + (k₁, k₂) over `block` (default the 3×3 offsets around 0) have
    disjoint cells, and together they cover every cell of the unit square.
    """
    if j > 3:
        raise ValueError(f"tiling_check supports j <= 3, got {j}")
    offsets = np.array(list(block) if block is not None else [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)])
    cells = square_prefractal(j).cells
    n = 4 ** j
    shifted = np.concatenate([cells + n * off for off in offsets])
    unique = np.unique(shifted, axis=0)
    if len(unique) != len(shifted):
        logger.info("tiling_check j=%d: overlapping translates", j)
        return False
    central = (unique[:, 0] >= 0) & (unique[:, 0] < n) & (unique[:, 1] >= 0) & (unique[:, 1] < n)
    return int(np.count_nonzero(central)) == n * n

