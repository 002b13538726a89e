"""
Geometry: Planar Kernel
Tolerance-aware points, segments, polygons, axis squares and discs.
All heavy lifting is vectorized with numpy; nearest-segment queries go through a
scipy cKDTree over segment midpoints.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from config import settings
from utils.chunker import chunk_ranges

logger = logging.getLogger(__name__)


class GeometryError(ValueError):
    """Raised for degenerate or malformed geometric input."""


# ── Value types ───────────────────────────────────────────────
@dataclass(frozen=True)
class Tolerance:
    eps: float = field(default_factory=lambda: settings.eps)

    def __post_init__(self):
        if not (self.eps > 0.0 and math.isfinite(self.eps)):
            raise GeometryError(f"tolerance eps must be a positive finite number, got {self.eps}")


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"point coordinates must be finite, got ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=np.float64)

    @classmethod
    def of(cls, xy: Sequence[float]) -> "Point":
        return cls(float(xy[0]), float(xy[1]))


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        if math.hypot(self.b.x - self.a.x, self.b.y - self.a.y) <= settings.eps:
            raise GeometryError(f"segment endpoints coincide: {self.a} ~ {self.b}")

    @property
    def length(self) -> float:
        return math.hypot(self.b.x - self.a.x, self.b.y - self.a.y)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a.x, self.a.y], [self.b.x, self.b.y]], dtype=np.float64)


@dataclass(frozen=True)
class AxisSquare:
    min_corner: Point
    side: float

    def __post_init__(self):
        if not (self.side > 0.0 and math.isfinite(self.side)):
            raise GeometryError(f"square side must be positive, got {self.side}")

    @classmethod
    def centered(cls, center: Sequence[float], side: float) -> "AxisSquare":
        return cls(Point(float(center[0]) - side / 2.0, float(center[1]) - side / 2.0), float(side))

    @property
    def center(self) -> np.ndarray:
        h = self.side / 2.0
        return np.array([self.min_corner.x + h, self.min_corner.y + h])

    @property
    def area(self) -> float:
        return self.side * self.side

    def corners(self) -> np.ndarray:
        x0, y0, s = self.min_corner.x, self.min_corner.y, self.side
        return np.array([[x0, y0], [x0 + s, y0], [x0 + s, y0 + s], [x0, y0 + s]])

    def edges(self) -> np.ndarray:
        c = self.corners()
        return np.stack([c, np.roll(c, -1, axis=0)], axis=1)

    def translated(self, dx: float, dy: float) -> "AxisSquare":
        return AxisSquare(Point(self.min_corner.x + dx, self.min_corner.y + dy), self.side)

    def to_json(self) -> dict:
        return {"type": "square", "min_corner": [self.min_corner.x, self.min_corner.y], "side": self.side}


@dataclass(frozen=True)
class Disc:
    center: Point
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise GeometryError(f"disc radius must be positive, got {self.radius}")

    def to_json(self) -> dict:
        return {"type": "disc", "center": [self.center.x, self.center.y], "radius": self.radius}


class Location(str, Enum):
    OUTSIDE = "Outside"
    BOUNDARY = "Boundary"
    INSIDE = "Inside"


# integer codes for vectorized classification
OUTSIDE, BOUNDARY, INSIDE = 0, 1, 2
_LOCATIONS = {OUTSIDE: Location.OUTSIDE, BOUNDARY: Location.BOUNDARY, INSIDE: Location.INSIDE}

SegmentsLike = Union[np.ndarray, Sequence[Segment]]


def as_segments(segments: SegmentsLike) -> np.ndarray:
    """Normalize a list of Segment or an (N, 2, 2) array to a float64 (N, 2, 2) array."""
    if isinstance(segments, np.ndarray):
        arr = np.asarray(segments, dtype=np.float64)
    else:
        items = list(segments)
        if not items:
            return np.empty((0, 2, 2))
        arr = np.stack([s.as_array() if isinstance(s, Segment) else np.asarray(s, dtype=np.float64) for s in items])
    if arr.size == 0:
        return np.empty((0, 2, 2))
    if arr.ndim != 3 or arr.shape[1:] != (2, 2):
        raise GeometryError(f"expected segments of shape (N, 2, 2), got {arr.shape}")
    return arr


def polyline_segments(points: np.ndarray, closed: bool = False) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if closed:
        return np.stack([pts, np.roll(pts, -1, axis=0)], axis=1)
    return np.stack([pts[:-1], pts[1:]], axis=1)


# ── Low-level vectorized primitives ───────────────────────────
def _cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    len2 = np.einsum("...i,...i->...", d, d)
    safe = np.where(len2 > 0.0, len2, 1.0)
    raw = np.einsum("...i,...i->...", p - a, d) / safe
    t = np.where(len2 > 0.0, np.clip(raw, 0.0, 1.0), 0.0)
    foot = a + t[..., None] * d
    to_end = np.linalg.norm(p - foot, axis=-1)
    # interior feet: perpendicular component, exactly 0 for collinear points
    perp = np.abs(_cross(d, p - a)) / np.sqrt(safe)
    return np.where((len2 > 0.0) & (raw > 0.0) & (raw < 1.0), perp, to_end)


def _closest_on_segment(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    len2 = np.einsum("...i,...i->...", d, d)
    safe = np.where(len2 > 0.0, len2, 1.0)
    t = np.clip(np.einsum("...i,...i->...", p - a, d) / safe, 0.0, 1.0)
    return a + t[..., None] * d


def _segments_cross(p0, p1, q0, q1) -> np.ndarray:
    o1 = _cross(p1 - p0, q0 - p0)
    o2 = _cross(p1 - p0, q1 - p0)
    o3 = _cross(q1 - q0, p0 - q0)
    o4 = _cross(q1 - q0, p1 - q0)
    return (o1 * o2 < 0.0) & (o3 * o4 < 0.0)


def segment_pair_distance(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Elementwise distance between segment arrays broadcastable to (..., 2, 2)."""
    p0, p1 = s[..., 0, :], s[..., 1, :]
    q0, q1 = t[..., 0, :], t[..., 1, :]
    d = np.minimum(
        np.minimum(_point_segment_distance(p0, q0, q1), _point_segment_distance(p1, q0, q1)),
        np.minimum(_point_segment_distance(q0, p0, p1), _point_segment_distance(q1, p0, p1)),
    )
    return np.where(_segments_cross(p0, p1, q0, q1), 0.0, d)


def shoelace(vertices: np.ndarray) -> float:
    """Signed area of a closed vertex loop; positive for counter-clockwise order."""
    v = np.asarray(vertices, dtype=np.float64)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


# ── Nearest-segment index ─────────────────────────────────────
class SegmentIndex:
    """
    Exact nearest-segment queries over a large segment set.
    A cKDTree over midpoints gives a first upper bound; every segment whose midpoint lies
    within (bound + half the longest segment) is then checked exactly.
    """

    def __init__(self, segments: SegmentsLike):
        seg = as_segments(segments)
        if len(seg) == 0:
            raise GeometryError("cannot index an empty segment set")
        self.segments = seg
        self._a = seg[:, 0]
        self._b = seg[:, 1]
        mids = 0.5 * (self._a + self._b)
        self.reach = 0.5 * float(np.max(np.linalg.norm(self._b - self._a, axis=1)))
        self._tree = cKDTree(mids)

    def __len__(self) -> int:
        return len(self.segments)

    def candidates_near(self, center: np.ndarray, radius: float) -> np.ndarray:
        """Indices of segments that may come within `radius` of `center`."""
        found = self._tree.query_ball_point(np.asarray(center, dtype=np.float64), radius + self.reach)
        return np.asarray(sorted(found), dtype=np.int64)

    def nearest(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (distance, segment index, closest point) for each query point."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        m = len(pts)
        if m == 0:
            return np.empty(0), np.empty(0, dtype=np.int64), np.empty((0, 2))
        k = min(4, len(self))
        _, idx = self._tree.query(pts, k=k)
        idx = np.asarray(idx).reshape(m, -1)
        upper = _point_segment_distance(pts[:, None, :], self._a[idx], self._b[idx]).min(axis=1)

        dist = np.empty(m)
        best = np.empty(m, dtype=np.int64)
        for block in chunk_ranges(m, width=64):
            lists = self._tree.query_ball_point(pts[block], upper[block] + self.reach + 1e-15)
            sizes = np.fromiter((len(c) for c in lists), dtype=np.int64, count=len(lists))
            flat = np.fromiter((i for c in lists for i in c), dtype=np.int64, count=int(sizes.sum()))
            owner = np.repeat(np.arange(len(lists)), sizes)
            cand = _point_segment_distance(pts[block][owner], self._a[flat], self._b[flat])
            order = np.lexsort((flat, cand, owner))
            _, first = np.unique(owner[order], return_index=True)
            pick = order[first]
            dist[block] = cand[pick]
            best[block] = flat[pick]
        foot = _closest_on_segment(pts, self._a[best], self._b[best])
        return dist, best, foot

    def distances(self, points: np.ndarray) -> np.ndarray:
        return self.nearest(points)[0]

    def distance_to_square(self, square: AxisSquare) -> float:
        """Distance from the filled square to the segment set (0 when they meet)."""
        center = square.center
        half_diag = square.side / math.sqrt(2.0)
        upper = float(self.distances(center)[0])
        cand = self.candidates_near(center, upper + half_diag)
        if len(cand) == 0:
            return max(0.0, upper - half_diag)
        return float(_square_segments_distance(square, self.segments[cand]).min())

    def within(self, center: np.ndarray, radius: float) -> np.ndarray:
        """Indices of segments meeting the closed disc B(center, radius)."""
        cand = self.candidates_near(center, radius)
        if len(cand) == 0:
            return cand
        d = _point_segment_distance(np.asarray(center, dtype=np.float64)[None, :], self._a[cand], self._b[cand])
        return cand[d <= radius]


def _square_segments_distance(square: AxisSquare, segments: np.ndarray) -> np.ndarray:
    """Per-segment distance to a filled axis square."""
    lo = np.array([square.min_corner.x, square.min_corner.y])
    hi = lo + square.side
    inside = np.zeros(len(segments), dtype=bool)
    for end in (0, 1):
        p = segments[:, end]
        inside |= np.all((p >= lo) & (p <= hi), axis=1)
    edges = square.edges()
    d = segment_pair_distance(segments[:, None, :, :], edges[None, :, :, :]).min(axis=1)
    return np.where(inside, 0.0, d)


# ── Polygon ───────────────────────────────────────────────────
class Polygon:
    """
    Simple closed polygon stored counter-clockwise.
    Clockwise input is reversed; a repeated closing vertex and consecutive duplicates
    (within eps) are dropped.
    """

    def __init__(self, vertices, tol: Optional[Tolerance] = None):
        tol = tol or Tolerance()
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError(f"polygon vertices must have shape (N, 2), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise GeometryError("polygon vertices must be finite")
        if len(v) > 1:
            step = np.linalg.norm(np.diff(v, axis=0), axis=1)
            v = v[np.concatenate([[True], step > tol.eps])]
        if len(v) > 1 and np.linalg.norm(v[-1] - v[0]) <= tol.eps:
            v = v[:-1]
        if len(v) < 3:
            raise GeometryError(f"polygon needs at least 3 distinct vertices, got {len(v)}")
        area = shoelace(v)
        if abs(area) <= tol.eps * tol.eps:
            raise GeometryError("polygon has zero area")
        if area < 0.0:
            v = v[::-1].copy()
        v.setflags(write=False)
        self._vertices = v
        self.tol = tol

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    def __len__(self) -> int:
        return len(self._vertices)

    def __repr__(self) -> str:
        return f"Polygon(n={len(self)}, area={self.area:.6g})"

    @cached_property
    def area(self) -> float:
        return shoelace(self._vertices)

    @cached_property
    def edges(self) -> np.ndarray:
        return polyline_segments(self._vertices, closed=True)

    @cached_property
    def boundary_index(self) -> SegmentIndex:
        return SegmentIndex(self.edges)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        lo = self._vertices.min(axis=0)
        hi = self._vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edges[:, 1] - self.edges[:, 0], axis=1)

    def classify(self, points: np.ndarray, tol: Optional[Tolerance] = None) -> np.ndarray:
        return classify_points(points, self, tol)

    def area_in_square(self, square: AxisSquare) -> float:
        return clip_polygon_to_square(self, square)

    def transformed(self, matrix: np.ndarray, shift: Sequence[float] = (0.0, 0.0)) -> "Polygon":
        return Polygon(self._vertices @ np.asarray(matrix, dtype=np.float64).T + np.asarray(shift), self.tol)

    def is_simple(self) -> bool:
        """No two non-adjacent edges come within eps of each other."""
        n = len(self)
        reach = float(self.edge_lengths().max())
        mids = 0.5 * (self.edges[:, 0] + self.edges[:, 1])
        pairs = cKDTree(mids).query_pairs(reach + self.tol.eps, output_type="ndarray")
        if len(pairs) == 0:
            return True
        i, j = pairs[:, 0], pairs[:, 1]
        gap = np.abs(i - j)
        keep = (gap != 1) & (gap != n - 1)
        i, j = i[keep], j[keep]
        if len(i) == 0:
            return True
        return bool(np.all(segment_pair_distance(self.edges[i], self.edges[j]) > self.tol.eps))

    def to_json(self) -> dict:
        return {"vertices": self._vertices.tolist(), "closed": True}

    @classmethod
    def from_json(cls, data: dict) -> "Polygon":
        if not data.get("closed", True):
            raise GeometryError("only closed polygons are supported")
        return cls(np.asarray(data["vertices"], dtype=np.float64))


# ── Operations ────────────────────────────────────────────────
def polygon_area(P: Union[Polygon, np.ndarray]) -> float:
    """Shoelace area, positive for CCW input."""
    if isinstance(P, Polygon):
        return P.area
    v = np.asarray(P, dtype=np.float64)
    if len(v) < 3:
        raise GeometryError(f"polygon needs at least 3 vertices, got {len(v)}")
    return shoelace(v)


def classify_points(points: np.ndarray, P: Polygon, tol: Optional[Tolerance] = None) -> np.ndarray:
    """Vectorized ray-crossing classification returning OUTSIDE / BOUNDARY / INSIDE codes."""
    tol = tol or P.tol
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    out = np.full(len(pts), OUTSIDE, dtype=np.int8)
    if len(pts) == 0:
        return out
    a = P.vertices
    b = np.roll(a, -1, axis=0)
    dy = b[:, 1] - a[:, 1]
    safe_dy = np.where(dy != 0.0, dy, 1.0)
    for block in chunk_ranges(len(pts), width=len(a)):
        px = pts[block, 0][:, None]
        py = pts[block, 1][:, None]
        straddle = (a[None, :, 1] > py) != (b[None, :, 1] > py)
        x_cross = a[None, :, 0] + (py - a[None, :, 1]) * (b[None, :, 0] - a[None, :, 0]) / safe_dy[None, :]
        crossings = np.count_nonzero(straddle & (px < x_cross), axis=1)
        out[block] = np.where(crossings % 2 == 1, INSIDE, OUTSIDE)
    on_edge = P.boundary_index.distances(pts) <= tol.eps
    out[on_edge] = BOUNDARY
    return out


def point_in_polygon(p: Point, P: Polygon, tol: Optional[Tolerance] = None) -> Location:
    code = int(classify_points(p.as_array()[None, :], P, tol)[0])
    return _LOCATIONS[code]


def winding_number(points: np.ndarray, P: Polygon) -> np.ndarray:
    """Winding number of P around each point (upward crossings left of an edge count +1)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    a = P.vertices
    b = np.roll(a, -1, axis=0)
    wn = np.zeros(len(pts), dtype=np.int64)
    for block in chunk_ranges(len(pts), width=len(a)):
        p = pts[block][:, None, :]
        side = _cross(b[None] - a[None], p - a[None])
        up = (a[None, :, 1] <= p[..., 1]) & (b[None, :, 1] > p[..., 1]) & (side > 0.0)
        down = (a[None, :, 1] > p[..., 1]) & (b[None, :, 1] <= p[..., 1]) & (side < 0.0)
        wn[block] = up.sum(axis=1) - down.sum(axis=1)
    return wn


def dist_point_segment(p: Point, s: Segment) -> float:
    return float(_point_segment_distance(p.as_array(), s.a.as_array(), s.b.as_array()))


def dist_points_segments(points: np.ndarray, segments: SegmentsLike) -> np.ndarray:
    """Exact distance from each point to the nearest of `segments`."""
    seg = as_segments(segments)
    if len(seg) == 0:
        raise GeometryError("distance to an empty segment set is undefined")
    return SegmentIndex(seg).distances(points)


def dist_polyline_polyline(A: SegmentsLike, B: SegmentsLike) -> float:
    """Minimum segment-to-segment distance between two segment sets."""
    a = as_segments(A)
    b = as_segments(B)
    if len(a) == 0 or len(b) == 0:
        raise GeometryError("distance between polylines needs two non-empty inputs")
    best = math.inf
    for block in chunk_ranges(len(a), width=len(b)):
        d = segment_pair_distance(a[block][:, None, :, :], b[None, :, :, :])
        best = min(best, float(d.min()))
    return best


def dist_point_square(points: np.ndarray, square: AxisSquare) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    gap = np.maximum(np.abs(pts - square.center) - square.side / 2.0, 0.0)
    return np.linalg.norm(gap, axis=1)


def dist_square_square(q1: AxisSquare, q2: AxisSquare) -> float:
    gap = np.maximum(np.abs(q1.center - q2.center) - (q1.side + q2.side) / 2.0, 0.0)
    return float(np.linalg.norm(gap))


def dist_square_segments(square: AxisSquare, segments: Union[SegmentIndex, SegmentsLike]) -> float:
    index = segments if isinstance(segments, SegmentIndex) else SegmentIndex(segments)
    return index.distance_to_square(square)


# ── Hausdorff distance by certified sampling ──────────────────
class HausdorffResult(NamedTuple):
    value: float
    error_bound: float


def sample_segments(segments: np.ndarray, spacing: float) -> tuple[np.ndarray, float]:
    """Points along every segment with pitch <= spacing; returns (points, realized max pitch)."""
    seg = as_segments(segments)
    lengths = np.linalg.norm(seg[:, 1] - seg[:, 0], axis=1)
    pieces = np.maximum(1, np.ceil(lengths / spacing).astype(np.int64))
    owner = np.repeat(np.arange(len(seg)), pieces)
    starts = np.cumsum(pieces) - pieces
    step = np.arange(int(pieces.sum())) - np.repeat(starts, pieces)
    t = step / pieces[owner]
    pts = seg[owner, 0] + t[:, None] * (seg[owner, 1] - seg[owner, 0])
    pts = np.concatenate([pts, seg[:, 1]])
    return pts, float((lengths / pieces).max())


def hausdorff_distance(A: SegmentsLike, B: SegmentsLike, spacing: float) -> HausdorffResult:
    """
    Symmetric Hausdorff distance between two segment sets.
    Both sides are sampled at pitch spacing/2, so the sampled value is within
    (pitch_A + pitch_B)/2 <= spacing/2 of the exact one.
    """
    if not spacing > 0.0:
        raise GeometryError(f"spacing must be positive, got {spacing}")
    a = as_segments(A)
    b = as_segments(B)
    if len(a) == 0 or len(b) == 0:
        raise GeometryError("Hausdorff distance needs two non-empty inputs")
    pa, ha = sample_segments(a, spacing / 2.0)
    pb, hb = sample_segments(b, spacing / 2.0)
    d_ab = float(cKDTree(pb).query(pa)[0].max())
    d_ba = float(cKDTree(pa).query(pb)[0].max())
    return HausdorffResult(max(d_ab, d_ba), 0.5 * (ha + hb))


# ── Clipping (Sutherland–Hodgman) ─────────────────────────────
def _clip_halfplane(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Keep the part of `poly` with normal·p <= offset."""
    if len(poly) == 0:
        return poly
    s = poly @ normal - offset
    nxt = np.roll(poly, -1, axis=0)
    s_next = np.roll(s, -1)
    inside_a = s <= 0.0
    inside_b = s_next <= 0.0
    crosses = inside_a != inside_b
    denom = np.where(crosses, s - s_next, 1.0)
    t = np.where(crosses, s / denom, 0.0)
    inter = poly + t[:, None] * (nxt - poly)
    emitted = np.stack([inter, nxt], axis=1)
    mask = np.stack([crosses, inside_b], axis=1)
    return emitted[mask]


def clip_polygon_to_square_vertices(P: Union[Polygon, np.ndarray], Q: AxisSquare) -> np.ndarray:
    poly = P.vertices if isinstance(P, Polygon) else np.asarray(P, dtype=np.float64)
    x0, y0 = Q.min_corner.x, Q.min_corner.y
    x1, y1 = x0 + Q.side, y0 + Q.side
    for normal, offset in (((-1.0, 0.0), -x0), ((1.0, 0.0), x1), ((0.0, -1.0), -y0), ((0.0, 1.0), y1)):
        poly = _clip_halfplane(poly, np.array(normal), offset)
        if len(poly) == 0:
            break
    return poly


def clip_polygon_to_square(P: Union[Polygon, np.ndarray], Q: AxisSquare) -> float:
    """Area of P ∩ Q; 0 when disjoint."""
    clipped = clip_polygon_to_square_vertices(P, Q)
    return max(0.0, shoelace(clipped)) if len(clipped) >= 3 else 0.0


def clip_polygon_convex(P: Union[Polygon, np.ndarray], C: np.ndarray) -> np.ndarray:
    """Clip P against a convex CCW window C; returns the clipped vertex loop (possibly empty)."""
    poly = P.vertices if isinstance(P, Polygon) else np.asarray(P, dtype=np.float64)
    window = np.asarray(C, dtype=np.float64)
    if shoelace(window) < 0.0:
        window = window[::-1]
    for c0, c1 in zip(window, np.roll(window, -1, axis=0)):
        d = c1 - c0
        normal = np.array([d[1], -d[0]])
        poly = _clip_halfplane(poly, normal, float(normal @ c0))
        if len(poly) == 0:
            break
    return poly


def intersection_area_convex(P: Union[Polygon, np.ndarray], C: np.ndarray) -> float:
    clipped = clip_polygon_convex(P, C)
    return max(0.0, shoelace(clipped)) if len(clipped) >= 3 else 0.0


# ── Square containment ────────────────────────────────────────
def square_inside_region(Q: AxisSquare, region, tol: Optional[Tolerance] = None) -> bool:
    """
    True iff all four corners of Q are Inside and the region boundary stays clear of Q.
    `region` is a Polygon or any object exposing classify(points, tol) and boundary_index.
    """
    tol = tol or Tolerance()
    if np.any(region.classify(Q.corners(), tol) != INSIDE):
        return False
    return region.boundary_index.distance_to_square(Q) > tol.eps


def square_outside_region(Q: AxisSquare, region, tol: Optional[Tolerance] = None) -> bool:
    """Mirror of square_inside_region: Q lies in the open complement of the region."""
    tol = tol or Tolerance()
    if np.any(region.classify(Q.corners(), tol) != OUTSIDE):
        return False
    return region.boundary_index.distance_to_square(Q) > tol.eps
