"""
Geometry: Classical Snowflake
β-parametrized prefractals Γ_j^±, their collars Δ_j, the four-map IFS and the
closed-form measures and dimension.

Γ_j⁻ is generated one leg at a time over [(0,0),(1,0)] and the legs are placed by
a reflection and two rotations about the centroid of the base triangle, so the three
legs are exact copies of one another. Γ_j⁺ is Γ_j⁻ with an outward isosceles tent of
height ξ^j·√(ξ−¼) raised on every edge; the tents are the collar Δ_j.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from config import settings
from geometry.geom import Point, Polygon
from geometry.ifs import SimilarityMap, check_cap, rotation

logger = logging.getLogger(__name__)

_SQRT3 = math.sqrt(3.0)
BASE_TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.5 * _SQRT3]])
CENTROID = np.array([0.5, _SQRT3 / 6.0])


def xi_of_beta(beta: float) -> float:
    """Side-length ratio ξ = 1/(2(1+sin β)) for apex half-angle β ∈ (0, π/2)."""
    if not (0.0 < beta < math.pi / 2.0):
        raise ValueError(f"beta must lie in (0, pi/2), got {beta}")
    return 1.0 / (2.0 * (1.0 + math.sin(beta)))


def inradius_factor(beta: float) -> float:
    """ρ_β = sin β · tan(π/4 − β/2): inradius of a new triangle in units of its leg."""
    if not (0.0 < beta < math.pi / 2.0):
        raise ValueError(f"beta must lie in (0, pi/2), got {beta}")
    return math.sin(beta) * math.tan(math.pi / 4.0 - beta / 2.0)


@dataclass(frozen=True)
class ClassicalParams:
    beta: float

    def __post_init__(self):
        xi_of_beta(self.beta)

    @property
    def xi(self) -> float:
        return xi_of_beta(self.beta)

    @property
    def height(self) -> float:
        """√(ξ−¼), the bump height per unit parent edge (equals ξ cos β)."""
        return math.sqrt(self.xi - 0.25)

    @property
    def rho(self) -> float:
        return inradius_factor(self.beta)

    def _scalars(self):
        dtype = settings.float_dtype
        beta = dtype(self.beta)
        xi = dtype(1) / (dtype(2) * (dtype(1) + np.sin(beta)))
        return xi, np.sqrt(xi - dtype(0.25)), dtype


@dataclass(frozen=True)
class ClassicalLevel:
    j: int
    inner: Polygon
    outer: Polygon
    edge_length_inner: float
    edge_length_outer: float


# ── Edge refinement ───────────────────────────────────────────
def _bumps(a: np.ndarray, b: np.ndarray, xi, h, side: int):
    """
    For edges a→b: the base points a+ξd, b−ξd and the apex raised by |d|·h on the
    left (side=+1) or right (side=-1) of travel.
    """
    d = b - a
    normal = np.stack([-d[:, 1], d[:, 0]], axis=1) * side
    p1 = a + xi * d
    p2 = b - xi * d
    apex = 0.5 * (a + b) + h * normal
    return p1, apex, p2


def refine_open(points: np.ndarray, xi, h, side: int) -> tuple[np.ndarray, np.ndarray]:
    """One refinement of an open polyline; returns (new points, new triangles)."""
    a, b = points[:-1], points[1:]
    p1, apex, p2 = _bumps(a, b, xi, h, side)
    body = np.stack([a, p1, apex, p2], axis=1).reshape(-1, 2)
    return np.concatenate([body, points[-1:]]), _ccw_triangles(p1, apex, p2, side)


def refine_closed(loop: np.ndarray, xi, h, side: int) -> tuple[np.ndarray, np.ndarray]:
    """One refinement of a closed vertex loop; returns (new loop, new triangles)."""
    a, b = loop, np.roll(loop, -1, axis=0)
    p1, apex, p2 = _bumps(a, b, xi, h, side)
    return np.stack([a, p1, apex, p2], axis=1).reshape(-1, 2), _ccw_triangles(p1, apex, p2, side)


def _ccw_triangles(p1, apex, p2, side: int) -> np.ndarray:
    # apex on the right of p1→p2 gives a CCW triangle (p1, apex, p2)
    if side < 0:
        return np.stack([p1, apex, p2], axis=1)
    return np.stack([p1, p2, apex], axis=1)


# ── Prefractals ───────────────────────────────────────────────
def classical_leg(p: ClassicalParams, j: int) -> np.ndarray:
    """ψ^j(Λ) as a polyline of 4^j + 1 points from (0,0) to (1,0), bumps on the left (up)."""
    if j < 0:
        raise ValueError(f"level must be >= 0, got {j}")
    check_cap(3 * 4 ** j)
    xi, h, dtype = p._scalars()
    pts = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=dtype)
    for _ in range(j):
        pts, _ = refine_open(pts, xi, h, side=+1)
    return pts.astype(np.float64)


def _assemble_legs(leg: np.ndarray) -> np.ndarray:
    """Mirror the canonical leg onto the bottom edge and rotate it onto the other two sides."""
    bottom = leg * np.array([1.0, -1.0])
    parts = [bottom[:-1]]
    for k in (1, 2):
        r = rotation(2.0 * math.pi * k / 3.0)
        parts.append(((bottom - CENTROID) @ r.T + CENTROID)[:-1])
    loop = np.concatenate(parts)
    # pin the three base-triangle corners exactly
    n = len(bottom) - 1
    loop[0], loop[n], loop[2 * n] = BASE_TRIANGLE
    return loop


def inner_loop(p: ClassicalParams, j: int) -> np.ndarray:
    return _assemble_legs(classical_leg(p, j))


def _tents(loop: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Outward tents (right of travel on a CCW loop) on every edge: (outer loop, tent triangles)."""
    a, b = loop, np.roll(loop, -1, axis=0)
    d = b - a
    apex = 0.5 * (a + b) + h * np.stack([d[:, 1], -d[:, 0]], axis=1)
    outer = np.stack([a, apex], axis=1).reshape(-1, 2)
    return outer, np.stack([a, apex, b], axis=1)


def inner_prefractal(p: ClassicalParams, j: int) -> Polygon:
    """Γ_j⁻: 3·4^j edges of length ξ^j."""
    poly = Polygon(inner_loop(p, j))
    logger.debug("classical inner j=%d beta=%.6f: %d edges", j, p.beta, len(poly))
    return poly


def outer_prefractal(p: ClassicalParams, j: int) -> Polygon:
    """Γ_j⁺: 6·4^j edges of length ξ^{j+1/2}."""
    outer, _ = _tents(inner_loop(p, j), p.height)
    return Polygon(outer)


def classical_level(p: ClassicalParams, j: int) -> ClassicalLevel:
    loop = inner_loop(p, j)
    outer, _ = _tents(loop, p.height)
    return ClassicalLevel(
        j=j,
        inner=Polygon(loop),
        outer=Polygon(outer),
        edge_length_inner=p.xi ** j,
        edge_length_outer=p.xi ** (j + 0.5),
    )


def collar_pieces(p: ClassicalParams, j: int) -> np.ndarray:
    """The 3·4^j tent triangles whose union is Δ_j = Γ_j⁺ ∖ Γ_j⁻ (CCW, shape (K, 3, 2))."""
    _, tents = _tents(inner_loop(p, j), p.height)
    return tents


def new_inner_triangles(p: ClassicalParams, j: int) -> np.ndarray:
    """Triangles T⁻ added at level j ≥ 1: legs ξ^j, apex angle 2β, one per edge of Γ_{j-1}⁻."""
    if j < 1:
        raise ValueError("new inner triangles exist only for levels j >= 1")
    _, triangles = refine_closed(inner_loop(p, j - 1), p.xi, p.height, side=-1)
    return triangles


def carved_outer_triangles(p: ClassicalParams, j: int) -> np.ndarray:
    """Triangles T⁺ carved from Γ_{j-1}⁺ at level j ≥ 1: legs ξ^{j+1/2}, lying outside Γ_j⁺."""
    if j < 1:
        raise ValueError("carved outer triangles exist only for levels j >= 1")
    outer, _ = _tents(inner_loop(p, j - 1), p.height)
    _, triangles = refine_closed(outer, p.xi, p.height, side=+1)
    return triangles


def collar_area(p: ClassicalParams, j: int) -> float:
    """|Δ_j| = (3/2)(2ξ)^{2j}√(ξ−¼)."""
    if j < 0:
        raise ValueError(f"level must be >= 0, got {j}")
    return 1.5 * (2.0 * p.xi) ** (2 * j) * p.height


# ── IFS and dimension ─────────────────────────────────────────
def classical_ifs(p: ClassicalParams) -> list[SimilarityMap]:
    xi, beta = p.xi, p.beta
    return [
        SimilarityMap(xi, 0.0, Point(0.0, 0.0)),
        SimilarityMap(xi, math.pi / 2.0 - beta, Point(xi, 0.0)),
        SimilarityMap(xi, beta - math.pi / 2.0, Point(1.0 - xi - xi * math.sin(beta), xi * math.cos(beta))),
        SimilarityMap(xi, 0.0, Point(1.0 - xi, 0.0)),
    ]


def classical_open_set(p: ClassicalParams) -> np.ndarray:
    """The part of Δ₀ over [(0,0),(1,0)], turned to lie above the segment."""
    return np.array([[0.0, 0.0], [1.0, 0.0], [0.5, p.height]])


def classical_dimension(p: ClassicalParams) -> float:
    return -math.log(4.0) / math.log(p.xi)
