"""
Analysis: Thickness Certification
Finite-scale checks of the collar condition and the inner/exterior cube conditions for a
prefractal pair, E/I-thickness witnesses that follow the proof of the general theorem,
the ball condition and interior regularity.

Every cube witness is reported with its realized ratios (distances divided by ξ^j) next
to the bounds they were checked against, so a report can be re-validated from raw geometry.
"""
import logging
import math
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from config import settings
from geometry.geom import (
    INSIDE, OUTSIDE, AxisSquare, Disc, Point, SegmentIndex, SegmentsLike, Tolerance,
    dist_point_square, dist_square_square, square_inside_region, square_outside_region,
)
from geometry.prefractal import PrefractalPair, ThicknessConstants
from utils.sampling import affine_grid, strided_subset

logger = logging.getLogger(__name__)

REL_TOL = 1e-9
_ABS_TOL = 1e-12
_CONSTRUCTED_TRIES = 8
_GRID_TRIES = 64

Bound = tuple[Optional[float], Optional[float]]


def within(value: float, bound: Bound) -> bool:
    lo, hi = bound
    if lo is not None and value < lo - REL_TOL * abs(lo) - _ABS_TOL:
        return False
    if hi is not None and value > hi + REL_TOL * abs(hi) + _ABS_TOL:
        return False
    return True


def realized_within(realized: dict, bounds: dict, flags: Optional[dict] = None) -> bool:
    if flags and not all(flags.values()):
        return False
    return all(name in realized and within(realized[name], b) for name, b in bounds.items())


class WitnessReport(BaseModel):
    kind: str
    query: dict
    witness: Optional[dict] = None
    realized: dict[str, float] = Field(default_factory=dict)
    bounds: dict[str, tuple[Optional[float], Optional[float]]] = Field(default_factory=dict)
    flags: dict[str, bool] = Field(default_factory=dict)
    satisfied: bool = False
    method: str = "construction"
    reason: str = ""

    @model_validator(mode="after")
    def _satisfied_means_in_bounds(self):
        if self.satisfied and not realized_within(self.realized, self.bounds, self.flags):
            raise ValueError("a satisfied report must have every realized ratio inside its bound")
        return self


class CollarReport(BaseModel):
    level: int
    c: float
    points: int
    max_inner_ratio: float
    max_outer_ratio: float
    satisfied: bool


class ScanReport(BaseModel):
    kind: str
    level: int
    profile: str = "proof"
    checked: int
    satisfied_count: int
    failures: list[list[float]] = Field(default_factory=list)
    worst: dict[str, float] = Field(default_factory=dict)
    satisfied: bool


class StabilityReport(BaseModel):
    min_ratio_j: float
    min_ratio_next: float
    margin: float


def _xy(x: Union[Point, Sequence[float], np.ndarray]) -> np.ndarray:
    if isinstance(x, Point):
        return x.as_array()
    return np.asarray(x, dtype=np.float64).reshape(2)


def cube_bounds(c1: float, c2: float, c3: float, c4: float) -> dict[str, Bound]:
    return {"side": (c1, c2), "boundary_gap": (c3, None), "reach": (None, c4)}


def _evaluate(Q: AxisSquare, x: np.ndarray, region, index: SegmentIndex, scale: float,
              exterior: bool, tol: Tolerance) -> tuple[dict, dict]:
    contained = square_outside_region(Q, region, tol) if exterior else square_inside_region(Q, region, tol)
    realized = {
        "side": Q.side / scale,
        "boundary_gap": index.distance_to_square(Q) / scale,
        "reach": float(dist_point_square(x, Q)[0]) / scale,
    }
    return realized, {"contained": bool(contained)}


# ── Collar condition ──────────────────────────────────────────
def check_cond1(pair: PrefractalPair, xi: Optional[float] = None, c: Optional[float] = None,
                samples: Optional[int] = None, divisions: Optional[int] = None) -> CollarReport:
    """Every sampled x ∈ Δ_j has dist(x, ∂Γ_j^±) ≤ cξ^j."""
    if len(pair.collar) == 0:
        raise ValueError("collar is empty")
    if samples is not None and samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    pieces = pair.collar[strided_subset(len(pair.collar), samples)]
    points = affine_grid(pieces, divisions)
    scale = (pair.xi if xi is None else xi) ** pair.j
    c = pair.constants.c if c is None else c
    inner = float(pair.inner.boundary_index.distances(points).max()) / scale
    outer = float(pair.outer.boundary_index.distances(points).max()) / scale
    satisfied = within(inner, (None, c)) and within(outer, (None, c))
    logger.info("cond1 %s j=%d: %d points, max ratios %.4f / %.4f", pair.family, pair.j, len(points), inner, outer)
    return CollarReport(level=pair.j, c=c, points=len(points), max_inner_ratio=inner,
                        max_outer_ratio=outer, satisfied=satisfied)


# ── Cube witnesses ────────────────────────────────────────────
def _grid_search(x: np.ndarray, region, index: SegmentIndex, scale: float, bounds4: tuple, exterior: bool,
                 tol: Tolerance) -> Optional[tuple[AxisSquare, dict, dict]]:
    """Lattice of pitch ξ^j/L within c4·ξ^j of x, nearest centres first, a few side candidates."""
    c1, c2, c3, c4 = bounds4
    step = scale / settings.witness_lattice
    n = int(math.ceil(c4 * settings.witness_lattice))
    offsets = np.arange(-n, n + 1) * step
    gx, gy = np.meshgrid(x[0] + offsets, x[1] + offsets, indexing="ij")
    centers = np.stack([gx.ravel(), gy.ravel()], axis=1)
    d = np.linalg.norm(centers - x, axis=1)
    order = np.lexsort((centers[:, 1], centers[:, 0], np.round(d, 12)))
    centers, d = centers[order], d[order]
    codes = region.classify(centers, tol)
    center_gap = index.distances(centers)
    want = OUTSIDE if exterior else INSIDE
    bounds = cube_bounds(*bounds4)
    for side in np.unique(np.linspace(c1, c2, settings.witness_sides)) * scale:
        half_diag = side / math.sqrt(2.0)
        ok = (codes == want) & (center_gap - half_diag >= c3 * scale) & (d - half_diag <= c4 * scale)
        for center in centers[ok][:_GRID_TRIES]:
            Q = AxisSquare.centered(center, side)
            realized, flags = _evaluate(Q, x, region, index, scale, exterior, tol)
            if realized_within(realized, bounds, flags):
                return Q, realized, flags
    return None


def _cube_witness(x, pair: PrefractalPair, which: str, constants: Optional[ThicknessConstants],
                  fallback: bool) -> tuple[WitnessReport, Optional[AxisSquare]]:
    constants = constants or pair.constants
    bounds4 = constants.side(which)
    region = pair.region(which)
    index = region.boundary_index
    scale = pair.scale
    tol = Tolerance()
    x = _xy(x)
    offset = float(index.distances(x)[0])
    if offset > tol.eps:
        raise ValueError(f"query point must lie on the level-{pair.j} {which} boundary (distance {offset:.3g})")
    exterior = which == "outer"
    kind = "exterior_cube" if exterior else "inner_cube"
    bounds = cube_bounds(*bounds4)
    query = {"point": x.tolist(), "level": pair.j, "family": pair.family}

    source = pair.witnesses(which)
    first = None
    for center in source.candidates(x, bounds4[3] * scale + source.side)[:_CONSTRUCTED_TRIES]:
        Q = AxisSquare.centered(center, source.side)
        realized, flags = _evaluate(Q, x, region, index, scale, exterior, tol)
        if realized_within(realized, bounds, flags):
            return WitnessReport(kind=kind, query=query, witness=Q.to_json(), realized=realized, bounds=bounds,
                                 flags=flags, satisfied=True), Q
        first = first or (Q, realized, flags)

    if fallback:
        logger.warning("%s witness at %s: construction failed, searching the lattice", kind, x.tolist())
        found = _grid_search(x, region, index, scale, bounds4, exterior, tol)
        if found is not None:
            Q, realized, flags = found
            return WitnessReport(kind=kind, query=query, witness=Q.to_json(), realized=realized, bounds=bounds,
                                 flags=flags, satisfied=True, method="grid"), Q
    Q, realized, flags = first if first else (None, {}, {})
    return WitnessReport(
        kind=kind, query=query, witness=Q.to_json() if Q else None, realized=realized, bounds=bounds, flags=flags,
        satisfied=False, method="grid" if fallback else "construction",
        reason="no cube satisfied the bounds within the search budget",
    ), None


def inner_cube_witness(x_minus, pair: PrefractalPair, constants: Optional[ThicknessConstants] = None,
                       fallback: bool = True) -> WitnessReport:
    """A cube Qⁱ ⊂ Γ_j⁻ near x⁻ ∈ ∂Γ_j⁻ with c₁⁻ ≤ l/ξ^j ≤ c₂⁻ and c₃⁻ ≤ dist(Qⁱ,∂)/ξ^j ≤ dist(Qⁱ,x⁻)/ξ^j ≤ c₄⁻."""
    return _cube_witness(x_minus, pair, "inner", constants, fallback)[0]


def exterior_cube_witness(x_plus, pair: PrefractalPair, constants: Optional[ThicknessConstants] = None,
                          fallback: bool = True) -> WitnessReport:
    return _cube_witness(x_plus, pair, "outer", constants, fallback)[0]


def _scan(pair: PrefractalPair, which: str, samples: Optional[int], constants: Optional[ThicknessConstants],
          profile: str) -> ScanReport:
    points = pair.boundary_points(which)
    points = points[strided_subset(len(points), samples)]
    reports = [_cube_witness(p, pair, which, constants, fallback=True)[0] for p in points]
    good = [r for r in reports if r.satisfied]
    worst = {}
    if good:
        worst = {
            "min_side": min(r.realized["side"] for r in good),
            "max_side": max(r.realized["side"] for r in good),
            "min_boundary_gap": min(r.realized["boundary_gap"] for r in good),
            "max_reach": max(r.realized["reach"] for r in good),
        }
    kind = "cond3" if which == "outer" else "cond2"
    logger.info("%s %s j=%d profile=%s: %d/%d satisfied", kind, pair.family, pair.j, profile, len(good), len(reports))
    return ScanReport(
        kind=kind, level=pair.j, profile=profile, checked=len(reports), satisfied_count=len(good),
        failures=[r.query["point"] for r in reports if not r.satisfied], worst=worst,
        satisfied=len(good) == len(reports),
    )


def check_cond2(pair: PrefractalPair, samples: Optional[int] = None,
                constants: Optional[ThicknessConstants] = None, profile: str = "proof") -> ScanReport:
    """inner_cube_witness over vertices and edge midpoints of ∂Γ_j⁻."""
    return _scan(pair, "inner", samples, constants, profile)


def check_cond3(pair: PrefractalPair, samples: Optional[int] = None,
                constants: Optional[ThicknessConstants] = None, profile: str = "proof") -> ScanReport:
    return _scan(pair, "outer", samples, constants, profile)


def constant_profiles(constants: ThicknessConstants) -> dict[str, ThicknessConstants]:
    """Proof values, a looser profile (lower bounds ×½, upper ×2) and a tighter one (lower ×2, upper ×½)."""
    return {
        "proof": constants,
        "loose": constants.rescaled(0.5, 2.0),
        "tight": constants.rescaled(2.0, 0.5),
    }


# ── E/I-thickness ─────────────────────────────────────────────
def _nearest_vertex(index: SegmentIndex, Q: AxisSquare) -> np.ndarray:
    upper = float(index.distances(Q.center)[0])
    cand = index.candidates_near(Q.center, upper + Q.side)
    vertices = index.segments[cand].reshape(-1, 2)
    d = dist_point_square(vertices, Q)
    order = np.lexsort((vertices[:, 1], vertices[:, 0], np.round(d, 12)))
    return vertices[order[0]]


def _thick_witness(fine: PrefractalPair, pair: PrefractalPair, cube: AxisSquare, exterior_query: bool,
                   query_bounds: Optional[tuple], constants: Optional[ThicknessConstants]) -> WitnessReport:
    if fine.family != pair.family or fine.j < pair.j:
        raise ValueError("the stand-in pair must be the same family at a level >= j")
    constants = constants or pair.constants
    tol = Tolerance()
    scale = pair.scale
    # the query cube lives on one side of the limit boundary, the answer on the other
    query_side, answer_side = ("outer", "inner") if exterior_query else ("inner", "outer")
    c1, c2, c3, c4 = query_bounds or constants.side(query_side)
    query_region = fine.region(query_side)
    query_index = query_region.boundary_index
    if exterior_query:
        placed = square_outside_region(cube, query_region, tol)
    else:
        placed = square_inside_region(cube, query_region, tol)
    side_ratio = cube.side / scale
    gap_ratio = query_index.distance_to_square(cube) / scale
    if not placed:
        raise ValueError(f"query cube is not an {'exterior' if exterior_query else 'interior'} cube at level {fine.j}")
    if not (within(side_ratio, (c1, c2)) and within(gap_ratio, (c3, c4))):
        raise ValueError(
            f"query cube violates its scale-{pair.j} bounds: side {side_ratio:.4g} vs [{c1:.4g}, {c2:.4g}], "
            f"gap {gap_ratio:.4g} vs [{c3:.4g}, {c4:.4g}]"
        )

    x = _nearest_vertex(query_index, cube)
    jump, _, foot = pair.region(answer_side).boundary_index.nearest(x)
    report, answer = _cube_witness(foot[0], pair, answer_side, constants, fallback=True)
    a1, a2, a3, a4 = constants.side(answer_side)
    bounds = {
        "side": (a1, a2),
        "boundary_gap": (a3, None),
        "separation": (None, c4 + constants.c + a4),
        "jump": (None, constants.c),
    }
    kind = "ithick" if exterior_query else "ethick"
    query = {"cube": cube.to_json(), "level": pair.j, "stand_in_level": fine.j, "boundary_point": x.tolist()}
    if answer is None:
        return WitnessReport(kind=kind, query=query, bounds=bounds, satisfied=False,
                             reason=f"no {answer_side} cube witness near {foot[0].tolist()}: {report.reason}")
    # distances to the limit boundary are bounded below by distances to the stand-in level's boundary
    gap = fine.region(answer_side).boundary_index.distance_to_square(answer) / scale
    separation = dist_square_square(cube, answer) / scale
    realized = {"side": answer.side / scale, "boundary_gap": gap, "separation": separation,
                "jump": float(jump[0]) / scale}
    flags = {"contained": report.flags.get("contained", False), "ordered": gap <= separation + REL_TOL}
    satisfied = realized_within(realized, bounds, flags)
    return WitnessReport(kind=kind, query=query, witness=answer.to_json(), realized=realized, bounds=bounds,
                         flags=flags, satisfied=satisfied, method=report.method,
                         reason="" if satisfied else "realized ratios outside the derived bounds")


def ethick_witness(fine: PrefractalPair, pair: PrefractalPair, Q_i: AxisSquare,
                   query_bounds: Optional[tuple] = None,
                   constants: Optional[ThicknessConstants] = None) -> WitnessReport:
    """
    Exterior cube Qᵉ for an interior cube Qⁱ of the limit domain, level-`fine.j` prefractals
    standing in for the limit: nearest boundary point x, jump to x⁺ ∈ ∂Γ_j⁺, exterior witness at x⁺.
    Bounds c₅..c₈ = c₁⁺, c₂⁺, c₃⁺, c₄ + c + c₄⁺.
    """
    return _thick_witness(fine, pair, Q_i, False, query_bounds, constants)


def ithick_witness(fine: PrefractalPair, pair: PrefractalPair, Q_e: AxisSquare,
                   query_bounds: Optional[tuple] = None,
                   constants: Optional[ThicknessConstants] = None) -> WitnessReport:
    return _thick_witness(fine, pair, Q_e, True, query_bounds, constants)


# ── Ball condition ────────────────────────────────────────────
def _top(points: np.ndarray, values: np.ndarray, keep: int) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((points[:, 1], points[:, 0], -np.round(values, 14)))[:keep]
    return points[order], values[order]


def ball_condition_witness(boundary: Union[SegmentIndex, SegmentsLike], x, r: float,
                           depth: Optional[int] = None, keep: int = 4) -> WitnessReport:
    """
    Largest η on a dyadic grid in B(x, r) with B(y, ηr) ⊂ B(x, r) and dist(B(y, ηr), S) ≥ ηr,
    i.e. η(y) = min(r − |y − x|, dist(y, S)/2)/r. Grids refine around the best `keep` nodes.
    """
    if not (0.0 < r <= 1.0):
        raise ValueError(f"radius must lie in (0, 1], got {r}")
    index = boundary if isinstance(boundary, SegmentIndex) else SegmentIndex(boundary)
    x = _xy(x)
    offset = float(index.distances(x)[0])
    if offset > settings.eps:
        raise ValueError(f"ball center must lie on the boundary (distance {offset:.3g})")
    depth = settings.ball_depth if depth is None else depth

    def eta(points: np.ndarray) -> np.ndarray:
        return np.minimum(r - np.linalg.norm(points - x, axis=1), 0.5 * index.distances(points)) / r

    ticks = np.arange(-4, 5) * (r / 4.0)
    gx, gy = np.meshgrid(x[0] + ticks, x[1] + ticks, indexing="ij")
    best_pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    best_pts, best_vals = _top(best_pts, eta(best_pts), keep)
    local = np.arange(-2, 3)
    lx, ly = np.meshgrid(local, local, indexing="ij")
    stencil = np.stack([lx.ravel(), ly.ravel()], axis=1).astype(np.float64)
    for level in range(3, depth + 1):
        step = r / 2.0 ** level
        pts = np.unique((best_pts[:, None, :] + stencil[None] * step).reshape(-1, 2), axis=0)
        pts, vals = _top(pts, eta(pts), keep)
        merged = np.concatenate([best_pts, pts])
        best_pts, best_vals = _top(merged, np.concatenate([best_vals, vals]), keep)

    value = max(0.0, float(best_vals[0]))
    witness = Disc(Point.of(best_pts[0]), value * r).to_json() if value > 0.0 else None
    return WitnessReport(
        kind="ball", query={"point": x.tolist(), "radius": r}, witness=witness, realized={"eta": value},
        bounds={"eta": (_ABS_TOL, None)}, satisfied=value > _ABS_TOL, method="dyadic",
        reason="" if value > _ABS_TOL else "no admissible ball on the search grid",
    )


def ball_condition_scan(boundary: Union[SegmentIndex, SegmentsLike], points: np.ndarray,
                        radii: Sequence[float]) -> float:
    """Minimum η over all (x, r) pairs."""
    index = boundary if isinstance(boundary, SegmentIndex) else SegmentIndex(boundary)
    etas = [ball_condition_witness(index, p, r).realized["eta"] for p in np.atleast_2d(points) for r in radii]
    return min(etas) if etas else 0.0


# ── Interior regularity ───────────────────────────────────────
def interior_regularity_scan(region, points: np.ndarray, sides: Sequence[float]) -> float:
    """min over samples x and sides ℓ of |Ω ∩ Q(x, ℓ/2)| / ℓ²."""
    sides = [float(s) for s in sides]
    if not sides or any(not (0.0 < s <= 1.0) for s in sides):
        raise ValueError(f"sides must lie in (0, 1], got {sides}")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    best = math.inf
    for p in pts:
        for s in sides:
            best = min(best, region.area_in_square(AxisSquare.centered(p, s)) / (s * s))
    logger.info("interior regularity: %d points x %d sides, min ratio %.4f", len(pts), len(sides), best)
    return best


def interior_regularity_stability(region_j, region_next, points: np.ndarray,
                                  sides: Sequence[float]) -> StabilityReport:
    """Minimum ratios at two consecutive levels and their relative difference."""
    a = interior_regularity_scan(region_j, points, sides)
    b = interior_regularity_scan(region_next, points, sides)
    margin = abs(a - b) / max(a, b) if max(a, b) > 0.0 else 0.0
    return StabilityReport(min_ratio_j=a, min_ratio_next=b, margin=margin)


def certify_profiles(pair: PrefractalPair, samples: Optional[int] = None) -> dict[str, dict]:
    """Conditions (collar, inner cube, exterior cube) under every constant profile."""
    out = {}
    for name, constants in constant_profiles(pair.constants).items():
        out[name] = {
            "cond1": check_cond1(pair, c=constants.c, samples=samples).model_dump(),
            "cond2": check_cond2(pair, samples, constants, name).model_dump(),
            "cond3": check_cond3(pair, samples, constants, name).model_dump(),
        }
    return out
