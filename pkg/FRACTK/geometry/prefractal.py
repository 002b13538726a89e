"""
Geometry: Prefractal Pairs
The nested pair (Γ_j⁻, Γ_j⁺) of one family at one level, with its collar pieces,
witness supports and the constants of the general thickness theorem.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator
from scipy.spatial import cKDTree

from geometry.classical import (
    ClassicalParams, carved_outer_triangles, classical_level, collar_pieces, new_inner_triangles,
)
from geometry.geom import GeometryError, Polygon
from geometry.square import QuarterComplex, SquareLevel, inner_outer, square_prefractal, tilted_vertices

logger = logging.getLogger(__name__)

FAMILIES = ("classical", "square")
Region = Union[Polygon, QuarterComplex]


class ThicknessConstants(BaseModel):
    """c and c₁^±…c₄^±: collar reach, witness side bounds, boundary gap and reach."""
    c: float = Field(gt=0.0)
    c1m: float = Field(gt=0.0)
    c2m: float = Field(gt=0.0)
    c3m: float = Field(gt=0.0)
    c4m: float = Field(gt=0.0)
    c1p: float = Field(gt=0.0)
    c2p: float = Field(gt=0.0)
    c3p: float = Field(gt=0.0)
    c4p: float = Field(gt=0.0)
    j_star: int = Field(default=1, ge=0)

    @field_validator("c2m", "c2p")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("side bounds must be finite")
        return v

    def side(self, which: str) -> tuple[float, float, float, float]:
        """(c1, c2, c3, c4) for 'inner' or 'outer'."""
        if which == "inner":
            return self.c1m, self.c2m, self.c3m, self.c4m
        if which == "outer":
            return self.c1p, self.c2p, self.c3p, self.c4p
        raise ValueError(f"side must be 'inner' or 'outer', got {which!r}")

    def rescaled(self, lower: float, upper: float) -> "ThicknessConstants":
        """Lower bounds (c1, c3) times `lower`, upper bounds (c, c2, c4) times `upper`."""
        return ThicknessConstants(
            c=self.c * upper,
            c1m=self.c1m * lower, c2m=self.c2m * upper, c3m=self.c3m * lower, c4m=self.c4m * upper,
            c1p=self.c1p * lower, c2p=self.c2p * upper, c3p=self.c3p * lower, c4p=self.c4p * upper,
            j_star=self.j_star,
        )


def classical_constants(p: ClassicalParams) -> ThicknessConstants:
    rho, root = p.rho, math.sqrt(p.xi)
    inner = (rho / math.sqrt(2.0), rho / math.sqrt(2.0), rho / 2.0, 2.0)
    return ThicknessConstants(
        c=0.5,
        c1m=inner[0], c2m=inner[1], c3m=inner[2], c4m=inner[3],
        c1p=root * inner[0], c2p=root * inner[1], c3p=root * inner[2], c4p=root * inner[3],
    )


def square_constants() -> ThicknessConstants:
    side, gap, reach = 0.25, 1.0 / (4.0 * math.sqrt(2.0)), 0.375
    return ThicknessConstants(
        c=1.0,
        c1m=side, c2m=side, c3m=gap, c4m=reach,
        c1p=side, c2p=side, c3p=gap, c4p=reach,
    )


# ── Witness supports ──────────────────────────────────────────
def incenters(triangles: np.ndarray) -> np.ndarray:
    a, b, c = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    la = np.linalg.norm(b - c, axis=1)
    lb = np.linalg.norm(c - a, axis=1)
    lc = np.linalg.norm(a - b, axis=1)
    return (la[:, None] * a + lb[:, None] * b + lc[:, None] * c) / (la + lb + lc)[:, None]


def _ordered(centers: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Centers sorted by distance to x, ties broken lexicographically."""
    d = np.linalg.norm(centers - x, axis=1)
    return centers[np.lexsort((centers[:, 1], centers[:, 0], np.round(d, 12)))]


class TriangleWitnesses:
    """Axis squares of a fixed side centred at the incentres of a triangle family."""

    def __init__(self, triangles: np.ndarray, side: float):
        self.triangles = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 2)
        self.side = side
        self.centers = incenters(self.triangles) if len(self.triangles) else np.empty((0, 2))
        self._tree = cKDTree(self.centers) if len(self.centers) else None

    def candidates(self, x: np.ndarray, radius: float) -> np.ndarray:
        if self._tree is None:
            return np.empty((0, 2))
        found = self._tree.query_ball_point(np.asarray(x, dtype=np.float64), radius)
        return _ordered(self.centers[sorted(found)], x)

    def translated(self, dx: float, dy: float) -> "TriangleWitnesses":
        return TriangleWitnesses(self.triangles + np.array([dx, dy]), self.side)


class DiamondWitnesses:
    """
    Axis squares of side ℓ_j/4 centred at midpoints of grid edges whose two cells are
    both in Γ_j (inside=True) or both outside it (inside=False).
    """

    def __init__(self, level: SquareLevel, inside: bool, shift: Optional[np.ndarray] = None):
        self.raster = level.raster
        self.origin = np.asarray(level.origin, dtype=np.int64) + (0 if shift is None else shift)
        self.resolution = level.resolution
        self.inside = inside
        self.side = 0.25 * self.resolution
        self._level = level

    def _cell(self, i: np.ndarray, k: np.ndarray) -> np.ndarray:
        ii, kk = i - self.origin[0], k - self.origin[1]
        width, height = self.raster.shape
        ok = (ii >= 0) & (ii < width) & (kk >= 0) & (kk < height)
        out = np.zeros(i.shape, dtype=bool)
        out[ok] = self.raster[ii[ok], kk[ok]]
        return out

    def candidates(self, x: np.ndarray, radius: float) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        u = x / self.resolution
        reach = radius / self.resolution
        i, k = np.meshgrid(
            np.arange(math.floor(u[0] - reach) - 1, math.ceil(u[0] + reach) + 2),
            np.arange(math.floor(u[1] - reach) - 1, math.ceil(u[1] + reach) + 2),
            indexing="ij",
        )
        i, k = i.ravel(), k.ravel()
        here = self._cell(i, k)
        west = self._cell(i - 1, k)
        south = self._cell(i, k - 1)
        if self.inside:
            vertical, horizontal = here & west, here & south
        else:
            vertical, horizontal = ~here & ~west, ~here & ~south
        mids = np.concatenate([
            np.stack([i[vertical], k[vertical] + 0.5], axis=1),
            np.stack([i[horizontal] + 0.5, k[horizontal]], axis=1),
        ]) * self.resolution
        if len(mids) == 0:
            return mids
        near = np.linalg.norm(mids - x, axis=1) <= radius
        return _ordered(mids[near], x)

    def translated(self, dx: float, dy: float) -> "DiamondWitnesses":
        steps = np.round(np.array([dx, dy]) / self.resolution)
        if np.any(np.abs(np.array([dx, dy]) / self.resolution - steps) > 1e-9):
            raise GeometryError("square snowflake pairs translate only by multiples of the grid pitch")
        return DiamondWitnesses(self._level, self.inside, self.origin - self._level.origin + steps.astype(np.int64))


WitnessSource = Union[TriangleWitnesses, DiamondWitnesses]


# ── Pair ──────────────────────────────────────────────────────
@dataclass
class PrefractalPair:
    family: str
    j: int
    xi: float
    inner: Region
    outer: Region
    collar: np.ndarray
    constants: ThicknessConstants
    inner_witnesses: WitnessSource
    outer_witnesses: WitnessSource
    params: dict = field(default_factory=dict)

    @property
    def scale(self) -> float:
        return self.xi ** self.j

    def region(self, which: str) -> Region:
        if which == "inner":
            return self.inner
        if which == "outer":
            return self.outer
        raise ValueError(f"region must be 'inner' or 'outer', got {which!r}")

    def witnesses(self, which: str) -> WitnessSource:
        return self.inner_witnesses if which == "inner" else self.outer_witnesses

    def boundary_points(self, which: str) -> np.ndarray:
        """Vertices and edge midpoints of ∂Γ_j^± in a stable order."""
        seg = self.region(which).boundary_index.segments
        pts = np.concatenate([seg[:, 0], 0.5 * (seg[:, 0] + seg[:, 1])])
        return np.unique(np.round(pts, 12), axis=0)

    def translated(self, dx: float, dy: float) -> "PrefractalPair":
        shift = np.array([dx, dy])
        if isinstance(self.inner, Polygon):
            inner = self.inner.transformed(np.eye(2), shift)
            outer = self.outer.transformed(np.eye(2), shift)
        else:
            inner, outer = self.inner.translated(dx, dy), self.outer.translated(dx, dy)
        return replace(
            self,
            inner=inner,
            outer=outer,
            collar=self.collar + shift,
            inner_witnesses=self.inner_witnesses.translated(dx, dy),
            outer_witnesses=self.outer_witnesses.translated(dx, dy),
        )


def classical_pair(p: ClassicalParams, j: int) -> PrefractalPair:
    level = classical_level(p, j)
    constants = classical_constants(p)
    scale = p.xi ** j
    if j >= 1:
        inner_tris = new_inner_triangles(p, j)
        outer_tris = carved_outer_triangles(p, j)
        logger.debug("classical pair j=%d: %d new inner, %d carved outer triangles", j, len(inner_tris), len(outer_tris))
    else:
        inner_tris = outer_tris = np.empty((0, 3, 2))
    return PrefractalPair(
        family="classical",
        j=j,
        xi=p.xi,
        inner=level.inner,
        outer=level.outer,
        collar=collar_pieces(p, j),
        constants=constants,
        inner_witnesses=TriangleWitnesses(inner_tris, constants.c1m * scale),
        outer_witnesses=TriangleWitnesses(outer_tris, constants.c1p * scale),
        params={"beta": p.beta},
    )


def square_pair(j: int) -> PrefractalPair:
    if j < 1:
        raise ValueError("square snowflake pairs need j >= 1 (the level-0 inner region is empty)")
    level = square_prefractal(j)
    inner, outer = inner_outer(j, level)
    logger.debug("square pair j=%d: %d inner, %d outer quarters", j, inner.quarter_count, outer.quarter_count)
    return PrefractalPair(
        family="square",
        j=j,
        xi=0.25,
        inner=inner,
        outer=outer,
        collar=tilted_vertices(level.edges),
        constants=square_constants(),
        inner_witnesses=DiamondWitnesses(level, inside=True),
        outer_witnesses=DiamondWitnesses(level, inside=False),
    )


def build_pair(family: str, j: int, beta: Optional[float] = None) -> PrefractalPair:
    if family == "classical":
        if beta is None:
            raise ValueError("the classical family needs --beta")
        return classical_pair(ClassicalParams(beta), j)
    if family == "square":
        return square_pair(j)
    raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
