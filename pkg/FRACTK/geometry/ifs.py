"""
Geometry: Iterated Function Systems
Planar similarities point -> shift + R(angle)·(ratio·point), iteration of a finite
family on segment sets, and open-set-condition checks.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel

from config import settings
from geometry.geom import GeometryError, Point, as_segments, intersection_area_convex, shoelace

logger = logging.getLogger(__name__)


class CapacityError(ValueError):
    """Raised when a construction would exceed the configured output cap."""


def rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class SimilarityMap:
    ratio: float
    angle: float
    shift: Point

    def __post_init__(self):
        if not (0.0 < self.ratio < 1.0):
            raise ValueError(f"similarity ratio must lie in (0, 1), got {self.ratio}")

    @property
    def matrix(self) -> np.ndarray:
        return self.ratio * rotation(self.angle)

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.matrix.T + self.shift.as_array()

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.apply(points)

    def compose(self, inner: "SimilarityMap") -> "SimilarityMap":
        """self ∘ inner."""
        shift = self.apply(inner.shift.as_array())
        return SimilarityMap(self.ratio * inner.ratio, self.angle + inner.angle, Point.of(shift))


def check_cap(count: int, cap: Optional[int] = None, what: str = "segments") -> None:
    limit = settings.max_segments if cap is None else cap
    if count > limit:
        raise CapacityError(f"{what}: {count} exceeds the configured cap of {limit} (FRACTK_MAX_SEGMENTS)")


def ifs_iterate(maps: Sequence[SimilarityMap], seed, j: int, cap: Optional[int] = None) -> np.ndarray:
    """
    Apply ψ(S) = ∪ᵢ ψᵢ(S) j times to a segment set.
    Output is ordered by map index at the outermost level, so a seed polyline from
    (0,0) to (1,0) comes back as a connected polyline in traversal order.
    """
    if j < 0:
        raise ValueError(f"iteration count must be >= 0, got {j}")
    segs = as_segments(seed)
    check_cap(len(segs) * len(maps) ** j, cap)
    for _ in range(j):
        flat = segs.reshape(-1, 2)
        segs = np.concatenate([m.apply(flat).reshape(-1, 2, 2) for m in maps])
    logger.debug("ifs_iterate: %d maps, j=%d -> %d segments", len(maps), j, len(segs))
    return segs


def similarity_dimension(maps: Sequence[SimilarityMap]) -> float:
    """Solution d of Σ ratio^d = 1; closed form log N / -log r for equal ratios."""
    ratios = {round(m.ratio, 15) for m in maps}
    if len(ratios) != 1:
        raise ValueError("similarity_dimension supports families with a common ratio")
    return math.log(len(maps)) / -math.log(maps[0].ratio)


class OpenSetReport(BaseModel):
    max_overlap_area: float
    contained: bool
    satisfied: bool
    images: int


def open_set_condition(maps: Sequence[SimilarityMap], open_set: np.ndarray, eps: Optional[float] = None,
                       overlap_tol: float = 1e-12) -> OpenSetReport:
    """
    Check a convex candidate O: images ψᵢ(O) pairwise overlap in area < overlap_tol and
    every image vertex lies in the closure of O.
    """
    eps = settings.eps if eps is None else eps
    window = np.asarray(open_set, dtype=np.float64)
    if len(window) < 3 or shoelace(window) == 0.0:
        raise GeometryError("open set candidate must be a non-degenerate convex polygon")
    if shoelace(window) < 0.0:
        window = window[::-1]
    images = [m.apply(window) for m in maps]
    worst = 0.0
    for i in range(len(images)):
        for k in range(i + 1, len(images)):
            worst = max(worst, intersection_area_convex(images[i], images[k]))
    contained = True
    for img in images:
        for c0, c1 in zip(window, np.roll(window, -1, axis=0)):
            d = c1 - c0
            side = d[0] * (img[:, 1] - c0[1]) - d[1] * (img[:, 0] - c0[0])
            if np.any(side < -eps * max(1.0, float(np.linalg.norm(d)))):
                contained = False
    return OpenSetReport(
        max_overlap_area=worst,
        contained=contained,
        satisfied=contained and worst < overlap_tol,
        images=len(images),
    )
