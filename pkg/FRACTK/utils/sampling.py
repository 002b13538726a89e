"""
Utility: Deterministic sampling helpers.
Seeded generators named by bit-generator algorithm, evenly strided subsets,
and affine interior grids for convex pieces.
"""
from typing import Optional

import numpy as np

from config import settings


def make_rng(seed: Optional[int] = None, algorithm: Optional[str] = None) -> np.random.Generator:
    """Build a numpy Generator from a named bit generator (e.g. 'PCG64', 'Philox')."""
    name = algorithm or settings.rng_algorithm
    bit_generator_cls = getattr(np.random, name, None)
    if bit_generator_cls is None or not isinstance(bit_generator_cls, type) \
            or not issubclass(bit_generator_cls, np.random.BitGenerator):
        raise ValueError(f"unknown random bit generator {name!r}")
    return np.random.Generator(bit_generator_cls(settings.seed if seed is None else seed))


def strided_subset(count: int, limit: Optional[int]) -> np.ndarray:
    """Indices of at most `limit` items spread evenly over range(count), endpoints included."""
    if limit is None or limit >= count:
        return np.arange(count)
    if limit <= 0:
        return np.arange(0)
    return np.unique(np.linspace(0, count - 1, limit).round().astype(np.int64))


def random_subset(count: int, limit: Optional[int], rng: np.random.Generator) -> np.ndarray:
    """Sorted random indices without replacement; the whole range when limit >= count."""
    if limit is None or limit >= count:
        return np.arange(count)
    return np.sort(rng.choice(count, size=limit, replace=False))


def affine_grid(pieces: np.ndarray, divisions: Optional[int] = None) -> np.ndarray:
    """
    Sample points of convex pieces (K, m, 2) with m = 3 (triangles) or m = 4 (parallelograms).
    Returns every vertex plus a divisions × divisions interior grid per piece.
    Triangles use barycentric nodes, parallelograms use the bilinear map of the unit square.
    """
    pieces = np.asarray(pieces, dtype=np.float64)
    if pieces.size == 0:
        return np.empty((0, 2))
    n = settings.collar_grid if divisions is None else divisions
    if n < 1:
        raise ValueError(f"divisions must be >= 1, got {n}")
    t = (np.arange(n) + 0.5) / n
    u, v = np.meshgrid(t, t, indexing="ij")
    u, v = u.ravel(), v.ravel()
    m = pieces.shape[1]
    if m == 3:
        # fold the unit square onto the triangle u + v <= 1
        flip = u + v > 1.0
        u = np.where(flip, 1.0 - u, u)
        v = np.where(flip, 1.0 - v, v)
        a, b, c = pieces[:, 0], pieces[:, 1], pieces[:, 2]
        inner = a[:, None, :] + u[None, :, None] * (b - a)[:, None, :] + v[None, :, None] * (c - a)[:, None, :]
    elif m == 4:
        p0, p1, p3 = pieces[:, 0], pieces[:, 1], pieces[:, 3]
        inner = p0[:, None, :] + u[None, :, None] * (p1 - p0)[:, None, :] + v[None, :, None] * (p3 - p0)[:, None, :]
    else:
        raise ValueError(f"affine_grid supports triangles or parallelograms, got {m}-gons")
    return np.concatenate([pieces.reshape(-1, 2), inner.reshape(-1, 2)])
