"""
Utility: Row chunker.
Splits large pairwise workloads into blocks that fit a fixed memory budget.
"""
from typing import Iterator, Optional

from config import settings


def chunk_ranges(total: int, width: int = 1, max_cells: Optional[int] = None) -> Iterator[slice]:
    """
    Yield slices over `total` rows so that rows × width stays below `max_cells`.
    `width` is the size of the second axis of the pairwise block (e.g. number of segments).
    Always yields at least one row per slice.
    """
    if total <= 0:
        return
    budget = settings.chunk_rows * 64 if max_cells is None else max_cells
    rows = max(1, budget // max(1, width))
    for start in range(0, total, rows):
        yield slice(start, min(total, start + rows))
