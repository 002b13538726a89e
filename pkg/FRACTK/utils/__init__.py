"""Utilities package init."""
from .chunker import chunk_ranges
from .log import configure_logging
from .sampling import make_rng, random_subset, strided_subset

__all__ = ["chunk_ranges", "configure_logging", "make_rng", "random_subset", "strided_subset"]
