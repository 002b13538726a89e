"""Geometry package init."""
from .geom import AxisSquare, GeometryError, Point, Polygon, Segment, SegmentIndex
from .prefractal import PrefractalPair, build_pair

__all__ = ["AxisSquare", "GeometryError", "Point", "Polygon", "Segment", "SegmentIndex", "PrefractalPair", "build_pair"]
