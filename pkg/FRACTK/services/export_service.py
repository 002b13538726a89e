"""
Service: Export Service
Writes run artifacts: JSON reports, CSV series and SVG figures of prefractal geometry.
SVG: xml.etree | CSV: csv | JSON: json with numpy-aware encoding
"""
import csv
import io
import json
import logging
import sys
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from geometry.geom import Polygon, as_segments
from geometry.square import QuarterComplex

logger = logging.getLogger(__name__)

SVG_NS = "http://www.w3.org/2000/svg"
MARGIN = 0.05
ACCENT = "#6366f1"
DARK = "#1e1b4b"

Drawable = Union[Polygon, QuarterComplex, np.ndarray]


class ExportError(OSError):
    """Writing an artifact failed."""


class LayerStyle(BaseModel):
    stroke: str = DARK
    fill: str = "none"
    fill_opacity: float = 0.25
    stroke_width: float = 1.0


DEFAULT_STYLES = {
    "outer": LayerStyle(stroke=ACCENT, fill=ACCENT, fill_opacity=0.15),
    "collar": LayerStyle(stroke=ACCENT, fill=ACCENT, fill_opacity=0.35, stroke_width=0.5),
    "inner": LayerStyle(stroke=DARK, fill=DARK, fill_opacity=0.35),
    "boundary": LayerStyle(stroke=DARK),
    "leg": LayerStyle(stroke=DARK),
}


# ── JSON / CSV ────────────────────────────────────────────────
def _plain(value):
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def render_json(data) -> str:
    """Stable JSON text (insertion-ordered keys, 2-space indent, trailing newline)."""
    if isinstance(data, BaseModel):
        data = data.model_dump(mode="json")
    return json.dumps(data, indent=2, default=_plain, ensure_ascii=False) + "\n"


def render_csv(rows: Iterable[dict], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row[k]) for k in columns})
    return buffer.getvalue()


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_artifact(text: str, out: Optional[Union[str, Path]] = None) -> None:
    """UTF-8 text to `out`, or to stdout when no path is given."""
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as e:
        raise ExportError(f"could not write {out}: {e}") from e
    logger.info("wrote %s (%d bytes)", out, len(text.encode("utf-8")))


# ── SVG ───────────────────────────────────────────────────────
def _fmt(v: float) -> str:
    return f"{v:.9g}"


def _loop_path(loop: np.ndarray) -> str:
    head, *rest = [f"{_fmt(x)} {_fmt(-y)}" for x, y in loop]
    return "M " + head + "".join(f" L {p}" for p in rest) + " Z"


def _segment_path(segments: np.ndarray) -> str:
    return " ".join(
        f"M {_fmt(a[0])} {_fmt(-a[1])} L {_fmt(b[0])} {_fmt(-b[1])}" for a, b in segments
    )


def _layer_path(geometry: Drawable) -> tuple[str, np.ndarray]:
    """SVG path data (y flipped) plus the points it covers."""
    if isinstance(geometry, Polygon):
        return _loop_path(geometry.vertices), geometry.vertices
    if isinstance(geometry, QuarterComplex):
        seg = geometry.boundary_segments()
        return _segment_path(seg), seg.reshape(-1, 2)
    arr = np.asarray(geometry, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[1] >= 3:
        # pieces (k, m, 2): one closed subpath each
        return " ".join(_loop_path(piece) for piece in arr), arr.reshape(-1, 2)
    if arr.ndim == 2 and len(arr) >= 2:
        # open polyline
        return _segment_path(np.stack([arr[:-1], arr[1:]], axis=1)), arr
    seg = as_segments(arr)
    return _segment_path(seg), seg.reshape(-1, 2)


def render_svg(layers: Sequence[tuple[str, Drawable]], styles: Optional[dict[str, LayerStyle]] = None,
               size: int = 800) -> str:
    """
    Layers are drawn in the given order (later on top). The viewBox fits every layer
    with a 5% margin of the larger extent on each side.
    """
    styles = {**DEFAULT_STYLES, **(styles or {})}
    paths, points = [], []
    for name, geometry in layers:
        d, pts = _layer_path(geometry)
        if len(pts) == 0:
            continue
        paths.append((name, d))
        points.append(pts)
    if not paths:
        raise ValueError("nothing to draw: every layer is empty")

    pts = np.concatenate(points)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    extent = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    pad = MARGIN * extent
    box = (lo[0] - pad, -hi[1] - pad, hi[0] - lo[0] + 2 * pad, hi[1] - lo[1] + 2 * pad)

    root = ET.Element("svg", {
        "xmlns": SVG_NS,
        "viewBox": " ".join(_fmt(v) for v in box),
        "width": str(size),
        "height": str(max(1, round(size * box[3] / box[2]))),
    })
    for name, d in paths:
        style = styles.get(name, LayerStyle())
        ET.SubElement(root, "path", {
            "id": name,
            "d": d,
            "fill": style.fill,
            "fill-opacity": _fmt(style.fill_opacity),
            "stroke": style.stroke,
            "stroke-width": _fmt(style.stroke_width),
            "vector-effect": "non-scaling-stroke",
        })
    return ET.tostring(root, encoding="unicode") + "\n"


def export_svg(layers: Sequence[tuple[str, Drawable]], path: Optional[Union[str, Path]] = None,
               styles: Optional[dict[str, LayerStyle]] = None) -> str:
    """Render and write an SVG figure; returns the SVG text."""
    text = render_svg(layers, styles)
    write_artifact(text, path)
    return text
