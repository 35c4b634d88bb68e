"""Deterministic SVG emission for polygons, lattice states and curves.

Output is byte-stable for identical input: fixed decimal formatting, sorted
attributes, no timestamps.  Coordinates are mathematical (y up); the document
applies a single flip transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

_PALETTE = [
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
]


def _fmt(x) -> str:
    s = f"{float(x):.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


@dataclass
class SvgCanvas:
    """Collects drawable items, then renders one standalone SVG document."""

    width: int = 640
    height: int = 640
    items: list = field(default_factory=list)
    bounds: list = field(default_factory=lambda: [-1.0, -1.0, 1.0, 1.0])

    def _grow_bounds(self, xs, ys):
        for x in xs:
            self.bounds[0] = min(self.bounds[0], float(x))
            self.bounds[2] = max(self.bounds[2], float(x))
        for y in ys:
            self.bounds[1] = min(self.bounds[1], float(y))
            self.bounds[3] = max(self.bounds[3], float(y))

    def add_polygon(self, vertices, color: str | None = None, fill: str = "none", width: float = 0.03):
        if not vertices:
            return
        color = color or _PALETTE[len(self.items) % len(_PALETTE)]
        pts = [(float(a), float(b)) for a, b in vertices]
        self._grow_bounds([p[0] for p in pts], [p[1] for p in pts])
        d = "M " + " L ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in pts) + " Z"
        self.items.append(
            f'<path d="{d}" fill="{fill}" stroke="{color}" stroke-width="{_fmt(width)}"/>'
        )

    def add_polyline(self, points, color: str | None = None, width: float = 0.02):
        pts = [(float(a), float(b)) for a, b in points]
        if not pts:
            return
        color = color or _PALETTE[len(self.items) % len(_PALETTE)]
        self._grow_bounds([p[0] for p in pts], [p[1] for p in pts])
        d = "M " + " L ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in pts)
        self.items.append(
            f'<path d="{d}" fill="none" stroke="{color}" stroke-width="{_fmt(width)}"/>'
        )

    def add_markers(self, points, color: str = "#000000", radius: float = 0.06):
        pts = sorted((float(a), float(b)) for a, b in points)
        if not pts:
            return
        self._grow_bounds([p[0] for p in pts], [p[1] for p in pts])
        for x, y in pts:
            self.items.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(radius)}" fill="{color}"/>'
            )

    def add_segment(self, a, b, color: str = "#d62728", width: float = 0.06):
        pts = [(float(a[0]), float(a[1])), (float(b[0]), float(b[1]))]
        self._grow_bounds([p[0] for p in pts], [p[1] for p in pts])
        self.items.append(
            f'<line x1="{_fmt(pts[0][0])}" y1="{_fmt(pts[0][1])}" x2="{_fmt(pts[1][0])}"'
            f' y2="{_fmt(pts[1][1])}" stroke="{color}" stroke-width="{_fmt(width)}"/>'
        )

    def add_cells(self, cells, color: str = "#333333", band_period: int = 0):
        """Occupied lattice cells as unit squares.  With band_period > 0 the
        cells carry an age attribute (cells are (x, y, t) triples) and shade
        in alternating bands of that period."""
        if not cells:
            return
        xs = [c[0] for c in cells]
        ys = [c[1] for c in cells]
        self._grow_bounds([min(xs) - 1, max(xs) + 1], [min(ys) - 1, max(ys) + 1])
        shades = ["#2c4b6e", "#9db8d2"]
        for c in sorted(cells):
            if band_period and len(c) > 2:
                fill = shades[(c[2] // band_period) % 2]
            else:
                fill = color
            self.items.append(
                f'<rect x="{_fmt(c[0] - 0.5)}" y="{_fmt(c[1] - 0.5)}" width="1" height="1"'
                f' fill="{fill}"/>'
            )

    def render(self) -> str:
        x0, y0, x1, y1 = self.bounds
        pad = 0.05 * max(x1 - x0, y1 - y0, 1.0)
        x0, y0, x1, y1 = x0 - pad, y0 - pad, x1 + pad, y1 + pad
        vw, vh = x1 - x0, y1 - y0
        body = "\n".join(self.items) if self.items else "<!-- empty -->"
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}"'
            f' viewBox="{_fmt(x0)} {_fmt(-y1)} {_fmt(vw)} {_fmt(vh)}">\n'
            f'<g transform="scale(1,-1)">\n{body}\n</g>\n</svg>\n'
        )


def render_polygons(polys, colors=None, markers=None, segments=None) -> str:
    """Overlay document: polygons, optional point markers and highlighted
    segments (used for hull-contact pictures)."""
    canvas = SvgCanvas()
    for i, poly in enumerate(polys):
        color = colors[i] if colors else None
        canvas.add_polygon(poly, color=color)
    if segments:
        for a, b in segments:
            canvas.add_segment(a, b)
    if markers:
        canvas.add_markers(markers)
    return canvas.render()


def render_state(state, band_period: int = 0, ages=None) -> str:
    """Lattice state snapshot; ages, when given, maps cells to first-occupied
    times for banded shading."""
    cells = state.occupied_cells()
    if ages:
        cells = [(x, y, ages.get((x, y), 0)) for x, y in cells]
    canvas = SvgCanvas()
    canvas.add_cells(cells, band_period=band_period)
    return canvas.render()


def render_radial_estimates(estimates, star=None) -> str:
    """Empirical inverse-speed points with error bars, optionally over the
    exact star polygon."""
    canvas = SvgCanvas()
    if star is not None:
        canvas.add_polygon(star, color="#2ca02c")
    pts = []
    for est in estimates:
        vx, vy = est.direction
        norm = math.hypot(vx, vy)
        if est.estimate <= 0:
            continue
        radius = 1.0 / est.estimate
        ux, uy = vx / norm, vy / norm
        pts.append((ux * radius, uy * radius))
        if est.stderr > 0 and est.estimate > est.stderr * 3:
            r_lo = 1.0 / (est.estimate + 3 * est.stderr)
            r_hi = 1.0 / (est.estimate - 3 * est.stderr)
            canvas.add_segment(
                (ux * r_lo, uy * r_lo), (ux * r_hi, uy * r_hi), color="#999999", width=0.02
            )
    canvas.add_markers(pts, color="#1f77b4")
    return canvas.render()
