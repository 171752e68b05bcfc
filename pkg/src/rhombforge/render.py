"""SVG output for patches and expanded edges.

Negative tiles are painted after all positive ones in a flat fill so the
overlap they compensate is visually removed; no geometric clipping is done.
"""

from __future__ import annotations

import colorsys
import json
from dataclasses import dataclass, field
from typing import Sequence

from .edge import EdgeSequence, edge_polyline
from .geometry import Patch, expand_edge

_HEAD = '<?xml version="1.0" encoding="UTF-8"?>\n'


def default_palette(n: int) -> dict[int, str]:
    """One hue per tile index s in 0..n, spaced by s/n around the wheel."""
    out = {}
    for s in range(n + 1):
        r, g, b = colorsys.hls_to_rgb((s / (n + 1)) % 1.0, 0.62, 0.65)
        out[s] = f"#{round(r * 255):02x}{round(g * 255):02x}{round(b * 255):02x}"
    return out


@dataclass
class RenderStyle:
    palette: dict[int, str] = field(default_factory=dict)
    negative_fill: str = "#ffffff"
    background: str | None = None  # None: gray when negatives are present, else none
    stroke: str = "#222222"
    stroke_width: float = 0.02
    scale: float = 40.0
    precision: int = 9

    def fill_for(self, n: int, s: int) -> str:
        pal = self.palette or default_palette(n)
        s = s % (2 * n)
        if s > n:
            s = 2 * n - s
        return pal.get(s, "#999999")

    def to_json(self) -> dict:
        return {
            "palette": {str(k): v for k, v in sorted(self.palette.items())},
            "negative_fill": self.negative_fill,
            "background": self.background,
            "stroke": self.stroke,
            "stroke_width": self.stroke_width,
            "scale": self.scale,
            "precision": self.precision,
        }

    @classmethod
    def from_json(cls, data: dict | str) -> RenderStyle:
        if isinstance(data, str):
            data = json.loads(data)
        kw = dict(data)
        if "palette" in kw:
            kw["palette"] = {int(k): v for k, v in kw["palette"].items()}
        return cls(**kw)

    @classmethod
    def load(cls, path: str) -> RenderStyle:
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _fmt(x: float, prec: int) -> str:
    s = f"{x:.{prec}f}"
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    if s in ("-0", ""):
        s = "0"
    return s


def _document(body: list[str], xs: Sequence[float], ys: Sequence[float], style: RenderStyle,
              background: str | None) -> str:
    margin = style.stroke_width * style.scale
    minx, maxx = min(xs) - margin, max(xs) + margin
    miny, maxy = min(ys) - margin, max(ys) + margin
    p = style.precision
    w, h = maxx - minx, maxy - miny
    lines = [
        _HEAD,
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(w, p)}" height="{_fmt(h, p)}" '
        f'viewBox="{_fmt(minx, p)} {_fmt(miny, p)} {_fmt(w, p)} {_fmt(h, p)}">\n',
    ]
    if background:
        lines.append(
            f'<rect x="{_fmt(minx, p)}" y="{_fmt(miny, p)}" width="{_fmt(w, p)}" height="{_fmt(h, p)}" '
            f'fill="{background}"/>\n'
        )
    lines.extend(body)
    lines.append("</svg>\n")
    return "".join(lines)


def tile_points(patch: Patch, scale: float = 1.0) -> list[list[tuple[float, float]]]:
    """Float vertices of every tile, y axis flipped for SVG (y up on screen)."""
    out = []
    for t in patch.tiles:
        pts = []
        for v in t.vertices():
            z = v.complex_value()
            pts.append((z.real * scale, -z.imag * scale))
        out.append(pts)
    return out


def render_patch(patch: Patch, style: RenderStyle | None = None, *, show_boundary: bool = False) -> str:
    if not patch.tiles:
        raise ValueError("cannot render an empty patch")
    style = style or RenderStyle()
    p = style.precision
    sw = _fmt(style.stroke_width * style.scale, p)
    pts = tile_points(patch, style.scale)
    pos = [i for i, t in enumerate(patch.tiles) if t.sign >= 0]
    neg = [i for i, t in enumerate(patch.tiles) if t.sign < 0]
    body = []
    for i in pos + neg:
        t = patch.tiles[i]
        fill = style.negative_fill if t.sign < 0 else style.fill_for(patch.n, t.s)
        coords = " ".join(f"{_fmt(x, p)},{_fmt(y, p)}" for x, y in pts[i])
        body.append(
            f'<polygon points="{coords}" fill="{fill}" stroke="{style.stroke}" stroke-width="{sw}" '
            f'class="t{t.s} {"neg" if t.sign < 0 else "pos"}"/>\n'
        )
    if show_boundary:
        bf = patch.boundary_float * style.scale
        coords = " ".join(f"{_fmt(z.real, p)},{_fmt(-z.imag, p)}" for z in bf)
        body.append(f'<polyline points="{coords}" fill="none" stroke="#000000" stroke-width="{sw}"/>\n')
    xs = [x for poly in pts for x, _ in poly]
    ys = [y for poly in pts for _, y in poly]
    background = style.background
    if background is None and neg:
        background = "#bbbbbb"
    return _document(body, xs, ys, style, background)


def render_edge(
    e: EdgeSequence,
    generations: int,
    orientation: str | Sequence[int] | Sequence[str] = "a",
    style: RenderStyle | None = None,
) -> str:
    """Polyline of the generation-g edge (N**g segments), drawn at unit segment length."""
    style = style or RenderStyle()
    p = style.precision
    pts = [z.complex_value() for z in edge_polyline(expand_edge(e, generations, orientation))]
    xy = [(z.real * style.scale, -z.imag * style.scale) for z in pts]
    coords = " ".join(f"{_fmt(x, p)},{_fmt(y, p)}" for x, y in xy)
    sw = _fmt(style.stroke_width * style.scale, p)
    body = [f'<polyline points="{coords}" fill="none" stroke="{style.stroke}" stroke-width="{sw}"/>\n']
    return _document(body, [x for x, _ in xy], [y for _, y in xy], style, style.background)
