"""Deterministic SVG rendering of 2-D tilings and 2-D slices.

All geometry arrives exact; decimals appear only in the emitted document
(6 fractional digits, round half to even).  A tile translate is drawn when its
open parallelogram meets the open window, decided by an exact separating-axis
test, so the polygon census is reproducible.  Elements are grouped per
fragment in lexicographic subset order, each group with its own fill shade,
offsets ordered lexicographically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import ceil, floor
from typing import Sequence

from .fragments import DEGENERATE, FragmentSet, SubsetIndex
from .linalg import DimensionError, Matrix, inverse, rat, vec_add
from .slices import SliceLayout

DEFAULT_PALETTE = {
    "positive": "#d95f2b",
    "negative": "#3b6fb6",
    "degenerate": "#bbbbbb",
}


@dataclass(frozen=True)
class RenderConfig:
    """Window (x0, x1, y0, y1) in drawing coordinates, pixels per unit, fill
    colors per sign class, and fill opacity."""

    window: tuple[Fraction, Fraction, Fraction, Fraction]
    scale: Fraction = Fraction(40)
    palette: dict = field(default_factory=lambda: dict(DEFAULT_PALETTE))
    opacity: Fraction = Fraction(1, 2)

    def __post_init__(self):
        x0, x1, y0, y1 = (rat(v) for v in self.window)
        if not (x0 < x1 and y0 < y1):
            raise DimensionError("window must be a nonempty box")
        if rat(self.scale) <= 0:
            raise DimensionError("scale must be positive")
        if not (0 < rat(self.opacity) <= 1):
            raise DimensionError("opacity must lie in (0, 1]")
        object.__setattr__(self, "window", (x0, x1, y0, y1))
        object.__setattr__(self, "scale", rat(self.scale))
        object.__setattr__(self, "opacity", rat(self.opacity))


def dec6(q: Fraction) -> str:
    """Exact decimal rendering with 6 fractional digits (half to even)."""
    n = round(q * 10**6)
    sign = "-" if n < 0 else ""
    n = abs(n)
    return f"{sign}{n // 10**6}.{n % 10**6:06d}"


def _project(points, axis):
    values = [px * axis[0] + py * axis[1] for px, py in points]
    return min(values), max(values)


def _open_overlap(span_a, span_b) -> bool:
    return span_a[0] < span_b[1] and span_b[0] < span_a[1]


def parallelogram_meets_window(corners, window) -> bool:
    """Exact separating-axis test: do the open parallelogram and the open
    window intersect?  Touching along an edge or corner does not count."""
    x0, x1, y0, y1 = window
    rect = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    e1 = (corners[1][0] - corners[0][0], corners[1][1] - corners[0][1])
    e2 = (corners[3][0] - corners[0][0], corners[3][1] - corners[0][1])
    axes = [
        (Fraction(1), Fraction(0)),
        (Fraction(0), Fraction(1)),
        (-e1[1], e1[0]),
        (-e2[1], e2[0]),
    ]
    for axis in axes:
        if axis == (0, 0):
            continue
        if not _open_overlap(_project(corners, axis), _project(rect, axis)):
            return False
    return True


def _lattice_box(basis_inv: Matrix, lo: Sequence[Fraction], hi: Sequence[Fraction]):
    """Integer coordinate bounds of all lattice points the box could map from."""
    n = basis_inv.rows
    bounds = []
    for i in range(n):
        low = Fraction(0)
        high = Fraction(0)
        for j in range(n):
            a = basis_inv.entry(i, j) * lo[j]
            b = basis_inv.entry(i, j) * hi[j]
            low += min(a, b)
            high += max(a, b)
        bounds.append((ceil(low), floor(high)))
    return bounds


def _shade(color: str, position: int, count: int) -> str:
    """Blend a base color toward white; distinct shade per position."""
    r = int(color[1:3], 16)
    g = int(color[3:5], 16)
    b = int(color[5:7], 16)
    mix = Fraction(position, max(count + 1, 2))
    channel = lambda c: int(c + (255 - c) * mix)
    return f"#{channel(r):02x}{channel(g):02x}{channel(b):02x}"


def _corners(offset, g1, g2):
    o = offset
    return (
        (o[0], o[1]),
        (o[0] + g1[0], o[1] + g1[1]),
        (o[0] + g1[0] + g2[0], o[1] + g1[1] + g2[1]),
        (o[0] + g2[0], o[1] + g2[1]),
    )


def _family_polygons(shape: Matrix, anchors, basis: Matrix, cfg: RenderConfig):
    """All translates anchor + basis*z whose parallelogram meets the window."""
    x0, x1, y0, y1 = cfg.window
    g1 = shape.column(0)
    g2 = shape.column(1)
    smin = [min(0, g1[i]) + min(0, g2[i]) for i in range(2)]
    smax = [max(0, g1[i]) + max(0, g2[i]) for i in range(2)]
    basis_inv = inverse(basis)
    polygons = []
    for anchor in anchors:
        lo = (x0 - smax[0] - anchor[0], y0 - smax[1] - anchor[1])
        hi = (x1 - smin[0] - anchor[0], y1 - smin[1] - anchor[1])
        for z in product(*(range(a, b + 1) for a, b in _lattice_box(basis_inv, lo, hi))):
            shift = basis.mat_vec(tuple(Fraction(v) for v in z))
            offset = vec_add(anchor, shift)
            corners = _corners(offset, g1, g2)
            if parallelogram_meets_window(corners, cfg.window):
                polygons.append(corners)
    polygons.sort()
    return polygons


def _svg_document(groups, cfg: RenderConfig) -> str:
    x0, x1, y0, y1 = cfg.window
    width = (x1 - x0) * cfg.scale
    height = (y1 - y0) * cfg.scale

    def to_px(pt):
        return (pt[0] - x0) * cfg.scale, (y1 - pt[1]) * cfg.scale

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{dec6(width)}" height="{dec6(height)}" '
        f'viewBox="0 0 {dec6(width)} {dec6(height)}">',
        f'<rect width="{dec6(width)}" height="{dec6(height)}" fill="#ffffff"/>',
    ]
    for group_id, fill, polygons in groups:
        lines.append(
            f'<g id="{group_id}" fill="{fill}" fill-opacity="{dec6(cfg.opacity)}" '
            f'stroke="#222222" stroke-width="0.800000">'
        )
        for corners in polygons:
            pts = " ".join(
                f"{dec6(px)},{dec6(py)}" for px, py in (to_px(c) for c in corners)
            )
            lines.append(f'<polygon points="{pts}"/>')
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _group_id(sigma: SubsetIndex) -> str:
    return "sigma-" + "-".join(str(i) for i in sigma)


def render_svg(source, cfg: RenderConfig) -> str:
    """SVG document for a full 2-D tiling (FragmentSet with r+k = 2) or a 2-D
    slice layout (SliceLayout with r = 2)."""
    if isinstance(source, FragmentSet):
        if source.dims.n != 2:
            raise DimensionError("full tiling rendering needs r+k = 2")
        zero = (Fraction(0), Fraction(0))
        families = [
            (frag.sigma, frag.sign_class, frag.s, (zero,))
            for frag in source
            if frag.sign_class != DEGENERATE
        ]
        basis = source.decomposition.m
    elif isinstance(source, SliceLayout):
        if source.b.rows != 2:
            raise DimensionError("slice rendering needs r = 2")
        families = [
            (cls.sigma, cls.sign_class, cls.shape, cls.offsets)
            for cls in source.classes
            if cls.sign_class != DEGENERATE and cls.offsets
        ]
        basis = source.b
    else:
        raise DimensionError(f"cannot render {type(source).__name__}")

    class_totals: dict[str, int] = {}
    for _, sign_class, _, _ in families:
        class_totals[sign_class] = class_totals.get(sign_class, 0) + 1
    class_seen: dict[str, int] = {}
    groups = []
    for sigma, sign_class, shape, anchors in families:
        position = class_seen.get(sign_class, 0)
        class_seen[sign_class] = position + 1
        fill = _shade(cfg.palette[sign_class], position, class_totals[sign_class])
        polygons = _family_polygons(shape, anchors, basis, cfg)
        groups.append((_group_id(sigma), fill, polygons))
    return _svg_document(groups, cfg)
