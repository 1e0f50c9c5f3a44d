"""Deterministic SVG drawings of edge flows on 2-D embedded complexes."""
from __future__ import annotations

import numpy as np

from .complex import SimplicialComplex
from .propagation import FlowArrow

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
NEUTRAL = "#7f7f7f"
FILL = "#dde6f0"
WIDTH_MIN, WIDTH_MAX = 0.5, 4.0
CANVAS = 480.0
MARGIN = 24.0


def _num(x: float) -> str:
    return f"{x:.3f}"


def stroke_width(magnitude: float) -> float:
    """Fixed scale: magnitude 0 maps to the thinnest line, 1 and above to the thickest."""
    m = min(max(float(magnitude), 0.0), 1.0)
    return WIDTH_MIN + (WIDTH_MAX - WIDTH_MIN) * m


def _arrows_from_cochain(c: SimplicialComplex, f) -> list[FlowArrow]:
    f = np.asarray(f, dtype=float)
    if f.shape != (c.n_simplices(1),):
        raise ValueError(f"edge cochain must have {c.n_simplices(1)} entries, got shape {f.shape}")
    return [FlowArrow(simplex=s, direction=int(np.sign(v)), cls=1 if v else 0, magnitude=abs(float(v)))
            for s, v in zip(c.simplices(1), f)]


def render_svg(c: SimplicialComplex, flow) -> str:
    """SVG text for ``flow`` (a list of FlowArrow or an edge cochain) on ``c``.

    Arrows point along the vertex order for positive values and against it
    for negative ones; zero flow is drawn as a plain grey segment.
    """
    missing = [v for v in c.vertices if v not in (c.coords or {})]
    if missing:
        raise ValueError(f"missing coordinates for vertices {missing}")
    arrows = flow if isinstance(flow, list) and (not flow or isinstance(flow[0], FlowArrow)) \
        else _arrows_from_cochain(c, flow)

    xy = np.array([c.coords[v] for v in c.vertices], dtype=float)
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    scale = (CANVAS - 2 * MARGIN) / max(float((hi - lo).max()), 1e-12)

    def pt(v):
        x, y = c.coords[v]
        # flip y so larger coordinates are drawn higher
        return MARGIN + (x - lo[0]) * scale, CANVAS - MARGIN - (y - lo[1]) * scale

    used = sorted({a.cls for a in arrows if a.direction})
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(CANVAS)}" height="{int(CANVAS)}" '
           f'viewBox="0 0 {int(CANVAS)} {int(CANVAS)}">']
    out.append("<defs>")
    for cls in used:
        colour = PALETTE[(cls - 1) % len(PALETTE)]
        out.append(f'<marker id="head{cls}" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="5" '
                   f'markerHeight="5" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="{colour}"/></marker>')
    out.append("</defs>")
    if c.dimension >= 2:
        for tri in c.simplices(2):
            pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in map(pt, tri))
            out.append(f'<polygon points="{pts}" fill="{FILL}" stroke="none"/>')
    for a in arrows:
        u, v = a.simplex
        if a.direction < 0:
            u, v = v, u
        (x1, y1), (x2, y2) = pt(u), pt(v)
        if a.direction:
            colour = PALETTE[(a.cls - 1) % len(PALETTE)]
            head = f' marker-end="url(#head{a.cls})"'
        else:
            colour, head = NEUTRAL, ""
        out.append(f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" '
                   f'stroke="{colour}" stroke-width="{_num(stroke_width(a.magnitude))}"{head}/>')
    for v in c.vertices:
        x, y = pt(v)
        out.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="2.500" fill="#000000"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
