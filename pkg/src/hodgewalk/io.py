"""Text formats: ``.scx`` complexes, ``.lbl`` label files, JSON and CSV output.

``.scx`` grammar, one statement per line::

    # comment
    coord v x y
    simplex v0 v1 ... vj

``.lbl`` lines are ``label va vb class``; the pair order gives the
orientation (ascending = positive), ``class`` is a signed integer.
"""
from __future__ import annotations

import io as _io
import json
import math

import numpy as np

from .complex import OrientedSimplex, SimplicialComplex, build_complex


class ParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def _ints(tokens, lineno):
    try:
        vals = [int(t) for t in tokens]
    except ValueError:
        raise ParseError(lineno, f"expected integers, got {' '.join(tokens)!r}") from None
    if any(v < 0 for v in vals):
        raise ParseError(lineno, "vertex identifiers must be non-negative")
    return vals


def parse_complex(text: str) -> SimplicialComplex:
    simplexes, coords = [], {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "simplex":
            if not rest:
                raise ParseError(lineno, "simplex needs at least one vertex")
            verts = _ints(rest, lineno)
            if len(set(verts)) != len(verts):
                raise ParseError(lineno, f"repeated vertex in simplex {verts}")
            simplexes.append(verts)
        elif head == "coord":
            if len(rest) != 3:
                raise ParseError(lineno, "coord needs a vertex and two numbers")
            (v,) = _ints(rest[:1], lineno)
            try:
                x, y = float(rest[1]), float(rest[2])
            except ValueError:
                raise ParseError(lineno, f"bad coordinates {rest[1:]}") from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ParseError(lineno, "coordinates must be finite")
            if v in coords:
                raise ParseError(lineno, f"duplicate coord for vertex {v}")
            coords[v] = (x, y)
        else:
            raise ParseError(lineno, f"unknown statement {head!r}")
    if not simplexes:
        raise ValueError("complex file contains no simplexes")
    c = build_complex(simplexes)
    if coords:
        unknown = set(coords) - set(c.vertices)
        if unknown:
            raise ValueError(f"coordinates given for unknown vertices {sorted(unknown)}")
        c = c.with_coords(coords)
    return c


def serialize_complex(c: SimplicialComplex) -> str:
    """Canonical text: coordinates in vertex order, then maximal simplexes."""
    lines = []
    if c.coords:
        for v in sorted(c.coords):
            x, y = c.coords[v]
            lines.append(f"coord {v} {x!r} {y!r}")
    for s in c.maximal_simplices():
        lines.append("simplex " + " ".join(map(str, s)))
    return "\n".join(lines) + "\n"


def parse_labels(text: str, c: SimplicialComplex | None = None) -> tuple[list[list[int]], list[int]]:
    """Oriented edges and signed classes from a label file."""
    edges, classes = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] != "label" or len(tokens) != 4:
            raise ParseError(lineno, "expected 'label va vb class'")
        va, vb = _ints(tokens[1:3], lineno)
        try:
            cls = int(tokens[3])
        except ValueError:
            raise ParseError(lineno, f"class must be an integer, got {tokens[3]!r}") from None
        if cls == 0:
            raise ParseError(lineno, "class 0 is not allowed")
        if va == vb:
            raise ParseError(lineno, "an edge needs two distinct vertices")
        if c is not None and (va, vb) not in c and (vb, va) not in c:
            raise ParseError(lineno, f"edge ({va}, {vb}) is not in the complex")
        edges.append([va, vb])
        classes.append(cls)
    if not edges:
        raise ValueError("label file contains no labels")
    return edges, classes


def serialize_labels(labels: dict[tuple[int, ...], int]) -> str:
    lines = []
    for s in sorted(labels):
        cls = labels[s]
        o = OrientedSimplex(s, 1 if cls > 0 else -1)
        a, b = o.simplex if o.sign > 0 else o.simplex[::-1]
        lines.append(f"label {a} {b} {abs(cls)}")
    return "\n".join(lines) + "\n"


# -- JSON / CSV ---------------------------------------------------------------

def format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(float(x), ".17g")


def dumps_json(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return format_float(float(o))
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, np.ndarray):
            return enc(o.tolist(), level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            items = [pad + enc(v, level + 1) for v in o]
            return "[\n" + ",\n".join(items) + "\n" + end + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")
    return enc(obj, 0) + "\n"


def basis_names(c: SimplicialComplex, k: int) -> list[str]:
    return ["[" + " ".join(map(str, s)) + "]" for s in c.simplices(k)]


def matrix_csv(matrix, row_names, col_names=None) -> str:
    """Dense matrix as CSV, row-major, first row naming the column basis."""
    m = matrix.toarray() if hasattr(matrix, "toarray") else np.asarray(matrix)
    col_names = col_names if col_names is not None else row_names
    buf = _io.StringIO()
    buf.write(",".join(["basis"] + list(col_names)) + "\n")
    for name, row in zip(row_names, m):
        buf.write(",".join([name] + [format_float(v) for v in row]) + "\n")
    return buf.getvalue()


def table_csv(header, rows) -> str:
    buf = _io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(format_float(v))
            else:
                cells.append(str(v))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def sparse_coo_text(matrix) -> str:
    """One ``row col value`` triple per stored nonzero, sorted."""
    coo = matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    return "".join(f"{coo.row[i]} {coo.col[i]} {format_float(coo.data[i])}\n" for i in order if coo.data[i] != 0)
