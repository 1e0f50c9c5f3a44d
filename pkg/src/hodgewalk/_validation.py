"""Input checks shared by the estimators and the CLI."""
from __future__ import annotations

import numpy as np

from .complex import OrientedSimplex, SimplicialComplex


def check_oriented_simplices(X, c: SimplicialComplex, k: int) -> list[OrientedSimplex]:
    """Rows of ``X`` read as vertex orderings of ``k``-simplexes of ``c``."""
    arr = np.asarray(X)
    if arr.ndim == 1 and arr.size == k + 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != k + 1:
        raise ValueError(f"expected an array of shape (n, {k + 1}) of vertex orderings, got {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("vertex identifiers must be integers")
        arr = arr.astype(np.int64)
    out = []
    for row in arr:
        o = OrientedSimplex.from_vertices(row.tolist())
        if o.simplex not in c:
            raise ValueError(f"{list(row)} is not a simplex of the complex")
        out.append(o)
    return out


def check_signed_classes(y, n_classes: int | None = None) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError("class labels must be one-dimensional")
    if y.size and not np.all(np.equal(np.mod(y, 1), 0)):
        raise ValueError("class labels must be nonzero integers")
    y = y.astype(np.int64)
    if np.any(y == 0):
        raise ValueError("class 0 is not allowed; classes are +-1..+-C")
    if n_classes is not None and y.size and np.abs(y).max() > n_classes:
        raise ValueError(f"class labels must lie in +-1..+-{n_classes}")
    return y
