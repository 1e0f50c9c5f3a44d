"""Boundary operators, Hodge Laplacians, spectra and Hodge projections.

Cochains are plain 1-D float arrays indexed by the canonical basis of
positively oriented ``k``-simplexes (see :mod:`hodgewalk.complex`).  Operators
are ``scipy.sparse`` CSR matrices assembled from integer entries, so
``boundary_matrix(c, k) @ boundary_matrix(c, k + 1)`` is exactly zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .complex import SimplicialComplex

KERNEL_RTOL = 1e-8
SYMMETRY_RTOL = 1e-10
MAX_DENSE = 4096

HODGE_TARGETS = ("ker_boundary", "ker_coboundary", "ker_laplacian", "im_boundary", "im_coboundary")


def boundary_matrix(c: SimplicialComplex, k: int) -> sp.csr_matrix:
    """Matrix of the boundary map from ``k``-chains to ``(k-1)``-chains.

    The column of ``[v0, ..., vk]`` holds ``(-1)**i`` in the row of the face
    that omits ``v_i``.
    """
    if not 1 <= k <= c.dimension:
        raise ValueError(f"boundary_matrix needs 1 <= k <= {c.dimension}, got {k}")
    rows, cols, vals = [], [], []
    for j, s in enumerate(c.simplices(k)):
        for i in range(k + 1):
            rows.append(c.index(s[:i] + s[i + 1:]))
            cols.append(j)
            vals.append(-1 if i % 2 else 1)
    shape = (c.n_simplices(k - 1), c.n_simplices(k))
    return sp.csr_matrix((np.array(vals, dtype=np.int64), (rows, cols)), shape=shape)


def coboundary_matrix(c: SimplicialComplex, k: int) -> sp.csr_matrix:
    """Coboundary from ``k``-cochains to ``(k+1)``-cochains (transpose of the boundary)."""
    if not 0 <= k <= c.dimension - 1:
        raise ValueError(f"coboundary_matrix needs 0 <= k <= {c.dimension - 1}, got {k}")
    return boundary_matrix(c, k + 1).T.tocsr()


def _zero(n: int) -> sp.csr_matrix:
    return sp.csr_matrix((n, n), dtype=np.int64)


def laplacian(c: SimplicialComplex, k: int, part: str = "full") -> sp.csr_matrix:
    """Combinatorial ``k``-Laplacian: ``up``, ``down`` or ``full`` (their sum).

    A part that does not exist (``down`` at ``k=0``, ``up`` at ``k=d``)
    contributes the zero matrix to ``full``; asking for it directly is an error.
    """
    if not 0 <= k <= c.dimension:
        raise ValueError(f"k must satisfy 0 <= k <= {c.dimension}, got {k}")
    n = c.n_simplices(k)
    if part == "down":
        if k < 1:
            raise ValueError("the down Laplacian needs k >= 1")
        b = boundary_matrix(c, k)
        return (b.T @ b).tocsr()
    if part == "up":
        if k > c.dimension - 1:
            raise ValueError(f"the up Laplacian needs k <= d-1 = {c.dimension - 1}")
        b = boundary_matrix(c, k + 1)
        return (b @ b.T).tocsr()
    if part == "full":
        down = laplacian(c, k, "down") if k >= 1 else _zero(n)
        up = laplacian(c, k, "up") if k <= c.dimension - 1 else _zero(n)
        return (down + up).tocsr()
    raise ValueError(f"part must be 'up', 'down' or 'full', got {part!r}")


def _weights(w, n, name):
    if w is None:
        return np.ones(n)
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got {w.shape[0]}")
    if not np.all(w > 0):
        raise ValueError(f"{name} must be strictly positive")
    return w


def weighted_laplacian(c: SimplicialComplex, k: int, w_below=None, w_k=None, w_above=None,
                       part: str = "full") -> sp.csr_matrix:
    """Weighted ``k``-Laplacian from positive diagonal weights on ``k-1``, ``k``, ``k+1`` simplexes.

    up   = W_k^{-1/2} B_{k+1} W_{k+1} B_{k+1}^T W_k^{-1/2}
    down = W_k^{1/2} B_k^T W_{k-1}^{-1} B_k W_k^{1/2}

    Omitted weights default to ones, which recovers :func:`laplacian`.
    """
    if not 0 <= k <= c.dimension:
        raise ValueError(f"k must satisfy 0 <= k <= {c.dimension}, got {k}")
    wk = _weights(w_k, c.n_simplices(k), "w_k")
    n = wk.shape[0]
    out = sp.csr_matrix((n, n))
    if part not in ("up", "down", "full"):
        raise ValueError(f"part must be 'up', 'down' or 'full', got {part!r}")
    if part in ("down", "full") and k >= 1:
        wb = _weights(w_below, c.n_simplices(k - 1), "w_below")
        b = boundary_matrix(c, k).astype(float)
        half = sp.diags(np.sqrt(wk))
        out = out + half @ b.T @ sp.diags(1.0 / wb) @ b @ half
    elif part == "down":
        raise ValueError("the down Laplacian needs k >= 1")
    if part in ("up", "full") and k <= c.dimension - 1:
        wa = _weights(w_above, c.n_simplices(k + 1), "w_above")
        b = boundary_matrix(c, k + 1).astype(float)
        ihalf = sp.diags(1.0 / np.sqrt(wk))
        out = out + ihalf @ b @ sp.diags(wa) @ b.T @ ihalf
    elif part == "up":
        raise ValueError(f"the up Laplacian needs k <= d-1 = {c.dimension - 1}")
    return sp.csr_matrix(out)


def _dense(op) -> np.ndarray:
    a = op.toarray() if sp.issparse(op) else np.asarray(op)
    return a.astype(float)


def check_symmetric(a: np.ndarray, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    a = _dense(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.T).max(initial=0.0) > rtol * scale:
        raise ValueError("matrix is not symmetric")
    return a


def _eigh(a: np.ndarray):
    if a.shape[0] > MAX_DENSE:
        raise ValueError(f"dense eigensolve limited to {MAX_DENSE} simplexes, got {a.shape[0]}")
    return np.linalg.eigh(a)


def kernel_tolerance(eigenvalues: np.ndarray) -> float:
    radius = float(np.abs(eigenvalues).max(initial=0.0))
    return KERNEL_RTOL * max(1.0, radius)


def orthonormal_range(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the column space of ``a``."""
    a = np.atleast_2d(_dense(a))
    if a.size == 0 or a.shape[1] == 0:
        return np.zeros((a.shape[0], 0))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0:
        return np.zeros((a.shape[0], 0))
    # absolute floor so a numerically zero matrix has an empty range
    return u[:, s > KERNEL_RTOL * max(1.0, s[0])]


def numerical_rank(a: np.ndarray, rtol: float = KERNEL_RTOL) -> int:
    a = np.atleast_2d(_dense(a))
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > rtol * max(1.0, s[0])))


@dataclass
class SpectralSummary:
    eigenvalues: np.ndarray
    lambda_k: float | None
    kernel_basis: np.ndarray = field(repr=False)
    upper: float

    @property
    def kernel_dim(self) -> int:
        return self.kernel_basis.shape[1]


def _image_of_boundary_above(c: SimplicialComplex, k: int) -> np.ndarray:
    if k + 1 <= c.dimension:
        return orthonormal_range(boundary_matrix(c, k + 1))
    return np.zeros((c.n_simplices(k), 0))


def smallest_nontrivial_eigenvalue(c: SimplicialComplex, k: int) -> float | None:
    """Smallest eigenvalue of the down ``k``-Laplacian orthogonal to ``im B_{k+1}``.

    Computed by restricting to an orthonormal basis of that complement, so it
    is the constrained minimum of ``|B_k f|^2 / |f|^2``.  ``None`` when the
    complement is trivial.
    """
    ld = _dense(laplacian(c, k, "down"))
    img = _image_of_boundary_above(c, k)
    comp = scipy.linalg.null_space(img.T) if img.shape[1] else np.eye(ld.shape[0])
    if comp.shape[1] == 0:
        return None
    vals = _eigh(comp.T @ ld @ comp)[0]
    return float(max(vals[0], 0.0))


def spectral_summary(op, c: SimplicialComplex | None = None, k: int | None = None) -> SpectralSummary:
    """Full ascending spectrum, kernel basis and (given ``c``, ``k``) the constrained gap."""
    a = check_symmetric(op)
    vals, vecs = _eigh(a)
    tol = kernel_tolerance(vals)
    kernel = vecs[:, np.abs(vals) < tol]
    lam = None
    if c is not None and k is not None and k >= 1:
        lam = smallest_nontrivial_eigenvalue(c, k)
    upper = float(vals[-1]) if vals.size else 0.0
    return SpectralSummary(eigenvalues=vals, lambda_k=lam, kernel_basis=kernel, upper=upper)


def betti(c: SimplicialComplex, k: int) -> int:
    """Real Betti number ``dim ker L_k`` (unreduced)."""
    vals = _eigh(_dense(laplacian(c, k, "full")))[0]
    return int(np.sum(np.abs(vals) < kernel_tolerance(vals)))


def projection_matrix(c: SimplicialComplex, k: int, target: str) -> np.ndarray:
    """Orthogonal projector onto one Hodge subspace of the ``k``-cochains.

    ``ker_boundary`` = im B_{k+1} + harmonic, ``ker_coboundary`` = harmonic + im B_k^T.
    """
    n = c.n_simplices(k)
    if not 0 <= k <= c.dimension:
        raise ValueError(f"k must satisfy 0 <= k <= {c.dimension}, got {k}")
    if target not in HODGE_TARGETS:
        raise ValueError(f"target must be one of {HODGE_TARGETS}, got {target!r}")
    eye = np.eye(n)
    if target == "im_boundary":
        q = _image_of_boundary_above(c, k)
        return q @ q.T
    if target == "im_coboundary":
        q = orthonormal_range(boundary_matrix(c, k).T) if k >= 1 else np.zeros((n, 0))
        return q @ q.T
    if target == "ker_boundary":
        return eye - projection_matrix(c, k, "im_coboundary")
    if target == "ker_coboundary":
        return eye - projection_matrix(c, k, "im_boundary")
    return eye - projection_matrix(c, k, "im_boundary") - projection_matrix(c, k, "im_coboundary")


def hodge_project(c: SimplicialComplex, k: int, f, target: str) -> np.ndarray:
    """Orthogonal projection of the cochain ``f`` onto a Hodge subspace."""
    f = np.asarray(f, dtype=float)
    if f.shape != (c.n_simplices(k),):
        raise ValueError(f"cochain has shape {f.shape}, expected ({c.n_simplices(k)},)")
    return projection_matrix(c, k, target) @ f


def hodge_decomposition(c: SimplicialComplex, k: int, f) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(im_boundary, harmonic, im_coboundary)`` parts of ``f``; they sum to ``f``."""
    return tuple(hodge_project(c, k, f, t) for t in ("im_boundary", "ker_laplacian", "im_coboundary"))
