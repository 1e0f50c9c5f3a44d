"""Semi-supervised propagation of oriented class labels on simplexes (edges by default).

Each class ``c`` carries a confidence cochain.  One round multiplies it by the
normalized lazy propagation matrix of an X^k matrix ``L`` and then clamps the
simplexes labelled ``+-c`` back to ``+-1``.  The fixed point has a closed form
on the unlabelled block, which is independent of ``p`` and of the start.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import algebra
from ._validation import check_oriented_simplices, check_signed_classes
from .complex import Simplex, SimplicialComplex
from .walks import XkMatrix, _check_p, normalized_lazy_propagation

COND_LIMIT = 1e12
THRESHOLD_ATOL = 1e-12
OPERATORS = ("up", "down", "full")


class PreconditionError(ValueError):
    """The closed-form limit's convergence conditions do not hold."""


def operator_matrix(c: SimplicialComplex, k: int, operator) -> np.ndarray:
    """Resolve ``"up"``, ``"down"``, ``"full"`` or an explicit matrix to a dense X^k matrix."""
    if isinstance(operator, str):
        if operator not in OPERATORS:
            raise ValueError(f"operator must be one of {OPERATORS} or a matrix, got {operator!r}")
        return algebra.laplacian(c, k, operator).toarray().astype(float)
    L = operator.toarray() if sp.issparse(operator) else np.asarray(operator, dtype=float)
    n = c.n_simplices(k)
    if L.shape != (n, n):
        raise ValueError(f"operator has shape {L.shape}, expected ({n}, {n})")
    return L


@dataclass
class LabelProblem:
    """A partially labelled set of oriented ``k``-simplexes.

    ``labels`` maps each labelled simplex (ascending tuple) to a signed class
    ``+-1..+-C`` for its positive orientation.
    """

    complex: SimplicialComplex
    labels: dict[Simplex, int]
    n_classes: int
    operator: object = "full"
    p: float = 0.9
    n_iter: int = 1000
    f0: object = "zero"
    k: int = 1

    def __post_init__(self):
        if not 1 <= self.k <= self.complex.dimension:
            raise ValueError(f"k must satisfy 1 <= k <= {self.complex.dimension}")
        if not self.labels:
            raise ValueError("label propagation needs at least one labelled simplex")
        if self.n_classes < 1:
            raise ValueError("n_classes must be at least 1")
        clean = {}
        for s, cls in self.labels.items():
            key = tuple(sorted(s))
            if len(key) != self.k + 1 or key not in self.complex:
                raise ValueError(f"labelled simplex {s} is not a {self.k}-simplex of the complex")
            if key in clean:
                raise ValueError(f"simplex {key} labelled more than once")
            clean[key] = int(check_signed_classes([cls], self.n_classes)[0])
        self.labels = clean
        _check_p(self.p)
        if self.n_iter < 0:
            raise ValueError("n_iter must be non-negative")

    @classmethod
    def from_oriented(cls, c: SimplicialComplex, oriented, classes, n_classes=None, **kw) -> "LabelProblem":
        """Build from vertex orderings; a reversed ordering flips the class sign."""
        k = kw.get("k", 1)
        simplices = check_oriented_simplices(oriented, c, k)
        y = check_signed_classes(classes)
        if len(simplices) != y.size:
            raise ValueError("need one class per labelled simplex")
        labels: dict[Simplex, int] = {}
        for o, cls_ in zip(simplices, y):
            if o.simplex in labels:
                raise ValueError(f"simplex {o.simplex} labelled more than once")
            labels[o.simplex] = int(cls_) * o.sign
        n_classes = n_classes or int(np.abs(y).max())
        return cls(complex=c, labels=labels, n_classes=n_classes, **kw)

    @property
    def n(self) -> int:
        return self.complex.n_simplices(self.k)

    def label_vector(self) -> np.ndarray:
        """Signed class per simplex in canonical order (0 = unlabelled)."""
        v = np.zeros(self.n, dtype=np.int64)
        for s, cls in self.labels.items():
            v[self.complex.index(s)] = cls
        return v

    def class_mask(self, cls: int) -> np.ndarray:
        return np.abs(self.label_vector()) == cls

    def psi(self, cls: int) -> np.ndarray:
        """``+-1`` on simplexes labelled ``+-cls``, zero elsewhere."""
        return np.sign(self.label_vector()) * self.class_mask(cls)

    def initial(self, cls: int) -> np.ndarray:
        f0 = self.f0
        if isinstance(f0, str):
            if f0 == "zero":
                return self.psi(cls).astype(float)
            if f0 == "indicator":
                return np.sign(self.label_vector()).astype(float)
            raise ValueError(f"f0 must be 'zero', 'indicator', an array or a per-class mapping, got {f0!r}")
        if isinstance(f0, Mapping):
            f0 = f0[cls]
        f0 = np.asarray(f0, dtype=float)
        if f0.shape == (self.n_classes, self.n):
            f0 = f0[cls - 1]
        if f0.shape != (self.n,):
            raise ValueError(f"initial confidence must have shape ({self.n},), got {f0.shape}")
        return f0.copy()

    def xk_matrix(self) -> XkMatrix:
        return XkMatrix.from_matrix(operator_matrix(self.complex, self.k, self.operator))


@dataclass
class PropagationResult:
    problem: LabelProblem = field(repr=False)
    confidences: np.ndarray = field(repr=False)
    """Row ``c-1`` is the iterated confidence cochain of class ``c``."""
    limits: np.ndarray | None = field(repr=False)
    """Closed-form fixed points (rows per class) when the preconditions hold."""
    assignment: np.ndarray = field(repr=False)
    Lambda: float = 0.0
    K: float = 0.0
    threshold: float = 0.0
    kernel_support_ok: bool = False
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        c, k = self.problem.complex, self.problem.k
        edges = [list(s) for s in c.simplices(k)]
        out = {
            "simplices": edges,
            "labels": self.problem.label_vector().tolist(),
            "confidences": {str(i + 1): row.tolist() for i, row in enumerate(self.confidences)},
            "assignment": self.assignment.tolist(),
            "diagnostics": {
                "Lambda": self.Lambda, "K": self.K, "p_threshold": self.threshold,
                "p": self.problem.p, "iterations": self.problem.n_iter,
                "kernel_support_ok": self.kernel_support_ok, "notes": list(self.notes),
            },
        }
        if self.limits is not None:
            out["limits"] = {str(i + 1): row.tolist() for i, row in enumerate(self.limits)}
        return out


def kernel_support_check(L, labelled) -> bool:
    """True iff no nonzero vector of ``ker L`` vanishes on every labelled simplex.

    ``labelled`` is a boolean mask or an index list.
    """
    L = algebra.check_symmetric(L)
    mask = np.zeros(L.shape[0], dtype=bool)
    idx = np.asarray(labelled)
    if idx.dtype == bool:
        if idx.shape != mask.shape:
            raise ValueError("labelled mask has the wrong length")
        mask = idx
    elif idx.size:
        mask[idx.astype(np.int64)] = True
    kernel = algebra.spectral_summary(L).kernel_basis
    if kernel.shape[1] == 0:
        return True
    return algebra.numerical_rank(kernel[mask]) == kernel.shape[1] if mask.any() else False


def assign(confidences: np.ndarray, labels: np.ndarray | None = None) -> np.ndarray:
    """Oriented class per simplex: ``sgn(f^c) * c`` for the ``c`` with largest ``|f^c|``.

    Ties go to the smallest class index; all-zero confidence gives 0.
    Labelled simplexes keep their given label.
    """
    conf = np.atleast_2d(confidences)
    best = np.argmax(np.abs(conf), axis=0)
    value = conf[best, np.arange(conf.shape[1])]
    out = (np.sign(value) * (best + 1)).astype(np.int64)
    if labels is not None:
        out = np.where(labels != 0, labels, out)
    return out


def _iterate(A, f, mask, psi, n_iter):
    f = f.copy()
    f[mask] = psi[mask]
    for _ in range(n_iter):
        f = A @ f
        f[mask] = psi[mask]
    return f


def _iterate_to_convergence(A, f, mask, psi, tol=1e-14, max_iter=1_000_000):
    f = f.copy()
    f[mask] = psi[mask]
    for _ in range(max_iter):
        nxt = A @ f
        nxt[mask] = psi[mask]
        if np.abs(nxt - f).max(initial=0.0) < tol:
            return nxt
        f = nxt
    warnings.warn("iterative fallback did not reach tolerance", RuntimeWarning, stacklevel=3)
    return f


def convergence_threshold(xk: XkMatrix) -> float:
    """``(Lambda-2)/(2K+Lambda-2)``: the lazy probability must exceed this."""
    lam, K = xk.Lambda, xk.K
    return (lam - 2) / (2 * K + lam - 2)


def check_preconditions(prob: LabelProblem, xk: XkMatrix | None = None) -> None:
    """Raise :class:`PreconditionError` unless the closed-form limit is guaranteed."""
    xk = xk or prob.xk_matrix()
    thr = convergence_threshold(xk)
    # Lambda comes from an eigensolve, so p equal to the threshold may miss it by rounding
    if not prob.p > thr + THRESHOLD_ATOL:
        raise PreconditionError(f"p={prob.p} must exceed (Lambda-2)/(2K+Lambda-2)={thr:.12g}")
    for cls in range(1, prob.n_classes + 1):
        mask = prob.class_mask(cls)
        if not mask.any():
            raise PreconditionError(f"class {cls} has no labelled simplex")
        if not kernel_support_check(xk.L, mask):
            raise PreconditionError(
                f"a kernel vector of L is supported on the simplexes not labelled +-{cls}")


def unlabelled_block(prob: LabelProblem, cls: int, xk: XkMatrix | None = None):
    """``(A4, A3)``: rows of the normalized propagation matrix on simplexes not labelled ``+-cls``."""
    xk = xk or prob.xk_matrix()
    At = normalized_lazy_propagation(xk, prob.p)
    mask = prob.class_mask(cls)
    free = ~mask
    return At[np.ix_(free, free)], At[np.ix_(free, mask)]


def closed_form_limit(prob: LabelProblem, fallback: bool = True) -> np.ndarray:
    """Fixed point of the propagation, one row per class.

    The unlabelled block solves ``(I - A4) x = A3 psi``.  If ``I - A4`` has
    condition number above 1e12 this either falls back to iterating to
    convergence (with a warning) or raises.
    """
    xk = prob.xk_matrix()
    check_preconditions(prob, xk)
    At = normalized_lazy_propagation(xk, prob.p)
    out = np.zeros((prob.n_classes, prob.n))
    for cls in range(1, prob.n_classes + 1):
        mask = prob.class_mask(cls)
        psi = prob.psi(cls).astype(float)
        A4, A3 = unlabelled_block(prob, cls, xk)
        lhs = np.eye(A4.shape[0]) - A4
        f = psi.copy()
        if lhs.size:
            cond = np.linalg.cond(lhs)
            if not np.isfinite(cond) or cond > COND_LIMIT:
                if not fallback:
                    raise PreconditionError(f"I - A4 is ill-conditioned (condition number {cond:.3g})")
                warnings.warn(f"I - A4 ill-conditioned (condition number {cond:.3g}); iterating instead",
                              RuntimeWarning, stacklevel=2)
                f = _iterate_to_convergence(At, prob.initial(cls), mask, psi)
            else:
                f[~mask] = np.linalg.solve(lhs, A3 @ psi[mask])
        out[cls - 1] = f
    return out


def propagate(prob: LabelProblem) -> PropagationResult:
    """Run ``n_iter`` rounds of multiply-then-clamp for every class."""
    xk = prob.xk_matrix()
    At = normalized_lazy_propagation(xk, prob.p)
    conf = np.zeros((prob.n_classes, prob.n))
    for cls in range(1, prob.n_classes + 1):
        mask = prob.class_mask(cls)
        conf[cls - 1] = _iterate(At, prob.initial(cls), mask, prob.psi(cls).astype(float), prob.n_iter)
    notes = []
    limits = None
    support = all(kernel_support_check(xk.L, prob.class_mask(c)) for c in range(1, prob.n_classes + 1))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", RuntimeWarning)
            limits = closed_form_limit(prob, fallback=True)
    except PreconditionError as exc:
        notes.append(str(exc))
    except RuntimeWarning as exc:
        notes.append(str(exc))
    return PropagationResult(
        problem=prob, confidences=conf, limits=limits,
        assignment=assign(conf, prob.label_vector()),
        Lambda=xk.Lambda, K=xk.K, threshold=convergence_threshold(xk),
        kernel_support_ok=support, notes=notes)


@dataclass(frozen=True)
class FlowArrow:
    simplex: Simplex
    direction: int
    """+1 along the ascending vertex order, -1 against it, 0 unoriented."""
    cls: int
    magnitude: float


def flow_field(result: PropagationResult) -> list[FlowArrow]:
    """Per-edge arrows: orientation from the sign of the winning class, colour from its index."""
    c = result.problem.complex
    if not c.coords or any(v not in c.coords for v in c.vertices):
        raise ValueError("flow_field needs 2-D coordinates for every vertex")
    conf = result.confidences
    arrows = []
    for i, s in enumerate(c.simplices(result.problem.k)):
        a = int(result.assignment[i])
        mag = float(abs(conf[abs(a) - 1, i])) if a else 0.0
        arrows.append(FlowArrow(simplex=s, direction=int(np.sign(a)), cls=abs(a), magnitude=mag))
    return arrows


class EdgeLabelPropagation(ClassifierMixin, BaseEstimator):
    """Propagate oriented class labels over the edges of a simplicial complex.

    Parameters
    ----------
    complex : SimplicialComplex
        The complex whose ``k``-simplexes are classified.
    operator : {"full", "up", "down"} or array
        X^k matrix driving the propagation.
    p : float
        Lazy probability in [0, 1).
    n_iter : int
        Number of multiply-then-clamp rounds.
    init : {"zero", "indicator"} or array
        Initial confidences on the unlabelled simplexes.
    method : {"iterate", "closed"}
        Use the iterated confidences or the closed-form fixed point.
    k : int
        Dimension of the labelled simplexes (edges by default).

    ``fit(X, y)`` takes labelled vertex orderings ``X`` of shape ``(n, k+1)``
    and signed classes ``y``; ``predict`` returns signed classes for the
    queried orderings (reversing an ordering flips the sign).
    """

    def __init__(self, complex=None, operator="full", p=0.9, n_iter=1000, init="zero",
                 method="iterate", k=1):
        self.complex = complex
        self.operator = operator
        self.p = p
        self.n_iter = n_iter
        self.init = init
        self.method = method
        self.k = k

    def fit(self, X, y):
        if not isinstance(self.complex, SimplicialComplex):
            raise ValueError("EdgeLabelPropagation needs a SimplicialComplex as `complex`")
        if self.method not in ("iterate", "closed"):
            raise ValueError(f"method must be 'iterate' or 'closed', got {self.method!r}")
        prob = LabelProblem.from_oriented(self.complex, X, y, operator=self.operator, p=self.p,
                                          n_iter=self.n_iter, f0=self.init, k=self.k)
        self.problem_ = prob
        self.result_ = propagate(prob)
        self.n_classes_ = prob.n_classes
        self.classes_ = np.array([c for c in range(-prob.n_classes, prob.n_classes + 1) if c != 0])
        if self.method == "closed":
            self.confidences_ = closed_form_limit(prob)
            self.labels_ = assign(self.confidences_, prob.label_vector())
        else:
            self.confidences_ = self.result_.confidences
            self.labels_ = self.result_.assignment
        return self

    def _rows(self, X):
        check_is_fitted(self, "confidences_")
        oriented = check_oriented_simplices(X, self.complex, self.k)
        idx = np.array([self.complex.index(o.simplex) for o in oriented], dtype=np.int64)
        sign = np.array([o.sign for o in oriented], dtype=np.int64)
        return idx, sign

    def decision_function(self, X):
        """Oriented confidences, shape ``(n_queries, n_classes)``."""
        idx, sign = self._rows(X)
        return (self.confidences_[:, idx] * sign[None, :]).T

    def predict(self, X):
        idx, sign = self._rows(X)
        return self.labels_[idx] * sign


class HodgeProjector(TransformerMixin, BaseEstimator):
    """Project ``k``-cochains (rows of ``X``) onto one summand of the Hodge decomposition."""

    def __init__(self, complex=None, k=1, target="ker_laplacian"):
        self.complex = complex
        self.k = k
        self.target = target

    def fit(self, X=None, y=None):
        if not isinstance(self.complex, SimplicialComplex):
            raise ValueError("HodgeProjector needs a SimplicialComplex as `complex`")
        self.projection_ = algebra.projection_matrix(self.complex, self.k, self.target)
        self.n_features_in_ = self.projection_.shape[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "projection_")
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} cochain coordinates, got {X.shape[1]}")
        return X @ self.projection_.T


__all__ = [
    "EdgeLabelPropagation", "FlowArrow", "HodgeProjector", "LabelProblem", "PreconditionError",
    "PropagationResult", "assign", "check_preconditions", "closed_form_limit", "convergence_threshold",
    "flow_field", "kernel_support_check", "operator_matrix", "propagate", "unlabelled_block",
]
