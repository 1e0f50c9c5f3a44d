"""Absorbing random walks on oriented k-simplexes and their propagation matrices.

State space layout used throughout: for ``n = |X^k|`` the oriented states are
indexed ``0..n-1`` (positive orientations, canonical order), ``n..2n-1``
(negative orientations, same order) and ``2n`` is the death state.
Transition matrices are left stochastic: ``P[dst, src] = Prob(src -> dst)``.
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import algebra
from .complex import AdjacencyKind, OrientedSimplex, SimplicialComplex, _check_walk_k

STOCHASTIC_ATOL = 1e-12
DIVERGENCE_ATOL = 1e-10


def _check_p(p, allow_one: bool = False):
    if not isinstance(p, numbers.Real) or isinstance(p, bool):
        raise ValueError(f"p must be a real number, got {p!r}")
    ok = 0 <= p <= 1 if allow_one else 0 <= p < 1
    if not ok:
        rng = "[0, 1]" if allow_one else "[0, 1)"
        raise ValueError(f"lazy probability p must lie in {rng}, got {p}")
    return p


def theta_index(n: int) -> int:
    return 2 * n


def state_labels(c: SimplicialComplex, k: int) -> list[str]:
    """Human-readable names of the states, in matrix order."""
    pos = [repr(OrientedSimplex(s)) for s in c.simplices(k)]
    return pos + ["-" + s for s in pos] + ["Theta"]


def state_index(c: SimplicialComplex, k: int, tau) -> int:
    """Index of an oriented simplex (vertex sequence or OrientedSimplex) or ``"Theta"``."""
    n = c.n_simplices(k)
    if isinstance(tau, str) and tau.lower() == "theta":
        return theta_index(n)
    tau = tau if isinstance(tau, OrientedSimplex) else OrientedSimplex.from_vertices(tau)
    if tau.dim != k:
        raise ValueError(f"{tau} is not a {k}-simplex")
    i = c.index(tau.simplex)
    return i if tau.sign > 0 else n + i


def indicator(c: SimplicialComplex, k: int, tau) -> np.ndarray:
    """Cochain ``1_tau``: +1 (or -1 for a negative orientation) on ``tau``."""
    tau = tau if isinstance(tau, OrientedSimplex) else OrientedSimplex.from_vertices(tau)
    if tau.dim != k:
        raise ValueError(f"{tau} is not a {k}-simplex")
    f = np.zeros(c.n_simplices(k))
    f[c.index(tau.simplex)] = tau.sign
    return f


@dataclass
class TransitionMatrix:
    """Left-stochastic matrix of an absorbing chain on oriented ``k``-simplexes plus death."""

    k: int
    p: float
    matrix: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return (self.matrix.shape[0] - 1) // 2

    @property
    def theta(self) -> int:
        return theta_index(self.n)

    def validate(self, lazy_diagonal: bool = True) -> "TransitionMatrix":
        m = self.matrix
        if m.shape != (2 * self.n + 1, 2 * self.n + 1):
            raise ValueError("transition matrix must be square of odd size 2n+1")
        if np.any(m < 0) or np.any(m > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if np.abs(m.sum(axis=0) - 1).max() > STOCHASTIC_ATOL:
            raise ValueError("columns of a left-stochastic matrix must sum to 1")
        e = np.zeros(m.shape[0])
        e[self.theta] = 1
        if not np.array_equal(m[:, self.theta], e):
            raise ValueError("the death state must be absorbing")
        if lazy_diagonal and not np.allclose(np.diag(m)[:-1], float(self.p), rtol=0, atol=STOCHASTIC_ATOL):
            raise ValueError("oriented states must stay put with probability p")
        return self


def transform_T(c: SimplicialComplex, k: int) -> np.ndarray:
    """Matrix sending a function on states to the cochain ``f(s+) - f(s-)``."""
    n = c.n_simplices(k)
    t = np.zeros((n, 2 * n + 1))
    t[:, :n] = np.eye(n)
    t[:, n:2 * n] = -np.eye(n)
    return t


def propagation_from_transition(P: TransitionMatrix | np.ndarray) -> np.ndarray:
    """The cochain operator ``A`` with ``T P = A T`` for a sign-symmetric chain."""
    m = P.matrix if isinstance(P, TransitionMatrix) else np.asarray(P)
    n = (m.shape[0] - 1) // 2
    return m[:n, :n] - m[n:2 * n, :n]


def _finish_chain(m: np.ndarray, n: int) -> None:
    """Fill the death row with residual mass and make the death state absorbing."""
    theta = theta_index(n)
    resid = 1.0 - m[:theta, :theta].sum(axis=0)
    if resid.min(initial=0.0) < -STOCHASTIC_ATOL:
        raise ValueError("outgoing probabilities exceed 1")
    m[theta, :theta] = np.maximum(resid, 0.0)
    m[theta, theta] = 1.0


# -- Dirichlet walk ---------------------------------------------------------

def dirichlet_jump_probability(M: int, k: int, p):
    """Probability of each jump to a neighbouring oriented simplex."""
    return (1 - p) / ((M - 1) * (k + 1))


def dirichlet_transition_matrix(c: SimplicialComplex, k: int, p: float) -> TransitionMatrix:
    """p-lazy Dirichlet k-walk: moves through shared faces onto similarly oriented simplexes.

    With ``M < 2`` no simplex has a neighbour, so each state either stays
    (probability ``p``) or dies.
    """
    _check_walk_k(c, k)
    _check_p(p)
    n = c.n_simplices(k)
    M = c.max_face_degree(k)
    m = np.zeros((2 * n + 1, 2 * n + 1))
    idx = np.arange(n)
    m[idx, idx] = p
    m[n + idx, n + idx] = p
    if M >= 2:
        q = float(dirichlet_jump_probability(M, k, p))
        for i, j, kind in c.lower_adjacent_pairs(k):
            if kind is AdjacencyKind.SIMILAR_LOWER:
                # i+ ~ j+ and i- ~ j-
                pairs = [(j, i), (i, j), (n + j, n + i), (n + i, n + j)]
            else:
                # i+ ~ j- and i- ~ j+
                pairs = [(n + j, i), (n + i, j), (j, n + i), (i, n + j)]
            for dst, src in pairs:
                m[dst, src] = q
    _finish_chain(m, n)
    return TransitionMatrix(k=k, p=float(p), matrix=m)


def _scalar_matrix(n, value, like_exact):
    if like_exact:
        out = np.full((n, n), Fraction(0), dtype=object)
        for i in range(n):
            out[i, i] = value
        return out
    return np.eye(n) * float(value)


def dirichlet_propagation_matrix(c: SimplicialComplex, k: int, p, form: str = "auto") -> np.ndarray:
    """Propagation matrix ``B`` with ``T P = B T`` for the Dirichlet walk.

    ``form="table"`` builds ``B`` entry by entry from lower adjacency;
    ``form="closed"`` uses ``((p(M-2)+1)/(M-1)) I - ((1-p)/((M-1)(k+1))) L_down``.
    ``"auto"`` picks the closed form unless ``M < 2``.  Passing ``p`` as a
    :class:`fractions.Fraction` evaluates either form in exact arithmetic
    (object array).
    """
    _check_walk_k(c, k)
    _check_p(p)
    exact = isinstance(p, Fraction)
    n = c.n_simplices(k)
    M = c.max_face_degree(k)
    if form == "auto":
        form = "closed" if M >= 2 else "table"
    if form == "table":
        b = _scalar_matrix(n, p, exact)
        if M >= 2:
            q = dirichlet_jump_probability(M, k, p)
            if not exact:
                q = float(q)
            for i, j, kind in c.lower_adjacent_pairs(k):
                # similar pairs carry +q so that T P = B T holds
                v = q if kind is AdjacencyKind.SIMILAR_LOWER else -q
                b[i, j] = v
                b[j, i] = v
        return b
    if form == "closed":
        if M < 2:
            raise ValueError("closed form needs M >= 2 (every face in at most one simplex otherwise)")
        lower = algebra.laplacian(c, k, "down").toarray()
        alpha = (p * (M - 2) + 1) / (M - 1)
        beta = (1 - p) / ((M - 1) * (k + 1))
        if exact:
            return _scalar_matrix(n, alpha, True) - lower.astype(object) * beta
        return np.eye(n) * float(alpha) - float(beta) * lower
    raise ValueError(f"form must be 'auto', 'table' or 'closed', got {form!r}")


def normalization_factor(c: SimplicialComplex, k: int, p) -> float:
    """``(M-1)/(p(M-2)+1)``, which rescales the top of the spectrum of ``B`` to 1."""
    _check_walk_k(c, k)
    M = c.max_face_degree(k)
    if M < 2:
        raise ValueError("normalization undefined for M < 2: the walk has no neighbours")
    return (M - 1) / (p * (M - 2) + 1)


def normalize_propagation(B: np.ndarray, c: SimplicialComplex, k: int, p) -> np.ndarray:
    return normalization_factor(c, k, p) * B


def dirichlet_threshold(M: int) -> float:
    """Convergence threshold ``(M-2)/(3M-4)`` on the lazy probability."""
    return (M - 2) / (3 * M - 4)


def check_dirichlet_convergence(c: SimplicialComplex, k: int, p) -> None:
    """Raise unless every eigenvalue of the normalized propagation matrix exceeds -1."""
    _check_p(p)
    if c.max_face_degree(k) < 2:
        return
    bt = normalize_propagation(dirichlet_propagation_matrix(c, k, float(p)), c, k, float(p))
    low = float(np.linalg.eigvalsh(bt)[0]) if bt.size else 0.0
    if low <= -1 + DIVERGENCE_ATOL:
        M = c.max_face_degree(k)
        raise ValueError(
            f"normalized marginal difference diverges: eigenvalue {low:.12g} <= -1 "
            f"(p={p}, threshold (M-2)/(3M-4)={dirichlet_threshold(M):.6g})")


# -- generic framework ------------------------------------------------------

@dataclass
class XkMatrix:
    """Symmetric matrix on positively oriented ``k``-simplexes usable to build a walk.

    ``D`` is the diagonal of ``L`` with zeros replaced by 1, and ``K`` the
    largest off-diagonal absolute column sum of ``L D^{-1}``.
    """

    L: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)
    K: float

    @classmethod
    def from_matrix(cls, L, atol: float = 1e-12) -> "XkMatrix":
        L = algebra.check_symmetric(L)
        diag = np.diag(L).copy()
        scale = max(1.0, float(np.abs(L).max(initial=0.0)))
        if np.any(diag < -atol * scale):
            raise ValueError("X^k matrix needs a non-negative diagonal")
        zero = np.abs(diag) <= atol * scale
        if zero.any() and (np.abs(L[zero, :]).max() > atol * scale):
            raise ValueError("a zero diagonal entry requires a zero row and column")
        D = np.where(zero, 1.0, diag)
        ld = L / D[None, :]
        off = np.abs(ld - np.diag(np.diag(ld)))
        K = float(off.sum(axis=0).max(initial=0.0))
        if K <= atol:
            raise ValueError("degenerate X^k matrix: K = 0 (no off-diagonal coupling)")
        return cls(L=L, D=D, K=K)

    @property
    def LD_inv(self) -> np.ndarray:
        """``L D^{-1}``; columns of zero-diagonal simplexes are zero."""
        return self.L / self.D[None, :]

    @property
    def Lambda(self) -> float:
        """Largest eigenvalue of ``D^{-1/2} L D^{-1/2}`` (the spectrum of ``L D^{-1}``)."""
        s = 1.0 / np.sqrt(self.D)
        sym = s[:, None] * self.L * s[None, :]
        return float(np.linalg.eigvalsh(sym)[-1])

    @property
    def n(self) -> int:
        return self.L.shape[0]


@dataclass
class GenericWalk:
    """Propagation matrix, its normalization and the underlying chain for an X^k matrix."""

    A: np.ndarray = field(repr=False)
    A_tilde: np.ndarray = field(repr=False)
    P: TransitionMatrix
    xk: XkMatrix = field(repr=False)
    p: float = 0.0

    @property
    def p_threshold(self) -> float:
        """``(Lambda-1)/(K+Lambda-1)``; at or above it the normalized spectrum lies in [0, 1]."""
        lam, K = self.xk.Lambda, self.xk.K
        return (lam - 1) / (K + lam - 1)


def lazy_propagation(xk: XkMatrix, p: float) -> np.ndarray:
    K = xk.K
    return ((p * (K - 1) + 1) / K) * np.eye(xk.n) - ((1 - p) / K) * xk.LD_inv


def normalized_lazy_propagation(xk: XkMatrix, p: float) -> np.ndarray:
    K = xk.K
    return np.eye(xk.n) - ((1 - p) / (p * (K - 1) + 1)) * xk.LD_inv


def chain_from_propagation(A: np.ndarray, k: int, p: float) -> TransitionMatrix:
    """Split a propagation matrix by sign into a chain on oriented states plus death."""
    n = A.shape[0]
    pos = np.where(A > 0, A, 0.0)
    neg = np.where(A < 0, -A, 0.0)
    m = np.zeros((2 * n + 1, 2 * n + 1))
    m[:n, :n] = pos
    m[n:2 * n, n:2 * n] = pos
    m[n:2 * n, :n] = neg
    m[:n, n:2 * n] = neg
    _finish_chain(m, n)
    return TransitionMatrix(k=k, p=float(p), matrix=m)


def generic_framework(L, p: float, k: int | None = None) -> GenericWalk:
    """Build ``A_{L,p}``, its normalization and the chain ``P_{L,p}`` for an X^k matrix ``L``.

    ``p = 1`` is allowed and gives the identity propagation.  Simplexes whose
    diagonal entry in ``L`` is zero keep ``(p(K-1)+1)/K`` of their mass and
    send the rest to the death state.
    """
    _check_p(p, allow_one=True)
    xk = L if isinstance(L, XkMatrix) else XkMatrix.from_matrix(L)
    A = lazy_propagation(xk, p)
    P = chain_from_propagation(A, k if k is not None else -1, p)
    return GenericWalk(A=A, A_tilde=normalized_lazy_propagation(xk, p), P=P, xk=xk, p=float(p))


# -- Neumann walk -----------------------------------------------------------

def neumann_transition_matrix(c: SimplicialComplex, k: int, p: float) -> TransitionMatrix:
    """p-lazy Neumann k-walk: moves through shared cofaces onto dissimilarly oriented simplexes.

    Each coneighbour of ``s`` is reached with probability ``(1-p)/((k+1) deg s)``;
    a simplex without cofaces dies with probability ``1-p``.
    """
    if not 1 <= k <= c.dimension - 1:
        raise ValueError(f"Neumann walk needs 1 <= k <= d-1 = {c.dimension - 1}, got {k}")
    _check_p(p)
    n = c.n_simplices(k)
    deg = c.degrees(k)
    up = algebra.laplacian(c, k, "up").toarray()
    m = np.zeros((2 * n + 1, 2 * n + 1))
    idx = np.arange(n)
    m[idx, idx] = p
    m[n + idx, n + idx] = p
    src, dst = np.nonzero(up.T)
    for s, d in zip(src, dst):
        if s == d:
            continue
        q = (1 - p) / ((k + 1) * deg[s])
        # up[d, s] = -1: ascending orientations are dissimilar (coneighbours)
        if up[d, s] < 0:
            m[d, s] = m[n + d, n + s] = q
        else:
            m[n + d, s] = m[d, n + s] = q
    _finish_chain(m, n)
    return TransitionMatrix(k=k, p=float(p), matrix=m)


def neumann_propagation_matrix(c: SimplicialComplex, k: int, p: float) -> np.ndarray:
    return propagation_from_transition(neumann_transition_matrix(c, k, p))


# -- evolution, limits, homology -------------------------------------------

@dataclass
class WalkEvolution:
    k: int
    p: float
    propagation: np.ndarray = field(repr=False)
    normalized: np.ndarray = field(repr=False)
    trace: np.ndarray = field(repr=False)
    limit: np.ndarray | None = field(default=None, repr=False)

    @property
    def steps(self) -> int:
        return self.trace.shape[0] - 1


def evolve(prop: np.ndarray, nu0, n: int, stop_tol: float | None = None) -> np.ndarray:
    """Iterates ``nu0, prop nu0, ..., prop^n nu0`` as rows.

    With ``stop_tol`` the iteration ends once successive iterates differ by
    less than ``stop_tol`` in max norm.
    """
    prop = np.asarray(prop, dtype=float)
    x = np.asarray(nu0, dtype=float)
    if prop.ndim != 2 or prop.shape[0] != prop.shape[1] or x.shape != (prop.shape[0],):
        raise ValueError(f"cannot apply a {prop.shape} matrix to a cochain of shape {x.shape}")
    if n < 0:
        raise ValueError("number of steps must be non-negative")
    trace = [x]
    for _ in range(n):
        nxt = prop @ trace[-1]
        trace.append(nxt)
        if stop_tol is not None and np.abs(nxt - trace[-2]).max(initial=0.0) < stop_tol:
            break
    return np.array(trace)


def marginal_difference_limit(c: SimplicialComplex, k: int, tau, p: float | None = None) -> np.ndarray:
    """Limit of the normalized marginal difference started at ``tau``: its projection onto ker B_k.

    If ``p`` is given the convergence precondition is checked first.
    """
    _check_walk_k(c, k)
    if p is not None:
        check_dirichlet_convergence(c, k, p)
    return algebra.projection_matrix(c, k, "ker_boundary") @ indicator(c, k, tau)


def dirichlet_evolution(c: SimplicialComplex, k: int, p: float, tau, n: int,
                        mode: str = "dirichlet", stop_tol: float | None = None) -> WalkEvolution:
    """Normalized marginal-difference trace for a Dirichlet or Neumann walk started at ``tau``."""
    _check_walk_k(c, k)
    _check_p(p)
    start = indicator(c, k, tau)
    if mode == "dirichlet":
        B = dirichlet_propagation_matrix(c, k, p)
        Bt = normalize_propagation(B, c, k, p) if c.max_face_degree(k) >= 2 else B
        limit = marginal_difference_limit(c, k, tau, p)
    elif mode == "neumann":
        B = neumann_propagation_matrix(c, k, p)
        Bt = ((k + 1) / (p * k + 1)) * B
        limit = None
    else:
        raise ValueError(f"mode must be 'dirichlet' or 'neumann', got {mode!r}")
    trace = evolve(Bt, start, n, stop_tol=stop_tol)
    return WalkEvolution(k=k, p=float(p), propagation=B, normalized=Bt, trace=trace, limit=limit)


def homology_rank_from_walks(c: SimplicialComplex, k: int, p: float) -> int:
    """Rank of the walk limits after projecting onto ker of the coboundary; equals ``betti(c, k)``."""
    _check_walk_k(c, k)
    check_dirichlet_convergence(c, k, p)
    # column j is the limit started at the j-th positively oriented simplex
    limits = algebra.projection_matrix(c, k, "ker_boundary")
    projected = algebra.projection_matrix(c, k, "ker_coboundary") @ limits
    if np.abs(projected).max(initial=0.0) < algebra.KERNEL_RTOL:
        return 0
    return algebra.numerical_rank(projected)


def predicted_rate(c: SimplicialComplex, k: int, p: float) -> float:
    """Geometric rate ``1 - (1-p) lambda_k / ((p(M-2)+1)(k+1))``."""
    M = c.max_face_degree(k)
    lam = algebra.smallest_nontrivial_eigenvalue(c, k)
    lam = 0.0 if lam is None else lam
    return 1 - (1 - p) * lam / ((p * (M - 2) + 1) * (k + 1))


@dataclass
class RateCheck:
    fitted: float
    predicted: float
    errors: np.ndarray = field(repr=False)

    @property
    def within_bound(self) -> bool:
        return self.fitted <= self.predicted + 1e-6


def convergence_rate_check(c: SimplicialComplex, k: int, p: float, tau, n_max: int = 60,
                           floor: float = 1e-9) -> RateCheck:
    """Fit the geometric decay of ``|E_n - E_inf|`` and compare with the predicted rate."""
    if p < 0.5:
        raise ValueError(f"rate bound requires p >= 1/2, got {p}")
    ev = dirichlet_evolution(c, k, p, tau, n_max)
    errors = np.linalg.norm(ev.trace - ev.limit[None, :], axis=1)
    # errors below floor * errors[0] are dominated by rounding
    keep = errors > floor * errors[0]
    if not keep.any():
        raise ValueError("error sequence is identically zero: exact convergence at step 0")
    steps = np.arange(errors.size)[keep]
    if steps.size < 2:
        fitted = 0.0
    else:
        slope = np.polyfit(steps, np.log(errors[keep]), 1)[0]
        fitted = float(np.exp(slope))
    return RateCheck(fitted=fitted, predicted=predicted_rate(c, k, p), errors=errors)
