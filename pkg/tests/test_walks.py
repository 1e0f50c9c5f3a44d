from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hodgewalk import (build_complex, dirichlet_evolution, dirichlet_propagation_matrix, dirichlet_transition_matrix,
                       generic_framework, homology_rank_from_walks, laplacian, marginal_difference_limit,
                       neumann_transition_matrix, transform_T, weighted_laplacian)
from hodgewalk import algebra, walks
from hodgewalk.walks import XkMatrix

from conftest import complexes

P_VALUES = (0.0, 0.3, 0.5, 0.9)


def test_dirichlet_triangle_entries(triangle):
    P = dirichlet_transition_matrix(triangle, 1, 0.5).validate()
    i, j = walks.state_index(triangle, 1, [0, 1]), walks.state_index(triangle, 1, [1, 2])
    assert P.matrix[j, i] == pytest.approx(0.25)
    assert P.matrix[P.theta, i] == pytest.approx(0.0)
    assert P.matrix[i, i] == 0.5


def test_dirichlet_isolated_edge_dies():
    c = build_complex([[0, 1], [2, 3, 4]])
    P = dirichlet_transition_matrix(c, 1, 0.5).validate()
    i = walks.state_index(c, 1, [0, 1])
    assert P.matrix[P.theta, i] == pytest.approx(0.5)


def test_dirichlet_without_neighbours():
    c = build_complex([[0, 1], [2, 3]])
    P = dirichlet_transition_matrix(c, 1, 0.25).validate()
    assert np.allclose(P.matrix[P.theta, :-1], 0.75)
    assert np.allclose(dirichlet_propagation_matrix(c, 1, 0.25), 0.25 * np.eye(2))


@pytest.mark.parametrize("p", [-0.1, 1.0, 1.5, "half"])
def test_bad_p(triangle, p):
    with pytest.raises(ValueError, match="p"):
        dirichlet_transition_matrix(triangle, 1, p)


def test_bad_k(triangle):
    with pytest.raises(ValueError):
        dirichlet_transition_matrix(triangle, 0, 0.5)
    with pytest.raises(ValueError):
        neumann_transition_matrix(triangle, 2, 0.5)


def test_transform_T(triangle):
    T = transform_T(triangle, 1)
    n = 3
    theta = np.zeros(2 * n + 1)
    theta[-1] = 1
    assert np.all(T @ theta == 0)
    e = np.zeros(2 * n + 1)
    e[1] = 1
    assert np.array_equal(T @ e, [0, 1, 0])
    e = np.zeros(2 * n + 1)
    e[n + 1] = 1
    assert np.array_equal(T @ e, [0, -1, 0])
    uniform = np.r_[np.full(2 * n, 1 / (2 * n)), 0]
    assert np.all(T @ uniform == 0)


def test_triangle_propagation(triangle, tetra):
    B = dirichlet_propagation_matrix(triangle, 1, 0.5)
    assert np.allclose(B, [[0.5, -0.25, 0.25], [-0.25, 0.5, -0.25], [0.25, -0.25, 0.5]], atol=0)
    Bt = dirichlet_propagation_matrix(tetra, 2, Fraction(1, 2))
    L = laplacian(tetra, 2, "down").toarray()
    assert np.array_equal(Bt, np.eye(4, dtype=object) - L.astype(object) * Fraction(1, 6))


def test_propagation_near_one(triangle):
    for p in (0.9, 0.99, 0.999):
        B = dirichlet_propagation_matrix(triangle, 1, p)
        assert np.abs(B - np.eye(3)).max() <= (1 - p) * 2


def test_normalization(triangle, two_triangles):
    B = dirichlet_propagation_matrix(triangle, 1, 0.5)
    assert np.array_equal(walks.normalize_propagation(B, triangle, 1, 0.5), B)
    assert walks.normalization_factor(two_triangles, 1, 0.5) == pytest.approx(4 / 3)
    with pytest.raises(ValueError):
        walks.normalization_factor(build_complex([[0, 1], [2, 3]]), 1, 0.5)


@settings(max_examples=50, deadline=None)
@given(complexes(), st.sampled_from(P_VALUES))
def test_intertwining_and_table(c, p):
    for k in range(1, c.dimension + 1):
        P = dirichlet_transition_matrix(c, k, p).validate()
        T = transform_T(c, k)
        B = dirichlet_propagation_matrix(c, k, p)
        assert np.abs(T @ P.matrix - B @ T).max() <= 1e-12
        assert np.abs(walks.propagation_from_transition(P) - B).max() <= 1e-12
        if c.max_face_degree(k) >= 2:
            fp = Fraction(p).limit_denominator(10)
            table = dirichlet_propagation_matrix(c, k, fp, form="table")
            closed = dirichlet_propagation_matrix(c, k, fp, form="closed")
            assert np.array_equal(table, closed)


@settings(max_examples=50, deadline=None)
@given(complexes(), st.sampled_from(P_VALUES))
def test_sign_symmetry(c, p):
    for k in range(1, c.dimension + 1):
        m = dirichlet_transition_matrix(c, k, p).matrix
        n = c.n_simplices(k)
        pp, mm = m[:n, :n], m[n:2 * n, n:2 * n]
        pm, mp = m[n:2 * n, :n], m[:n, n:2 * n]
        assert np.array_equal(pp, mm) and np.array_equal(pm, mp)


@settings(max_examples=50, deadline=None)
@given(complexes(), st.sampled_from((0.1, 0.3, 0.5, 0.9)))
def test_spectrum_of_B_and_norm_bounds(c, p):
    for k in range(1, c.dimension + 1):
        M = c.max_face_degree(k)
        if M < 2:
            continue
        B = dirichlet_propagation_matrix(c, k, p)
        top = (p * (M - 2) + 1) / (M - 1)
        vals, vecs = np.linalg.eigh(B)
        assert vals.min() >= 2 * p - 1 - 1e-10
        assert vals.max() <= top + 1e-10
        # eigenspace of the top eigenvalue is ker of the boundary
        kb = algebra.projection_matrix(c, k, "ker_boundary")
        top_space = vecs[:, np.abs(vals - top) < 1e-9]
        assert np.allclose(top_space @ top_space.T, kb, atol=1e-8)
        rate = max(abs(2 * p - 1), top)
        for tau in c.simplices(k):
            trace = walks.evolve(B, walks.indicator(c, k, tau), 8)
            norms = np.linalg.norm(trace, axis=1)
            n = np.arange(norms.size)
            assert np.all(norms <= rate ** n + 1e-12)
            if c.degree(tau) > 0:
                assert np.all(norms >= top ** n / np.sqrt(k + 2) - 1e-12)


def test_evolve(triangle):
    ev = dirichlet_evolution(triangle, 1, 0.5, [0, 1], 1)
    assert np.allclose(ev.trace[1], [0.5, -0.25, 0.25])
    ev = dirichlet_evolution(triangle, 1, 0.5, [0, 1], 200, stop_tol=1e-13)
    assert np.allclose(ev.trace[-1], [1 / 3, -1 / 3, 1 / 3], atol=1e-12)
    assert ev.steps < 200
    flat = walks.evolve(np.eye(3), np.array([1.0, 2.0, 3.0]), 5)
    assert np.all(flat == [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        walks.evolve(np.eye(3), np.ones(2), 3)


def test_limits(triangle, tetra):
    assert np.allclose(marginal_difference_limit(triangle, 1, [0, 1], 0.5), [1 / 3, -1 / 3, 1 / 3], atol=1e-10)
    assert np.linalg.norm(marginal_difference_limit(triangle, 1, [0, 1])) >= 1 / np.sqrt(3) - 1e-12
    c = build_complex([[0, 1, 2], [5, 6]])
    assert np.allclose(marginal_difference_limit(c, 1, [5, 6], 0.5), 0, atol=1e-10)
    for tau in tetra.simplices(2):
        lim = marginal_difference_limit(tetra, 2, tau, 0.5)
        assert np.linalg.norm(lim) > 0.1
        assert np.allclose(laplacian(tetra, 2).toarray() @ lim, 0, atol=1e-10)
    # reversed start flips the limit
    assert np.allclose(marginal_difference_limit(triangle, 1, [1, 0]), [-1 / 3, 1 / 3, -1 / 3])


def test_threshold_for_high_degree():
    # six triangles around a vertex: M = 6 for k = 1, threshold 4/14
    c = build_complex([[0, i, i % 6 + 1] for i in range(1, 7)])
    M = c.max_face_degree(1)
    assert walks.dirichlet_threshold(M) == pytest.approx(4 / 14)
    walks.check_dirichlet_convergence(c, 1, 0.5)


def test_divergence_reported():
    # 4-cycle is disorientable with constant degree: at p = threshold = 0 the spectrum hits -1
    c = build_complex([[0, 1], [1, 2], [2, 3], [0, 3]])
    with pytest.raises(ValueError, match="diverges"):
        marginal_difference_limit(c, 1, [0, 1], 0.0)
    walks.check_dirichlet_convergence(c, 1, 0.01)


@pytest.mark.parametrize("fixture, k, expected", [
    ("tetra", 2, 1), ("triangle", 1, 0), ("cycle3", 1, 1), ("wedge", 1, 2),
    ("two_triangles", 1, 0), ("two_triangles", 2, 0)])
def test_homology_from_walks(request, fixture, k, expected):
    c = request.getfixturevalue(fixture)
    assert homology_rank_from_walks(c, k, 0.5) == expected == algebra.betti(c, k)


@settings(max_examples=40, deadline=None)
@given(complexes())
def test_homology_from_walks_random(c):
    for k in range(1, c.dimension + 1):
        assert homology_rank_from_walks(c, k, 0.6) == algebra.betti(c, k)


def test_rate(triangle, tetra):
    r = walks.convergence_rate_check(triangle, 1, 0.5, [0, 1])
    assert r.predicted == pytest.approx(0.25)
    assert abs(r.fitted - 0.25) <= 1e-6
    lam = algebra.smallest_nontrivial_eigenvalue(tetra, 2)
    assert walks.predicted_rate(tetra, 2, 0.5) == pytest.approx(1 - 0.5 * lam / 3)
    with pytest.raises(ValueError):
        walks.convergence_rate_check(triangle, 1, 0.3, [0, 1])


@settings(max_examples=30, deadline=None)
@given(complexes(), st.sampled_from((0.5, 0.9)))
def test_rate_bound_random(c, p):
    for k in range(1, c.dimension + 1):
        if c.max_face_degree(k) < 2:
            continue
        tau = c.simplices(k)[0]
        try:
            r = walks.convergence_rate_check(c, k, p, tau)
        except ValueError:
            continue
        assert r.within_bound


# -- generic framework -------------------------------------------------------

def test_generic_down_equals_dirichlet(triangle):
    L = laplacian(triangle, 1, "down").toarray()
    g = generic_framework(L, 0.5, k=1)
    assert np.array_equal(g.xk.D, [2.0, 2.0, 2.0])
    assert g.xk.K == pytest.approx(1.0)
    assert np.allclose(g.A, dirichlet_propagation_matrix(triangle, 1, 0.5), atol=1e-15)


def test_generic_up(triangle):
    L = laplacian(triangle, 1, "up").toarray()
    g = generic_framework(L, 0.5, k=1)
    assert np.array_equal(g.xk.D, [1.0, 1.0, 1.0])
    assert g.xk.K == pytest.approx(2.0)
    assert np.allclose(g.A_tilde, np.eye(3) - L / 3)


def test_generic_rejects():
    with pytest.raises(ValueError, match="K = 0"):
        generic_framework(3 * np.eye(3), 0.5)
    with pytest.raises(ValueError):
        XkMatrix.from_matrix(np.array([[0.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(ValueError):
        XkMatrix.from_matrix(np.array([[-1.0, 0.5], [0.5, 1.0]]))
    with pytest.raises(ValueError):
        XkMatrix.from_matrix(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_generic_p_one(triangle):
    g = generic_framework(laplacian(triangle, 1, "down").toarray(), 1.0)
    assert np.allclose(g.A, np.eye(3))


def _generic_operators(c, k, rng):
    ops = [laplacian(c, k, "down").toarray()]
    if k < c.dimension:
        ops += [laplacian(c, k, "up").toarray()]
    ops.append(laplacian(c, k).toarray())
    w = [rng.uniform(0.5, 2.0, c.n_simplices(j)) if 0 <= j <= c.dimension else None for j in (k - 1, k, k + 1)]
    ops.append(weighted_laplacian(c, k, *w).toarray())
    return ops


@settings(max_examples=50, deadline=None)
@given(complexes(), st.sampled_from(P_VALUES))
def test_generic_intertwining(c, p):
    rng = np.random.default_rng(len(c))
    for k in range(1, c.dimension + 1):
        T = transform_T(c, k)
        for L in _generic_operators(c, k, rng):
            try:
                g = generic_framework(L, p, k=k)
            except ValueError:
                continue
            g.P.validate(lazy_diagonal=False)
            assert np.abs(g.A @ T - T @ g.P.matrix).max() <= 1e-12


@settings(max_examples=50, deadline=None)
@given(complexes(), st.floats(0.0, 0.95))
def test_generic_spectrum_above_threshold(c, p):
    rng = np.random.default_rng(len(c))
    for k in range(1, c.dimension + 1):
        for L in _generic_operators(c, k, rng):
            try:
                g = generic_framework(L, p, k=k)
            except ValueError:
                continue
            if p < g.p_threshold:
                continue
            vals = np.linalg.eigvals(g.A_tilde)
            assert np.abs(vals.imag).max() < 1e-9
            assert vals.real.min() >= -1e-9 and vals.real.max() <= 1 + 1e-9


@settings(max_examples=50, deadline=None)
@given(complexes(), st.sampled_from((0.3, 0.5, 0.9)))
def test_generic_limit_is_kernel_projection(c, p):
    for k in range(1, c.dimension + 1):
        L = laplacian(c, k).toarray()
        try:
            g = generic_framework(L, p, k=k)
        except ValueError:
            continue
        if p < g.p_threshold:
            continue
        # eigenvalue-1 projector of A_tilde: range D ker L along range L (orthogonal only for constant D)
        tau = walks.indicator(c, k, c.simplices(k)[0])
        x = np.linalg.matrix_power(g.A_tilde, 4000) @ tau
        q = algebra.orthonormal_range(algebra.projection_matrix(c, k, "ker_laplacian"))
        if q.shape[1] == 0:
            assert np.allclose(x, 0, atol=1e-6)
            continue
        dq = g.xk.D[:, None] * q
        proj = dq @ np.linalg.solve(q.T @ dq, q.T)
        assert np.allclose(x, proj @ tau, atol=1e-6)
        if np.ptp(g.xk.D) == 0:
            assert np.allclose(proj, q @ q.T)


def test_dirichlet_generic_coincidence(two_triangles):
    # every face of [1,2] has degree M = 3, so K = M - 1
    k, p = 1, 0.4
    g = generic_framework(laplacian(two_triangles, k, "down").toarray(), p, k=k)
    assert g.xk.K == pytest.approx(two_triangles.max_face_degree(k) - 1)
    assert np.allclose(g.A, dirichlet_propagation_matrix(two_triangles, k, p), atol=1e-14)


# -- Neumann walk ------------------------------------------------------------

def test_neumann_triangle(triangle):
    P = neumann_transition_matrix(triangle, 1, 0.5).validate()
    a, b = walks.state_index(triangle, 1, [0, 1]), walks.state_index(triangle, 1, [0, 2])
    assert P.matrix[b, a] == pytest.approx(0.25)
    assert np.allclose(P.matrix[P.theta, :-1], 0)
    assert np.all((P.matrix[:-1, :6] > 0).sum(axis=0) == 3)


def test_neumann_degree_zero_edge():
    c = build_complex([[0, 1, 2], [2, 3]])
    P = neumann_transition_matrix(c, 1, 0.5).validate()
    i = walks.state_index(c, 1, [2, 3])
    assert P.matrix[P.theta, i] == pytest.approx(0.5)


@settings(max_examples=50, deadline=None)
@given(complexes(), st.sampled_from(P_VALUES))
def test_neumann_matches_generic(c, p):
    for k in range(1, c.dimension):
        P = neumann_transition_matrix(c, k, p).validate()
        T = transform_T(c, k)
        A = walks.neumann_propagation_matrix(c, k, p)
        assert np.abs(T @ P.matrix - A @ T).max() <= 1e-12
        if np.all(c.degrees(k) > 0):
            g = generic_framework(laplacian(c, k, "up").toarray(), p, k=k)
            assert np.allclose(g.A, A, atol=1e-14)
            assert np.allclose(g.P.matrix, P.matrix, atol=1e-14)


def test_neumann_evolution(two_triangles):
    ev = dirichlet_evolution(two_triangles, 1, 0.5, [1, 2], 10, mode="neumann")
    assert ev.limit is None and ev.trace.shape == (11, 5)
    with pytest.raises(ValueError):
        dirichlet_evolution(two_triangles, 1, 0.5, [1, 2], 10, mode="robin")
