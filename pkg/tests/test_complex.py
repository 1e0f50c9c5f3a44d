import itertools

import numpy as np
import pytest
from hypothesis import given, settings

from hodgewalk import AdjacencyKind, OrientedSimplex, build_complex, induced_orientation_sign, lower_adjacency
from hodgewalk.complex import permutation_sign

from conftest import complexes


def test_build_triangle(triangle):
    assert triangle.shape == (3, 3, 1)
    assert triangle.dimension == 2


def test_build_tetra_and_cycle(tetra, cycle3):
    assert tetra.shape == (4, 6, 4)
    assert cycle3.shape == (3, 3)
    assert cycle3.dimension == 1


@pytest.mark.parametrize("bad", [[], [[0, 0, 1]], [[]], [[-1, 2]]])
def test_build_rejects(bad):
    with pytest.raises(ValueError):
        build_complex(bad)


def test_degrees(tetra, triangle):
    assert tetra.degree((0, 1)) == 2
    assert triangle.degree((0,)) == 2
    assert build_complex([[0]]).degree((0,)) == 0
    with pytest.raises(ValueError):
        triangle.degree((0, 5))


def test_max_face_degree(triangle, tetra, two_triangles):
    assert triangle.max_face_degree(1) == 2
    assert tetra.max_face_degree(2) == 2
    assert two_triangles.max_face_degree(2) == 2
    assert two_triangles.max_face_degree(1) == 3
    with pytest.raises(ValueError):
        triangle.max_face_degree(3)
    with pytest.raises(ValueError):
        triangle.max_face_degree(0)


def test_induced_orientation():
    sigma = OrientedSimplex.from_vertices([0, 1, 2])
    assert induced_orientation_sign(sigma, (1, 2)) == 1
    assert induced_orientation_sign(sigma, (0, 2)) == -1
    assert induced_orientation_sign(sigma, (0, 1)) == 1
    assert induced_orientation_sign(-sigma, (1, 2)) == -1
    assert induced_orientation_sign([1, 0, 2], (0, 2)) == 1
    with pytest.raises(ValueError):
        induced_orientation_sign(sigma, (0, 3))


def test_oriented_simplex():
    o = OrientedSimplex.from_vertices([2, 0, 1])
    assert o.simplex == (0, 1, 2) and o.sign == 1
    o = OrientedSimplex.from_vertices([1, 0])
    assert o.sign == -1 and (-o).sign == 1 and (-o).simplex == o.simplex
    assert repr(o) == "-[0, 1]"


@given(st_perm=__import__("hypothesis").strategies.permutations(list(range(5))))
def test_permutation_sign_matches_inversions(st_perm):
    inversions = sum(1 for i, j in itertools.combinations(range(5), 2) if st_perm[i] > st_perm[j])
    assert permutation_sign(st_perm) == (-1) ** inversions


def test_lower_adjacency():
    assert lower_adjacency([0, 1], [0, 2]) is AdjacencyKind.DISSIMILAR_LOWER
    assert lower_adjacency([0, 1], [1, 2]) is AdjacencyKind.SIMILAR_LOWER
    assert lower_adjacency([0, 1], [2, 3]) is AdjacencyKind.NOT_LOWER_ADJACENT
    assert lower_adjacency([0, 1, 2], [1, 2, 3]) is AdjacencyKind.DISSIMILAR_LOWER


@given(complexes(max_dim=2))
def test_adjacency_symmetric_under_double_flip(c):
    if c.dimension < 1:
        return
    for k in range(1, c.dimension + 1):
        for a, b in itertools.combinations(c.simplices(k), 2):
            oa, ob = OrientedSimplex(a), OrientedSimplex(b)
            kind = lower_adjacency(oa, ob)
            assert lower_adjacency(ob, oa) is kind
            assert lower_adjacency(-oa, -ob) is kind
            if kind is not AdjacencyKind.NOT_LOWER_ADJACENT:
                assert lower_adjacency(-oa, ob) is not kind


@given(complexes())
def test_closure_and_faces(c):
    for k in range(c.dimension + 1):
        for s in c.simplices(k):
            assert list(s) == sorted(set(s))
            faces = c.faces(s)
            assert len(faces) == (k + 1 if k > 0 else 0)
            for f in faces:
                assert f in c
                assert s in c.cofaces(f)
        assert len(set(c.simplices(k))) == c.n_simplices(k)


def test_components(two_triangles, wedge):
    assert len(two_triangles.k_connected_components(2)) == 1
    assert len(wedge.k_connected_components(1)) == 1
    disjoint = build_complex([[0, 1, 2], [3, 4, 5]])
    assert len(disjoint.k_connected_components(2)) == 2


def test_disorientation(cycle4, cycle3, tetra, two_triangles):
    (comp,) = cycle4.k_connected_components(1)
    assert cycle4.disorientation(comp) is not None
    (comp,) = cycle3.k_connected_components(1)
    assert cycle3.disorientation(comp) is None
    # hollow tetrahedron is orientable, odd cycle of triangles in the dual graph
    (comp,) = tetra.k_connected_components(2)
    assert tetra.disorientation(comp) is None
    (comp,) = two_triangles.k_connected_components(2)
    signs = two_triangles.disorientation(comp)
    a, b = (OrientedSimplex(s, signs[s]) for s in comp)
    assert lower_adjacency(a, b) is AdjacencyKind.DISSIMILAR_LOWER


def test_attains_bound(cycle4, cycle3):
    assert cycle4.attains_spectral_bound(1)
    assert not cycle3.attains_spectral_bound(1)


@settings(max_examples=50)
@given(complexes())
def test_attainment_matches_spectrum(c):
    from hodgewalk import laplacian
    for k in range(1, c.dimension + 1):
        if c.max_face_degree(k) == 0:
            continue
        top = (k + 1) * c.max_face_degree(k)
        eig = np.linalg.eigvalsh(laplacian(c, k, "down").toarray())
        assert eig.max() <= top + 1e-10
        assert c.attains_spectral_bound(k) == bool(abs(eig.max() - top) < 1e-9)


def test_equality_and_index(triangle):
    assert triangle == build_complex([[2, 1, 0]])
    assert triangle.index((0, 2)) == 1
    assert (0, 1) in triangle and (0, 3) not in triangle
