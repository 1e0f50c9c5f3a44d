"""Finite abstract simplicial complexes with the ascending-order orientation.

Every simplex is stored as a strictly ascending vertex tuple, and that tuple
order *is* its positive orientation.  Simplexes of a given dimension are kept
in lexicographic order, which fixes the basis of every cochain space used by
the rest of the package.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

Simplex = tuple[int, ...]


def permutation_sign(seq: Sequence[int]) -> int:
    """Parity of the permutation sorting ``seq`` (+1 even, -1 odd)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class OrientedSimplex:
    """A simplex together with one of its two orientations.

    ``sign=+1`` means the ascending vertex order, ``sign=-1`` the opposite one.
    """

    simplex: Simplex
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if list(self.simplex) != sorted(set(self.simplex)):
            raise ValueError(f"simplex must be a strictly ascending tuple, got {self.simplex}")

    @classmethod
    def from_vertices(cls, vertices: Sequence[int]) -> "OrientedSimplex":
        """Oriented simplex ``[v0, ..., vk]`` given by an arbitrary vertex ordering."""
        vertices = [int(v) for v in vertices]
        if len(set(vertices)) != len(vertices):
            raise ValueError(f"repeated vertex in {vertices}")
        return cls(tuple(sorted(vertices)), permutation_sign(vertices))

    @property
    def dim(self) -> int:
        return len(self.simplex) - 1

    def __neg__(self) -> "OrientedSimplex":
        return OrientedSimplex(self.simplex, -self.sign)

    def __repr__(self):
        s = "" if self.sign > 0 else "-"
        return f"{s}[{', '.join(map(str, self.simplex))}]"


class AdjacencyKind(enum.Enum):
    SIMILAR_LOWER = "similar"
    DISSIMILAR_LOWER = "dissimilar"
    NOT_LOWER_ADJACENT = "none"


def _as_oriented(s) -> OrientedSimplex:
    if isinstance(s, OrientedSimplex):
        return s
    return OrientedSimplex.from_vertices(s)


def induced_orientation_sign(sigma, face: Iterable[int]) -> int:
    """Sign of the orientation ``sigma`` induces on ``face``.

    The face's own orientation is taken to be its ascending order.
    ``sigma`` may be an :class:`OrientedSimplex` or a vertex sequence (read as
    the oriented simplex with that ordering).
    """
    sigma = _as_oriented(sigma)
    face = tuple(sorted(face))
    missing = set(sigma.simplex) - set(face)
    if len(face) != len(sigma.simplex) - 1 or len(missing) != 1 or not set(face) <= set(sigma.simplex):
        raise ValueError(f"{face} is not a face of {sigma.simplex}")
    i = sigma.simplex.index(missing.pop())
    return sigma.sign * (-1) ** i


def lower_adjacency(a, b) -> AdjacencyKind:
    """Classify two oriented simplexes of equal dimension by their common face.

    Similar means they induce opposite orientations on the shared face.
    """
    a, b = _as_oriented(a), _as_oriented(b)
    if a.dim != b.dim:
        raise ValueError("simplexes must have the same dimension")
    if a.simplex == b.simplex:
        raise ValueError("lower adjacency is defined for distinct simplexes")
    common = tuple(sorted(set(a.simplex) & set(b.simplex)))
    if len(common) != a.dim or a.dim == 0:
        return AdjacencyKind.NOT_LOWER_ADJACENT
    if induced_orientation_sign(a, common) == induced_orientation_sign(b, common):
        return AdjacencyKind.DISSIMILAR_LOWER
    return AdjacencyKind.SIMILAR_LOWER


def _faces(s: Simplex) -> list[Simplex]:
    return [s[:i] + s[i + 1:] for i in range(len(s))]


class SimplicialComplex:
    """Immutable inclusion-closed set of simplexes.

    Use :func:`build_complex` to construct one from maximal simplexes.
    """

    def __init__(self, simplices_by_dim: Sequence[Sequence[Simplex]],
                 coords: Mapping[int, tuple[float, float]] | None = None):
        self._simplices = tuple(tuple(sorted(level)) for level in simplices_by_dim)
        self._index = tuple({s: i for i, s in enumerate(level)} for level in self._simplices)
        self.coords = dict(coords) if coords else None
        if self.coords is not None:
            unknown = set(self.coords) - set(self.vertices)
            if unknown:
                raise ValueError(f"coordinates given for unknown vertices {sorted(unknown)}")
        cofaces: list[list[list[int]]] = [[[] for _ in level] for level in self._simplices]
        for j in range(1, len(self._simplices)):
            for idx, s in enumerate(self._simplices[j]):
                for f in _faces(s):
                    try:
                        cofaces[j - 1][self._index[j - 1][f]].append(idx)
                    except KeyError:
                        raise ValueError(f"face {f} of {s} missing: not closed under inclusion") from None
        self._cofaces = tuple(tuple(tuple(c) for c in level) for level in cofaces)
        self._degrees = tuple(np.array([len(c) for c in level], dtype=np.int64) for level in cofaces)

    # -- basic queries -----------------------------------------------------
    @property
    def dimension(self) -> int:
        return len(self._simplices) - 1

    @property
    def vertices(self) -> list[int]:
        return [s[0] for s in self._simplices[0]]

    def simplices(self, k: int) -> tuple[Simplex, ...]:
        """The ``k``-simplexes in canonical (lexicographic) order; empty outside ``0..d``."""
        if 0 <= k <= self.dimension:
            return self._simplices[k]
        return ()

    def n_simplices(self, k: int) -> int:
        return len(self.simplices(k))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(level) for level in self._simplices)

    def __contains__(self, s) -> bool:
        s = tuple(sorted(s))
        k = len(s) - 1
        return 0 <= k <= self.dimension and s in self._index[k]

    def __iter__(self):
        for level in self._simplices:
            yield from level

    def __len__(self) -> int:
        return sum(self.shape)

    def __eq__(self, other):
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return self._simplices == other._simplices and self.coords == other.coords

    def __hash__(self):
        return hash(self._simplices)

    def __repr__(self):
        return f"SimplicialComplex(dim={self.dimension}, shape={self.shape})"

    def index(self, s) -> int:
        """Position of simplex ``s`` in the canonical basis of its dimension."""
        key = tuple(sorted(s))
        k = len(key) - 1
        if not (0 <= k <= self.dimension) or key not in self._index[k]:
            raise ValueError(f"{key} is not a simplex of this complex")
        return self._index[k][key]

    def faces(self, s) -> list[Simplex]:
        s = tuple(sorted(s))
        self.index(s)
        return _faces(s) if len(s) > 1 else []

    def cofaces(self, s) -> list[Simplex]:
        s = tuple(sorted(s))
        k = len(s) - 1
        i = self.index(s)
        return [self._simplices[k + 1][j] for j in self._cofaces[k][i]]

    def degree(self, s) -> int:
        """Number of cofaces of ``s``."""
        s = tuple(sorted(s))
        return int(self._degrees[len(s) - 1][self.index(s)])

    def degrees(self, k: int) -> np.ndarray:
        """Degrees of all ``k``-simplexes in canonical order."""
        if not 0 <= k <= self.dimension:
            raise ValueError(f"k={k} outside 0..{self.dimension}")
        return self._degrees[k].copy()

    def max_face_degree(self, k: int) -> int:
        """``M``: the largest degree among the ``(k-1)``-simplexes."""
        _check_walk_k(self, k)
        return int(self._degrees[k - 1].max())

    def maximal_simplices(self) -> list[Simplex]:
        out = []
        for k, level in enumerate(self._simplices):
            out.extend(s for i, s in enumerate(level) if self._degrees[k][i] == 0)
        return sorted(out, key=lambda s: (len(s), s))

    def subcomplex(self, simplexes: Iterable) -> "SimplicialComplex":
        """Inclusion closure of ``simplexes`` inside this complex (coords kept)."""
        simplexes = [tuple(sorted(s)) for s in simplexes]
        for s in simplexes:
            self.index(s)
        sub = build_complex(simplexes)
        if self.coords:
            sub = sub.with_coords({v: self.coords[v] for v in sub.vertices if v in self.coords})
        return sub

    def with_coords(self, coords: Mapping[int, tuple[float, float]]) -> "SimplicialComplex":
        return SimplicialComplex(self._simplices, coords)

    # -- adjacency ---------------------------------------------------------
    def lower_adjacent_pairs(self, k: int):
        """Yield ``(i, j, kind)`` for every lower-adjacent pair ``i < j`` of ``k``-simplexes."""
        _check_walk_k(self, k)
        members: list[list[int]] = [[] for _ in self._simplices[k - 1]]
        for i, s in enumerate(self._simplices[k]):
            for f in _faces(s):
                members[self._index[k - 1][f]].append(i)
        level = self._simplices[k]
        for group in members:
            for i, j in combinations(group, 2):
                kind = lower_adjacency(OrientedSimplex(level[i]), OrientedSimplex(level[j]))
                yield i, j, kind

    def k_connected_components(self, k: int) -> list[list[Simplex]]:
        """Classes of ``k``-simplexes under the transitive closure of lower adjacency.

        Ordered by their smallest simplex; each class in canonical order.
        """
        _check_walk_k(self, k)
        n = self.n_simplices(k)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for cof in self._cofaces[k - 1]:
            for j in cof[1:]:
                ra, rb = find(cof[0]), find(j)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups: dict[int, list[Simplex]] = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(self._simplices[k][i])
        return [groups[r] for r in sorted(groups)]

    def disorientation(self, component: Sequence) -> dict[Simplex, int] | None:
        """Signs making every lower-adjacent pair of ``component`` dissimilar, or ``None``.

        ``component`` must be a single k-connected component.  The first
        simplex (canonical order) gets sign +1.
        """
        comp = sorted(tuple(sorted(s)) for s in component)
        if not comp:
            raise ValueError("empty component")
        k = len(comp[0]) - 1
        if any(len(s) - 1 != k for s in comp):
            raise ValueError("component mixes dimensions")
        if k == 0:
            raise ValueError("disorientation needs simplexes of dimension >= 1")
        full = {tuple(c) for c in self.k_connected_components(k) if set(comp) & set(c)}
        if len(full) != 1 or set(next(iter(full))) != set(comp):
            raise ValueError("input is not a single k-connected component")

        members: dict[Simplex, list[Simplex]] = {}
        for s in comp:
            for f in _faces(s):
                members.setdefault(f, []).append(s)
        neighbours: dict[Simplex, list[tuple[Simplex, int]]] = {s: [] for s in comp}
        for f, group in members.items():
            for a, b in combinations(group, 2):
                # +1 when the ascending orientations are already dissimilar
                rel = 1 if induced_orientation_sign(OrientedSimplex(a), f) == \
                    induced_orientation_sign(OrientedSimplex(b), f) else -1
                neighbours[a].append((b, rel))
                neighbours[b].append((a, rel))

        signs = {comp[0]: 1}
        queue = deque([comp[0]])
        while queue:
            s = queue.popleft()
            for t, rel in neighbours[s]:
                want = signs[s] * rel
                if t not in signs:
                    signs[t] = want
                    queue.append(t)
                elif signs[t] != want:
                    return None
        for s in comp:
            for t, _ in neighbours[s]:
                kind = lower_adjacency(OrientedSimplex(s, signs[s]), OrientedSimplex(t, signs[t]))
                if kind is not AdjacencyKind.DISSIMILAR_LOWER:
                    raise AssertionError("disorientation re-check failed")
        return signs

    def attains_spectral_bound(self, k: int) -> bool:
        """True iff ``(k+1)M`` is an eigenvalue of the down ``k``-Laplacian.

        That happens exactly when ``k == d`` and some ``d``-connected component
        is disorientable with every ``(d-1)``-face of degree ``M``.
        """
        _check_walk_k(self, k)
        if k != self.dimension:
            return False
        M = self.max_face_degree(k)
        for comp in self.k_connected_components(k):
            face_deg = {self.degree(f) for s in comp for f in _faces(s)}
            if face_deg == {M} and self.disorientation(comp) is not None:
                return True
        return False


def _check_walk_k(c: SimplicialComplex, k: int) -> None:
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= c.dimension:
        raise ValueError(f"k must satisfy 1 <= k <= d={c.dimension}, got {k}")


def build_complex(maximal_simplexes: Iterable[Iterable[int]],
                  coords: Mapping[int, tuple[float, float]] | None = None) -> SimplicialComplex:
    """Inclusion closure of the given vertex sets.

    >>> build_complex([[0, 1, 2]]).shape
    (3, 3, 1)
    """
    tops = []
    for s in maximal_simplexes:
        verts = [int(v) for v in s]
        if not verts:
            raise ValueError("simplexes must be nonempty")
        if len(set(verts)) != len(verts):
            raise ValueError(f"repeated vertex in simplex {verts}")
        if min(verts) < 0:
            raise ValueError(f"vertex identifiers must be non-negative, got {verts}")
        tops.append(tuple(sorted(verts)))
    if not tops:
        raise ValueError("cannot build a complex from an empty list of simplexes")
    d = max(len(s) for s in tops) - 1
    levels: list[set[Simplex]] = [set() for _ in range(d + 1)]
    for s in set(tops):
        if s in levels[len(s) - 1]:
            continue
        for j in range(len(s)):
            levels[j].update(combinations(s, j + 1))
    return SimplicialComplex([sorted(level) for level in levels], coords)
