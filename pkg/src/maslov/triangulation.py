"""Oriented simplicial approximations of spheres.

The base complex for S^m is the boundary of the cross-polytope in R^(m+1);
refinement is edgewise 2-subdivision (each m-simplex splits into 2^m
children through edge midpoints) followed by radial renormalization of the
new vertices.  Top simplices are stored positively oriented: the determinant
of the (m+1) vertex vectors is positive, which for a radially star-shaped
complex is exactly the global boundary-of-ball orientation.
"""

import itertools
from functools import lru_cache

import numpy as np

from ._params import MAX_SPHERE_DIM
from .exceptions import MaslovError


@lru_cache(maxsize=None)
def _child_patterns(m):
    """Combinatorial children of an m-simplex under edgewise 2-subdivision.

    Each child is a tuple of m+1 vertex descriptors, either ``('v', i)`` (a
    parent vertex) or ``('e', i, j)`` (the midpoint of parent edge ij).  The
    construction enumerates, in descending-coordinate form, the unit cube
    translates meeting the doubled simplex and the shuffles triangulating
    each translate; this yields exactly 2^m children.
    """
    patterns = []
    for p in range(m + 1):
        chain_a = list(range(p))
        chain_b = list(range(p, m))
        for pos_a in itertools.combinations(range(m), p):
            order = [None] * m
            ia = iter(chain_a)
            ib = iter(chain_b)
            set_a = set(pos_a)
            for idx in range(m):
                order[idx] = next(ia) if idx in set_a else next(ib)
            child = []
            c = np.array([1] * p + [0] * (m - p), dtype=float)
            for j in range(m + 1):
                u = np.zeros(m)
                for idx in range(j):
                    u[order[idx]] = 1.0
                s = c + u
                t = s / 2.0
                lam = np.empty(m + 1)
                lam[0] = 1.0 - t[0] if m > 0 else 1.0
                for i in range(1, m):
                    lam[i] = t[i - 1] - t[i]
                if m > 0:
                    lam[m] = t[m - 1]
                support = np.nonzero(lam > 1e-12)[0]
                if support.size == 1:
                    child.append(("v", int(support[0])))
                elif support.size == 2:
                    a, b = int(support[0]), int(support[1])
                    child.append(("e", a, b))
                else:  # pragma: no cover - impossible for halves summing to 1
                    raise AssertionError("bad barycentric support")
            patterns.append(tuple(child))
    assert len(patterns) == 2 ** m
    return tuple(patterns)


def _permutation_parity(rows):
    """Parity (+1/-1) of the permutations sorting each row."""
    rows = np.asarray(rows)
    n = rows.shape[1]
    inv = np.zeros(rows.shape[0], dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            inv += rows[:, i] > rows[:, j]
    return np.where(inv % 2 == 0, 1, -1)


def _orient_positive(vertices, simplices):
    """Reorder each simplex so the determinant of its vertex matrix is > 0."""
    simplices = np.array(simplices, dtype=np.int64)
    mats = vertices[simplices].transpose(0, 2, 1)
    dets = np.linalg.det(mats)
    if np.any(np.abs(dets) < 1e-14):
        raise MaslovError("degenerate simplex (zero radial volume)")
    flip = dets < 0
    simplices[flip, 0], simplices[flip, 1] = (
        simplices[flip, 1].copy(), simplices[flip, 0].copy())
    return simplices


def subdivide_rows(vertices, simplex_rows, midpoint_index, new_vertex_rows):
    """Edgewise 2-subdivision of the given simplex rows.

    ``midpoint_index`` maps a sorted global edge (a, b) to a vertex index and
    is extended in place; coordinates of freshly created midpoints are
    appended to ``new_vertex_rows``.  ``vertices`` is the current global
    vertex array (used only to place new midpoints).  Returns the child rows
    as an int64 array (not yet orientation-fixed).
    """
    m = simplex_rows.shape[1] - 1
    patterns = _child_patterns(m)
    n_existing = vertices.shape[0] + len(new_vertex_rows)
    children = np.empty((simplex_rows.shape[0] * len(patterns), m + 1), dtype=np.int64)
    row = 0
    for simplex in simplex_rows:
        for pattern in patterns:
            for slot, desc in enumerate(pattern):
                if desc[0] == "v":
                    children[row, slot] = simplex[desc[1]]
                else:
                    a, b = simplex[desc[1]], simplex[desc[2]]
                    key = (a, b) if a < b else (b, a)
                    idx = midpoint_index.get(key)
                    if idx is None:
                        va = vertices[a] if a < vertices.shape[0] else new_vertex_rows[a - vertices.shape[0]]
                        vb = vertices[b] if b < vertices.shape[0] else new_vertex_rows[b - vertices.shape[0]]
                        mid = va + vb
                        nrm = np.linalg.norm(mid)
                        if nrm < 1e-9:
                            raise MaslovError("midpoint of near-antipodal edge")
                        idx = n_existing
                        midpoint_index[key] = idx
                        new_vertex_rows.append(mid / nrm)
                        n_existing += 1
                    children[row, slot] = idx
            row += 1
    return children


class SphereTriangulation:
    """An oriented closed triangulation of S^m.

    Attributes
    ----------
    dim : sphere dimension m.
    vertices : (V, m+1) read-only float array of unit vectors.
    simplices : (T, m+1) read-only int array, each row positively oriented.
    level : number of edgewise subdivisions applied to the base complex.
    """

    def __init__(self, dim, vertices, simplices, level, _validated=False):
        self.dim = int(dim)
        vertices = np.array(vertices, dtype=float)
        norms = np.linalg.norm(vertices, axis=1, keepdims=True)
        vertices /= norms
        simplices = _orient_positive(vertices, simplices)
        vertices.setflags(write=False)
        simplices.setflags(write=False)
        self.vertices = vertices
        self.simplices = simplices
        self.level = int(level)
        if not _validated:
            self.check_closed()

    @property
    def num_vertices(self):
        return self.vertices.shape[0]

    @property
    def num_simplices(self):
        return self.simplices.shape[0]

    def refine(self):
        """One edgewise 2-subdivision with renormalized midpoints."""
        midpoints = {}
        new_rows = []
        children = subdivide_rows(self.vertices, self.simplices, midpoints, new_rows)
        if new_rows:
            vertices = np.vstack([self.vertices, np.array(new_rows)])
        else:
            vertices = self.vertices
        return SphereTriangulation(self.dim, vertices, children, self.level + 1,
                                   _validated=True)

    def check_closed(self):
        """Verify the closed-pseudomanifold and orientation invariants.

        Every (m-1)-face must be shared by exactly two top simplices and the
        induced orientations on it must cancel.
        """
        m = self.dim
        T = self.num_simplices
        faces = []
        signs = []
        for i in range(m + 1):
            face = np.delete(self.simplices, i, axis=1)
            parity = _permutation_parity(face)
            order = np.argsort(face, axis=1)
            faces.append(np.take_along_axis(face, order, axis=1))
            signs.append(parity * (-1) ** i)
        faces = np.vstack(faces)
        signs = np.concatenate(signs)
        keys, inverse, counts = np.unique(faces, axis=0, return_inverse=True,
                                          return_counts=True)
        if np.any(counts != 2):
            raise MaslovError("triangulation is not a closed pseudomanifold")
        sums = np.zeros(keys.shape[0], dtype=np.int64)
        np.add.at(sums, inverse, signs)
        if np.any(sums != 0):
            raise MaslovError("induced face orientations do not cancel")
        # simplices are stored positively oriented; re-assert
        mats = self.vertices[self.simplices].transpose(0, 2, 1)
        if np.any(np.linalg.det(mats) <= 0):
            raise MaslovError("simplex with non-positive radial volume")
        return T

    def max_edge_arc(self):
        """Largest geodesic edge length (used as the mesh size of the complex)."""
        worst = 0.0
        for i in range(self.dim + 1):
            for j in range(i + 1, self.dim + 1):
                dots = np.einsum(
                    "nd,nd->n",
                    self.vertices[self.simplices[:, i]],
                    self.vertices[self.simplices[:, j]],
                )
                worst = max(worst, float(np.arccos(np.clip(dots, -1, 1)).max()))
        return worst

    def barycenters(self):
        b = self.vertices[self.simplices].mean(axis=1)
        return b / np.linalg.norm(b, axis=1, keepdims=True)


@lru_cache(maxsize=32)
def _cached_base(m, level):
    n = m + 1
    vertices = np.vstack([np.eye(n), -np.eye(n)])
    simplices = []
    for signs in itertools.product((1, -1), repeat=n):
        simplices.append([i if s == 1 else n + i for i, s in enumerate(signs)])
    tri = SphereTriangulation(m, vertices, np.array(simplices), 0)
    for _ in range(level):
        tri = tri.refine()
    return tri


def base_triangulation(m, level):
    """Triangulation of S^m: cross-polytope boundary refined ``level`` times.

    The top-simplex count is 2^(m+1) * 2^(m*level).  Instances are cached and
    immutable; ``refine`` always returns a new object.
    """
    if not 1 <= m <= MAX_SPHERE_DIM:
        raise MaslovError(f"sphere dimension {m} outside supported range 1..{MAX_SPHERE_DIM}")
    if level < 0:
        raise MaslovError("refinement level must be >= 0")
    return _cached_base(int(m), int(level))
