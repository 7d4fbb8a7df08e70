"""Families of unitary matrices and their reduction to a normalized degree.

A family over S^(2k-1) into U(n) is reduced one size at a time through the
fibration of U(n) over the sphere of first columns: pre-rotate so the column
family misses the basis vector, rotate the column to it by a canonical
pointwise special-unitary correction, and keep the lower-right block.  After
reaching U(k), the degree of the column map divided by (k-1)! is the index.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._params import (
    DEFAULT_DEGREE_BUDGET,
    DEFAULT_SEARCH_BUDGET,
    SINGULAR_VALUE_FLOOR,
    UNITARITY_TOL,
)
from .degree import DegreeResult, certified_degree
from .exceptions import (
    DivisibilityError,
    MaslovError,
    MissedPointSearchError,
    UnitarityError,
)
from .sphere import SphereMapEvaluator, UnitVector
from .triangulation import base_triangulation

MAX_INDEX_ORDER = 3  # desk-scale cap on k


def interleave(Z):
    """Complex rows (N, n) -> real rows (N, 2n) as (Re z_1, Im z_1, ...)."""
    Z = np.asarray(Z)
    out = np.empty(Z.shape[:-1] + (2 * Z.shape[-1],), dtype=float)
    out[..., 0::2] = Z.real
    out[..., 1::2] = Z.imag
    return out


def deinterleave(X):
    """Real rows (N, 2n) -> complex rows (N, n)."""
    X = np.asarray(X, dtype=float)
    return X[..., 0::2] + 1j * X[..., 1::2]


class UnitaryFamily:
    """A pure evaluation rule from a parameter sphere into U(n).

    Parameters
    ----------
    param_dim : dimension 2k-1 of the parameter sphere.
    size : matrix size n.
    rule : point rule sigma -> (n, n) complex, or with ``vectorized=True`` a
        batch rule (N, 2k) -> (N, n, n).
    lipschitz : optional bound ||F(x) - F(y)||_op <= L * arc(x, y).
    tol : unitarity drift allowance, checked lazily on every evaluation.
    """

    def __init__(self, param_dim, size, rule, lipschitz=None, vectorized=False,
                 tol=UNITARITY_TOL, name="family"):
        if param_dim % 2 != 1:
            raise MaslovError("parameter sphere dimension must be odd (2k-1)")
        self.param_dim = int(param_dim)
        self.size = int(size)
        self._rule = rule
        self.lipschitz = None if lipschitz is None else float(lipschitz)
        self._vectorized = bool(vectorized)
        self.tol = float(tol)
        self.name = name

    @property
    def k(self):
        return (self.param_dim + 1) // 2

    def __call__(self, point):
        from .sphere import as_coords

        return self.batch(as_coords(point)[None, :])[0]

    def batch(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.param_dim + 1:
            raise MaslovError(
                f"{self.name}: expected parameters in R^{self.param_dim + 1}")
        if self._vectorized:
            M = np.asarray(self._rule(X), dtype=complex)
        else:
            M = np.stack([np.asarray(self._rule(x), dtype=complex) for x in X])
        if M.shape != (X.shape[0], self.size, self.size):
            raise MaslovError(f"{self.name}: rule returned shape {M.shape}")
        gram = np.conj(M.transpose(0, 2, 1)) @ M
        drift = np.abs(gram - np.eye(self.size)).max()
        if drift > self.tol:
            raise UnitarityError(
                f"{self.name}: unitarity drift {drift:.2e} exceeds {self.tol:.1e}")
        return M


def unitarize(M, floor=SINGULAR_VALUE_FLOOR):
    """Nearest unitary matrix (polar factor) of a full-rank matrix.

    Rejects matrices whose smallest singular value is below ``floor``: such
    an input is a degenerate frame, not a drifted one.
    """
    M = np.asarray(M, dtype=complex)
    U, s, Vh = np.linalg.svd(M)
    if s.min() <= floor:
        raise MaslovError(
            f"matrix is rank-deficient (sigma_min = {s.min():.2e}); not a valid frame")
    return U @ Vh


def polar_batch(M, floor=SINGULAR_VALUE_FLOOR):
    """Batched polar factors for (N, n, n) arrays."""
    U, s, Vh = np.linalg.svd(np.asarray(M, dtype=complex))
    if s.min(axis=-1).min() <= floor:
        raise MaslovError("degenerate frame in batched unitarization")
    return U @ Vh


def column_map(family, j=1):
    """The j-th column of the family as a sphere map S^(2k-1) -> S^(2n-1).

    Columns are read as real vectors with interleaved real/imaginary parts,
    the convention that fixes all degree signs in this package.
    """
    if not 1 <= j <= family.size:
        raise MaslovError(f"column index {j} outside 1..{family.size}")
    lip = None if family.lipschitz is None else family.lipschitz * math.pi / 2.0

    def rule(X):
        return interleave(family.batch(X)[:, :, j - 1])

    return SphereMapEvaluator(
        family.param_dim, 2 * family.size - 1, rule, lipschitz=lip,
        vectorized=True, name=f"col{j}({family.name})",
    )


def unitary_taking(a, b):
    """A unitary sending unit vector ``a`` to unit vector ``b``.

    Acts as the canonical special-unitary rotation on span{a, b} and as the
    identity on its orthogonal complement.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    n = a.size
    c = np.vdot(a, b)  # <a, b>, conjugate-linear in a
    resid = b - c * a
    s = np.linalg.norm(resid)
    if s < 1e-12:
        phase = c / abs(c)
        return np.eye(n, dtype=complex) + (phase - 1.0) * np.outer(a, np.conj(a))
    w = resid / s
    P = (np.eye(n, dtype=complex) - np.outer(a, np.conj(a))
         - np.outer(w, np.conj(w)))
    return (P + np.outer(c * a + s * w, np.conj(a))
            + np.outer(-s * a + np.conj(c) * w, np.conj(w)))


@dataclass(frozen=True)
class ReductionStage:
    """Audit record of one fibration step U(n) -> U(n-1)."""

    size_from: int
    size_to: int
    missed_line: object  # complex unit vector, or None for the trivial fast path
    clearance: float
    certified: bool
    pre_rotation: object  # constant unitary applied before the column rotation

    def to_dict(self):
        missed = None
        if self.missed_line is not None:
            missed = [[float(z.real), float(z.imag)] for z in self.missed_line]
        return {
            "size_from": self.size_from,
            "size_to": self.size_to,
            "missed_line": missed,
            "clearance": self.clearance,
            "certified": self.certified,
        }


@dataclass(frozen=True)
class ReductionTrace:
    stages: tuple = field(default_factory=tuple)

    def validate(self):
        sizes = [(s.size_from, s.size_to) for s in self.stages]
        for frm, to in sizes:
            if to != frm - 1:
                raise MaslovError("reduction stages must shrink size by one")
        for prev, nxt in zip(sizes, sizes[1:]):
            if nxt[0] != prev[1]:
                raise MaslovError("reduction stages out of order")
        return self

    def to_dict(self):
        return {"stages": [s.to_dict() for s in self.stages]}


def _line_clearance(columns, q):
    """Arc distance from sampled complex columns to the unit-scalar circle of q."""
    return float(np.arccos(np.clip(np.abs(columns @ np.conj(q)), 0.0, 1.0)).min())


def find_missed_line(family, budget=DEFAULT_SEARCH_BUDGET, seed=0,
                     candidates=128, hill_steps=60):
    """A complex line in C^n far from the first-column image of the family.

    The whole unit-scalar circle through the returned vector is missed, which
    is what the reduction's rotation needs to stay continuous.  Returns
    (unit complex vector, clearance, certified, mesh).
    """
    rng = np.random.default_rng(seed)
    tri = base_triangulation(family.param_dim, 0)
    while True:
        nxt = tri.refine()
        if nxt.num_vertices > budget or nxt.level > 10:
            break
        tri = nxt
    mesh = tri.max_edge_arc()
    cols = family.batch(tri.vertices)[:, :, 0]
    n = family.size

    def draw(size):
        z = rng.normal(size=(size, n)) + 1j * rng.normal(size=(size, n))
        return z / np.linalg.norm(z, axis=1, keepdims=True)

    cands = np.vstack([draw(candidates), np.eye(n, dtype=complex)])
    clear = np.arccos(np.clip(np.abs(cols @ np.conj(cands.T)), 0.0, 1.0)).min(axis=0)
    best = int(np.argmax(clear))
    q, r = cands[best].copy(), float(clear[best])
    for step in range(hill_steps):
        scale = 0.5 * 0.93 ** step
        prop = q + scale * (rng.normal(size=n) + 1j * rng.normal(size=n))
        prop /= np.linalg.norm(prop)
        rp = _line_clearance(cols, prop)
        if rp > r:
            q, r = prop, rp
    if r <= 1e-9:
        raise MissedPointSearchError(
            "first-column image meets every candidate line; resolution failure")
    certified = False
    clearance = r
    if family.lipschitz is not None:
        bound = r - family.lipschitz * mesh
        if bound > 0:
            certified = True
            clearance = bound
    return q, clearance, certified, mesh


def _first_column_constant_e1(family, seed=0, samples=64):
    rng = np.random.default_rng(seed)
    from .sphere import random_unit

    X = random_unit(rng, family.param_dim, samples)
    cols = family.batch(X)[:, :, 0]
    e1 = np.zeros(family.size, dtype=complex)
    e1[0] = 1.0
    return bool(np.abs(cols - e1).max() < 1e-12)


def reduce_once(family, k, seed=0, budget=DEFAULT_SEARCH_BUDGET):
    """One fibration step: a family into U(n) becomes a family into U(n-1).

    Finds a complex line missed by the first-column map, pre-multiplies by
    the constant unitary Q taking it to -e_1 (Q is null-homotopic, so the
    class is unchanged), rotates the first column to e_1 by the canonical
    determinant-1 rotation R(sigma) fixing the orthogonal complement of the
    column and e_1, and returns the lower-right block together with a stage
    record.  Families whose first column already is constantly e_1 are passed
    through without rotation.
    """
    n = family.size
    if n <= k:
        raise MaslovError("reduce_once needs matrix size above the index order")

    if _first_column_constant_e1(family, seed=seed):
        def block_rule(X):
            return family.batch(X)[:, 1:, 1:]

        reduced = UnitaryFamily(
            family.param_dim, n - 1, block_rule, vectorized=True,
            lipschitz=family.lipschitz, name=f"block({family.name})",
        )
        stage = ReductionStage(n, n - 1, None, math.pi / 2.0, True, None)
        return reduced, stage

    q, clearance, certified, _mesh = find_missed_line(family, budget=budget, seed=seed)
    e1 = np.zeros(n, dtype=complex)
    e1[0] = 1.0
    Q = unitary_taking(q, -e1)
    E11 = np.outer(e1, np.conj(e1))
    eye = np.eye(n, dtype=complex)

    def rule(X):
        G = Q[None, :, :] @ family.batch(X)
        u = G[:, :, 0]
        a = u[:, 0]
        resid = u.copy()
        resid[:, 0] = 0.0
        b = np.linalg.norm(resid, axis=1)
        if b.min() < 1e-12:
            # unreachable given line clearance; kept as an internal guard
            raise MaslovError("pre-rotated column became parallel to e_1")
        w = resid / b[:, None]

        def outer(x, y):
            return x[:, :, None] * np.conj(y)[:, None, :]

        col1 = np.conj(a)[:, None] * e1[None, :] - b[:, None] * w
        col2 = b[:, None] * e1[None, :] + a[:, None] * w
        e1b = np.broadcast_to(e1, w.shape)
        R = (eye[None, :, :] - E11[None, :, :] - outer(w, w)
             + outer(col1, e1b) + outer(col2, w))
        return (R @ G)[:, 1:, 1:]

    reduced = UnitaryFamily(
        family.param_dim, n - 1, rule, vectorized=True,
        name=f"reduce({family.name})",
    )
    stage = ReductionStage(n, n - 1, q, clearance, certified, Q)
    return reduced, stage


def mu_k_unitary(family, k, budget=DEFAULT_DEGREE_BUDGET, seed=0, jobs=1, column=1):
    """Index of order k of a family over S^(2k-1) into U(n).

    Reduces to U(k), takes the certified degree of the column map, checks
    that the degree is divisible by (k-1)! (a failed check is a resolution or
    continuity failure, never a valid output) and returns the quotient with
    the reduction trace and the degree certificate.
    """
    if k < 1 or k > MAX_INDEX_ORDER:
        raise MaslovError(f"index order k={k} outside 1..{MAX_INDEX_ORDER}")
    if k > family.size:
        raise MaslovError("index order cannot exceed the matrix size")
    if family.param_dim != 2 * k - 1:
        raise MaslovError(
            f"order-{k} index needs a parameter sphere of dimension {2 * k - 1}")

    seeds = np.random.SeedSequence(seed).spawn(family.size - k + 1)
    stages = []
    current = family
    search_budget = min(DEFAULT_SEARCH_BUDGET, max(budget // 8, 256))
    for i in range(family.size - k):
        current, stage = reduce_once(
            current, k, seed=int(seeds[i].generate_state(1)[0]), budget=search_budget)
        stages.append(stage)
    trace = ReductionTrace(tuple(stages)).validate()

    col = column_map(current, column)
    degree_seed = int(seeds[-1].generate_state(1)[0])
    result = certified_degree(col, budget=budget, seed=degree_seed, jobs=jobs)
    fact = math.factorial(k - 1)
    if result.degree % fact != 0:
        raise DivisibilityError(
            f"column degree {result.degree} is not divisible by (k-1)! = {fact}; "
            "the family is unresolved or discontinuous")
    return result.degree // fact, trace, result
