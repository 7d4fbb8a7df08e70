"""Certified integer degree of maps between spheres of equal dimension.

The core is a piecewise-linear count: a target value y is covered by a top
simplex when y is a positive combination of the images of its vertices, and
the simplex then contributes the orientation sign of that image frame.
Certification combines agreement of the count across two consecutive
refinement levels with an independent Jacobian quadrature estimate.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._params import (
    DEFAULT_DEGREE_BUDGET,
    DEGENERATE_DET_TOL,
    DEGENERATE_FRACTION,
    FD_STEP,
    INTEGRAL_AGREEMENT,
    MAX_LADDER_LEVELS,
    MAX_REGULAR_RETRIES,
    MAX_SPHERE_DIM,
    REGULAR_BARY_TOL,
)
from .exceptions import (
    InsufficientRefinementError,
    MaslovError,
    NonRegularValueError,
)
from .sphere import UnitVector, oriented_tangent_frames, random_unit
from .triangulation import base_triangulation, subdivide_rows, _orient_positive

_CHUNK = 200_000


@dataclass(frozen=True)
class DegreeResult:
    """Outcome of a certified degree computation.

    ``certified`` is true only when two consecutive refinement levels gave
    the same integer and the quadrature estimate is within 0.25 of it.
    """

    degree: int
    level_used: int
    regular_value: UnitVector
    retries: int
    integral_estimate: float
    certified: bool
    evaluations: int = 0
    history: tuple = field(default_factory=tuple)
    budget_limited: bool = False

    def to_dict(self):
        return {
            "degree": self.degree,
            "level_used": self.level_used,
            "regular_value": [float(c) for c in self.regular_value.coords],
            "retries": self.retries,
            "integral_estimate": self.integral_estimate,
            "certified": self.certified,
            "evaluations": self.evaluations,
            "history": list(self.history),
        }


def _cells(m, level):
    return 2 ** (m + 1) * 2 ** (m * level)


def _kernel(images, rows, y, mesh):
    """Contributions of one block of simplices.

    Returns (signed count, number of near simplices with degenerate images,
    boundary flag, indices-of-near-rows).  ``near`` marks simplices whose
    image cap could plausibly contain y (vertex-image spread tripled plus a
    mesh-scaled floor, a heuristic backed by the level-agreement and
    quadrature certificates); only near simplices can contribute and only
    they need refinement.
    """
    W = images[rows]                       # (N, m+1, d): vertex images as rows
    d = W.shape[2]
    b = W.mean(axis=1)
    bn = np.linalg.norm(b, axis=1)
    wild = bn < 0.2
    bhat = np.where(wild[:, None], 0.0, b / np.maximum(bn, 1e-30)[:, None])
    cos_spread = np.einsum("nvd,nd->nv", W, bhat).min(axis=1)
    rho = np.arccos(np.clip(cos_spread, -1.0, 1.0))
    ang_y = np.arccos(np.clip(bhat @ y, -1.0, 1.0))
    margin = 2.0 * rho + 1e-3 * mesh
    near = wild | (ang_y <= rho + margin)
    near_idx = np.nonzero(near)[0]
    if near_idx.size == 0:
        return 0, 0, False, near_idx

    Wt = W[near_idx].transpose(0, 2, 1)    # columns = vertex images
    dets = np.linalg.det(Wt)
    degen = np.abs(dets) < DEGENERATE_DET_TOL
    n_degen = int(degen.sum())
    good = ~degen
    signed = 0
    boundary = False
    if good.any():
        sol = np.linalg.solve(Wt[good], np.broadcast_to(y, (int(good.sum()), d))[..., None])
        mu = sol[..., 0]
        mn = mu.min(axis=1)
        if np.any((mn > -REGULAR_BARY_TOL) & (mn < REGULAR_BARY_TOL)):
            boundary = True
        cover = mn > REGULAR_BARY_TOL
        signed = int(np.sign(dets[good][cover]).sum())
    return signed, n_degen, boundary, near_idx


def _contributions(images, simplex_rows, y, mesh, jobs=1):
    """Signed covering count over all given simplices.

    Raises NonRegularValueError when y lies on a simplicial boundary.  Also
    returns the degenerate-near count and the row indices needing refinement.
    """
    n = simplex_rows.shape[0]
    blocks = []
    if jobs and jobs > 1:
        step = max(1, math.ceil(n / jobs))
    else:
        step = min(_CHUNK, max(n, 1))
    offsets = list(range(0, n, step))

    def work(off):
        return _kernel(images, simplex_rows[off:off + step], y, mesh)

    if jobs and jobs > 1 and len(offsets) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(work, offsets))
    else:
        blocks = [work(off) for off in offsets]

    total = 0
    degen = 0
    near_rows = []
    for (signed, n_degen, boundary, near_idx), off in zip(blocks, offsets):
        if boundary:
            raise NonRegularValueError("target value lies on a simplex boundary")
        total += signed
        degen += n_degen
        near_rows.append(near_idx + off)
    return total, degen, np.concatenate(near_rows) if near_rows else np.empty(0, int)


def pl_degree(f, tri, regular_value, jobs=1):
    """Piecewise-linear degree of ``f`` over a full triangulation.

    The value must be regular: not within 1e-9 of any vertex image and not on
    any image-simplex boundary (otherwise :class:`NonRegularValueError` asks
    the caller to re-randomize).  More than 1% of near-target simplices with
    degenerate images signals insufficient refinement.
    """
    if tri.dim != f.domain_dim or f.domain_dim != f.codomain_dim:
        raise MaslovError("pl_degree needs a map between spheres of the triangulation's dimension")
    y = UnitVector(regular_value).coords
    images = f.batch(tri.vertices)
    if np.min(np.linalg.norm(images - y, axis=1)) < 1e-9:
        raise NonRegularValueError("target value too close to a vertex image")
    mesh = tri.max_edge_arc()
    total, degen, _ = _contributions(images, tri.simplices, y, mesh, jobs)
    if degen > DEGENERATE_FRACTION * tri.num_simplices:
        raise InsufficientRefinementError(
            f"{degen} degenerate near-target simplices out of {tri.num_simplices}"
        )
    return total


def degree_estimate_integral(f, tri, fd_step=FD_STEP):
    """Quadrature estimate of the mean tangential Jacobian determinant.

    Central differences with the given step in positively oriented
    orthonormal tangent frames at simplex barycenters, weighted by flat
    simplex volume (self-normalizing, so the estimate of the identity map is
    exact).  This is the independent cross-check used for certification.
    """
    m = tri.dim
    P = tri.barycenters()
    N, d = P.shape
    T = oriented_tangent_frames(P)                    # (N, d, m)
    h = fd_step
    dirs = T.transpose(0, 2, 1)                       # (N, m, d)
    xp = np.cos(h) * P[:, None, :] + np.sin(h) * dirs
    xm = np.cos(h) * P[:, None, :] - np.sin(h) * dirs
    Yb = f.batch(P)
    Yp = f.batch(xp.reshape(-1, d)).reshape(N, m, d)
    Ym = f.batch(xm.reshape(-1, d)).reshape(N, m, d)
    D = (Yp - Ym) / (2.0 * np.sin(h))                 # rows: directional derivatives
    S = oriented_tangent_frames(Yb)                   # (N, d, m)
    M = np.einsum("ndi,njd->nij", S, D)               # M[i,j] = <s_i, D_j>
    J = np.linalg.det(M)

    E = tri.vertices[tri.simplices]
    E = E[:, 1:, :] - E[:, :1, :]                     # (N, m, d) edge vectors
    G = np.einsum("nid,njd->nij", E, E)
    vol = np.sqrt(np.maximum(np.linalg.det(G), 0.0)) / math.factorial(m)
    w = vol.sum()
    if w <= 0:
        raise MaslovError("triangulation has zero total volume")
    return float((vol * J).sum() / w)


def _lipschitz_level(lipschitz):
    """Smallest refinement level keeping image variation per simplex < 1 rad."""
    if lipschitz is None or lipschitz <= 0:
        return 2
    need = lipschitz * (math.pi / 2.0)
    return max(2, math.ceil(math.log2(max(need, 1.0))))


class _Ladder:
    """Adaptive refinement ladder sharing vertex evaluations across levels."""

    def __init__(self, f, tri):
        self.f = f
        self.dim = tri.dim
        self.vertex_blocks = [np.array(tri.vertices)]
        self.image_blocks = [f.batch(tri.vertices)]
        self.base_rows = tri.simplices
        self.mesh0 = tri.max_edge_arc()
        self.evaluations = tri.num_vertices

    def vertices(self):
        return np.vstack(self.vertex_blocks)

    def images(self):
        return np.vstack(self.image_blocks)

    def run(self, y, budget, max_extra_levels):
        f = self.f
        rows = self.base_rows
        mesh = self.mesh0
        images = self.images()
        history = []
        # degenerate near-target simplices stay in the refinement set; either
        # refinement resolves them or their caps shrink away from the target
        total, _degen, near = _contributions(images, rows, y, mesh)
        history.append(total)
        agreed = near.size == 0
        levels_done = 0
        midpoints = {}
        while not agreed and levels_done < max_extra_levels:
            active = rows[near]
            vertices = self.vertices()
            new_rows = []
            children = subdivide_rows(vertices, active, midpoints, new_rows)
            if new_rows:
                block = np.array(new_rows)
                if self.evaluations + block.shape[0] > budget:
                    break
                self.vertex_blocks.append(block)
                self.image_blocks.append(f.batch(block))
                self.evaluations += block.shape[0]
            children = _orient_positive(self.vertices(), children)
            images = self.images()
            mesh /= 2.0
            total_next, _degen, near = _contributions(images, children, y, mesh)
            history.append(total_next)
            if total_next == total:
                agreed = True
            total = total_next
            rows = children
            levels_done += 1
        return total, history, agreed, levels_done


def certified_degree(f, m=None, budget=DEFAULT_DEGREE_BUDGET, seed=0,
                     start_level=None, jobs=1):
    """Degree of ``f`` with refinement-agreement and quadrature certificates.

    Starts from a full triangulation at level max(2, Lipschitz-driven level),
    subdivides only the simplices whose image cap can contain the target
    value, retries seeded target values on non-regularity (up to 20 times),
    and marks the result certified when two consecutive levels agree and the
    independent quadrature estimate is within 0.25.  Deterministic in
    (f, budget, seed).
    """
    if m is None:
        m = f.domain_dim
    if f.domain_dim != m or f.codomain_dim != m:
        raise MaslovError("certified_degree needs equal sphere dimensions")
    if m > MAX_SPHERE_DIM:
        raise MaslovError(f"sphere dimension {m} beyond supported cap {MAX_SPHERE_DIM}")

    wanted = _lipschitz_level(f.lipschitz) if start_level is None else start_level
    wanted = max(2, wanted)
    level0 = wanted
    budget_limited = False
    while level0 > 1 and _cells(m, level0) * (m + 1) > 0.6 * budget:
        level0 -= 1
        budget_limited = True
    tri = base_triangulation(m, level0)

    rng = np.random.default_rng(seed)
    ladder = _Ladder(f, tri)

    degree = 0
    history = []
    agreed = False
    retries = 0
    y = None
    for attempt in range(MAX_REGULAR_RETRIES):
        y = random_unit(rng, m)
        if np.min(np.linalg.norm(ladder.image_blocks[0] - y, axis=1)) < 1e-9:
            retries += 1
            continue
        try:
            degree, history, agreed, _ = ladder.run(
                y, budget, MAX_LADDER_LEVELS - level0)
            break
        except NonRegularValueError:
            retries += 1
            continue
    else:
        raise NonRegularValueError("no regular target value found in 20 attempts")

    # independent quadrature cross-check at the largest affordable full level
    int_level = level0
    while (int_level + 1 <= min(level0 + 2, MAX_LADDER_LEVELS)
           and _cells(m, int_level + 1) * (2 * m + 1) <= 0.4 * budget):
        int_level += 1
    int_tri = base_triangulation(m, int_level)
    integral = degree_estimate_integral(f, int_tri)
    evaluations = ladder.evaluations + int_tri.num_simplices * (2 * m + 1)

    certified = (
        agreed
        and abs(integral - degree) < INTEGRAL_AGREEMENT
        and not budget_limited
    )
    level_used = level0 + max(len(history) - 1, 0)
    return DegreeResult(
        degree=int(degree),
        level_used=level_used,
        regular_value=UnitVector(y),
        retries=retries,
        integral_estimate=float(integral),
        certified=bool(certified),
        evaluations=int(evaluations),
        history=tuple(int(h) for h in history),
        budget_limited=budget_limited,
    )
