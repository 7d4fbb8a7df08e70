"""Unit-sphere primitives: points, map evaluators, missed points, contractions.

Points of the m-sphere are unit vectors in R^(m+1).  The orientation used
everywhere in this package is the boundary orientation of the unit ball:
a tangent basis (t_1, ..., t_m) at x is positive when det[x, t_1, ..., t_m] > 0.
"""

from dataclasses import dataclass

import numpy as np

from ._params import (
    CLEARANCE_EVAL_TOL,
    DEFAULT_SEARCH_BUDGET,
    ENDPOINT_TOL,
    UNIT_NORM_TOL,
)
from .exceptions import ClearanceViolationError, MaslovError, MissedPointSearchError


def as_coords(x):
    """Coerce a UnitVector or array-like to a float ndarray (no normalization)."""
    if isinstance(x, UnitVector):
        return x.coords
    return np.asarray(x, dtype=float)


class UnitVector:
    """A point on a unit sphere.

    The constructor normalizes its input and rejects (near-)zero vectors.
    Coordinates are stored read-only; instances are safe to share.
    """

    __slots__ = ("_coords",)

    def __init__(self, coords):
        c = np.array(as_coords(coords), dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("unit vector needs a flat coordinate array of length >= 2")
        norm = np.linalg.norm(c)
        if norm < UNIT_NORM_TOL:
            raise ValueError("cannot normalize a zero vector")
        c /= norm
        c.setflags(write=False)
        self._coords = c

    @property
    def coords(self):
        return self._coords

    @property
    def dim(self):
        """Dimension m of the sphere S^m the point lives on."""
        return self._coords.size - 1

    def __repr__(self):
        return f"UnitVector({np.array2string(self._coords, precision=6)})"


def spherical_distance(u, v):
    """Geodesic (arc) distance between two unit vectors."""
    d = float(np.clip(np.dot(as_coords(u), as_coords(v)), -1.0, 1.0))
    return float(np.arccos(d))


def spherical_distances(U, v):
    """Arc distances from each row of U to the unit vector v."""
    d = np.clip(np.asarray(U) @ as_coords(v), -1.0, 1.0)
    return np.arccos(d)


def random_unit(rng, dim, size=None):
    """Uniform random points on S^dim (rows if size is given)."""
    if size is None:
        v = rng.normal(size=dim + 1)
        return v / np.linalg.norm(v)
    v = rng.normal(size=(size, dim + 1))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def oriented_tangent_frames(points):
    """Positively oriented orthonormal tangent frames at unit points.

    Parameters
    ----------
    points : (N, d) array of unit vectors on S^(d-1).

    Returns
    -------
    (N, d, d-1) array; column j of frame i is the j-th tangent vector at
    points[i], and det[point, t_1, ..., t_{d-1}] = +1.
    """
    P = np.asarray(points, dtype=float)
    N, d = P.shape
    sign = np.where(P[:, 0] >= 0.0, 1.0, -1.0)
    v = P.copy()
    v[:, 0] += sign
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    H = np.eye(d)[None, :, :] - 2.0 * v[:, :, None] * v[:, None, :]
    frames = H[:, :, 1:].copy()
    # det[p | frame] equals sign(p_0); flip one column where negative
    frames[sign < 0, :, -1] *= -1.0
    return frames


class SphereMapEvaluator:
    """A pure evaluation rule S^a -> S^b.

    Parameters
    ----------
    domain_dim, codomain_dim : sphere dimensions a and b.
    rule : callable mapping a coordinate array to a coordinate array.  With
        ``vectorized=True`` the rule must accept an (N, a+1) batch and return
        an (N, b+1) batch.
    lipschitz : optional bound L with arc-distance(f(x), f(y)) <= L * arc(x, y).
        Declaring one enables certified missed-point searches.

    Evaluation is deterministic and outputs are renormalized; an output that
    cannot be normalized is an error.
    """

    def __init__(self, domain_dim, codomain_dim, rule, lipschitz=None,
                 vectorized=False, name="map"):
        self.domain_dim = int(domain_dim)
        self.codomain_dim = int(codomain_dim)
        self._rule = rule
        self.lipschitz = None if lipschitz is None else float(lipschitz)
        self._vectorized = bool(vectorized)
        self.name = name

    def __call__(self, point):
        out = self.batch(as_coords(point)[None, :])[0]
        return out

    def batch(self, X):
        """Evaluate on an (N, a+1) array of unit points; returns (N, b+1)."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.domain_dim + 1:
            raise ValueError(
                f"{self.name}: expected points in R^{self.domain_dim + 1}, got {X.shape}"
            )
        if self._vectorized:
            Y = np.asarray(self._rule(X), dtype=float)
        else:
            Y = np.stack([np.asarray(self._rule(x), dtype=float) for x in X])
        if Y.shape != (X.shape[0], self.codomain_dim + 1):
            raise ValueError(f"{self.name}: rule returned shape {Y.shape}")
        norms = np.linalg.norm(Y, axis=1)
        if np.any(norms < 0.5):
            raise MaslovError(f"{self.name}: evaluation produced a near-zero vector")
        return Y / norms[:, None]

    def precompose_linear(self, A):
        """The evaluator x -> f(Ax) for an orthogonal matrix A on the domain."""
        A = np.asarray(A, dtype=float)
        lip = self.lipschitz
        return SphereMapEvaluator(
            self.domain_dim, self.codomain_dim,
            lambda X, _A=A: self.batch(X @ _A.T),
            lipschitz=lip, vectorized=True, name=f"{self.name}∘lin",
        )


def constant_map(domain_dim, value, name="constant"):
    v = UnitVector(value).coords

    def rule(X):
        return np.repeat(v[None, :], X.shape[0], axis=0)

    return SphereMapEvaluator(domain_dim, v.size - 1, rule, lipschitz=0.0,
                              vectorized=True, name=name)


class Homotopy:
    """A time-parametrized family of sphere maps H(x, t), t in [0, 1].

    ``start`` and ``end`` are the declared time-0 and time-1 evaluators; use
    :meth:`check_endpoints` to verify the agreement contract.
    """

    def __init__(self, domain_dim, codomain_dim, rule, start, end, name="homotopy"):
        self.domain_dim = int(domain_dim)
        self.codomain_dim = int(codomain_dim)
        self._rule = rule  # (X, t) -> batch of points
        self.start = start
        self.end = end
        self.name = name

    def batch_at(self, X, t):
        X = np.asarray(X, dtype=float)
        Y = self._rule(X, float(t))
        norms = np.linalg.norm(Y, axis=1, keepdims=True)
        return Y / norms

    def at_time(self, t):
        return SphereMapEvaluator(
            self.domain_dim, self.codomain_dim,
            lambda X, _t=float(t): self.batch_at(X, _t),
            vectorized=True, name=f"{self.name}@t={t}",
        )

    def check_endpoints(self, n_samples=1000, seed=0, tol=ENDPOINT_TOL):
        """Verify H(.,0) and H(.,1) against the declared endpoints.

        Returns the worst pointwise deviation; raises if it exceeds ``tol``.
        """
        rng = np.random.default_rng(seed)
        X = random_unit(rng, self.domain_dim, n_samples)
        worst = 0.0
        for t, f in ((0.0, self.start), (1.0, self.end)):
            dev = np.linalg.norm(self.batch_at(X, t) - f.batch(X), axis=1)
            worst = max(worst, float(dev.max()))
        if worst > tol:
            raise MaslovError(
                f"{self.name}: endpoint deviation {worst:.3e} exceeds {tol:.1e}"
            )
        return worst


@dataclass(frozen=True)
class MissedPoint:
    """Result of a missed-point search.

    ``clearance`` is a certified lower bound on the distance from the image
    when ``certified`` is true, otherwise the sampled minimum (heuristic).
    """

    point: UnitVector
    clearance: float
    certified: bool
    mesh: float
    samples: int

    @property
    def coords(self):
        return self.point.coords


def _domain_samples(dim, budget):
    """Triangulation vertices of S^dim, refined while they fit the budget."""
    from .triangulation import base_triangulation

    tri = base_triangulation(dim, 0)
    while True:
        nxt = tri.refine()
        if nxt.num_vertices > budget or nxt.level > 10:
            break
        tri = nxt
    return tri.vertices, tri.max_edge_arc()


def find_missed_point(f, budget=DEFAULT_SEARCH_BUDGET, seed=0, candidates=128,
                      hill_steps=60):
    """Find a point of the codomain sphere far from the image of ``f``.

    Requires domain dimension < codomain dimension.  Samples the domain on
    triangulation vertices (mesh size known exactly), picks the candidate
    maximizing the minimum arc distance to the sampled image, and improves it
    by a short seeded hill climb.  With a declared Lipschitz bound the result
    is certified: the reported clearance is (sampled minimum) - L * mesh and
    is a true lower bound on the distance from the whole image.
    """
    if f.domain_dim >= f.codomain_dim:
        raise MissedPointSearchError(
            "missed-point search needs domain dimension < codomain dimension"
        )
    rng = np.random.default_rng(seed)
    X, mesh = _domain_samples(f.domain_dim, budget)
    Y = f.batch(X)

    def clearance_of(q):
        return float(np.arccos(np.clip(Y @ q, -1.0, 1.0)).min())

    pool = [random_unit(rng, f.codomain_dim, candidates)]
    center = Y.mean(axis=0)
    if np.linalg.norm(center) > 1e-9:
        pool.append(-center[None, :] / np.linalg.norm(center))
    eye = np.eye(f.codomain_dim + 1)
    pool.append(eye)
    pool.append(-eye)
    cands = np.vstack(pool)

    clear = np.arccos(np.clip(Y @ cands.T, -1.0, 1.0)).min(axis=0)
    best = int(np.argmax(clear))
    q, r = cands[best].copy(), float(clear[best])

    for step in range(hill_steps):
        scale = 0.5 * 0.93 ** step
        prop = q + scale * rng.normal(size=q.size)
        prop /= np.linalg.norm(prop)
        rp = clearance_of(prop)
        if rp > r:
            q, r = prop, rp

    if r <= 1e-9:
        raise MissedPointSearchError(
            f"no positive clearance within budget {budget} (image may cover S^{f.codomain_dim})"
        )

    certified = False
    clearance = r
    if f.lipschitz is not None:
        bound = r - f.lipschitz * mesh
        if bound > 0:
            certified = True
            clearance = bound
    return MissedPoint(UnitVector(q), clearance, certified, mesh, X.shape[0])


def geodesic_contraction(f, missed, target):
    """Contract ``f`` to the constant map at ``target`` inside S^b minus ``missed``.

    The homotopy first flows every image point radially away from the missed
    point toward its antipode (reached at t = 1/2), then slides the antipode
    to ``target`` along the fixed shortest arc.  Both phases stay away from
    the missed point; an evaluation closer than the clearance tolerance
    raises :class:`ClearanceViolationError`.
    """
    q = UnitVector(missed).coords
    tgt = UnitVector(target).coords
    if spherical_distance(q, tgt) < 1e-9:
        raise MaslovError("contraction target coincides with the missed point")

    # a map already constant at the target contracts by standing still
    probe = random_unit(np.random.default_rng(0), f.domain_dim, 32)
    if np.abs(f.batch(probe) - tgt).max() < 1e-12:
        def const_rule(X, t):
            return np.repeat(tgt[None, :], X.shape[0], axis=0)

        return Homotopy(f.domain_dim, f.codomain_dim, const_rule,
                        start=f, end=constant_map(f.domain_dim, tgt),
                        name=f"contract({f.name})")

    psi = spherical_distance(-q, tgt)

    def rule(X, t):
        pts = f.batch(X)
        if t <= 0.5:
            cosang = np.clip(pts @ q, -1.0, 1.0)
            theta = np.arccos(cosang)
            if np.any(theta < CLEARANCE_EVAL_TOL):
                raise ClearanceViolationError(
                    "contraction source touches the missed point"
                )
            u = pts - cosang[:, None] * q[None, :]
            un = np.linalg.norm(u, axis=1)
            # points at the antipode have no radial direction and stay put
            safe = un > 1e-12
            u[safe] /= un[safe, None]
            u[~safe] = 0.0
            th_t = theta + (np.pi - theta) * (2.0 * t)
            out = np.cos(th_t)[:, None] * q[None, :] + np.sin(th_t)[:, None] * u
        else:
            s = 2.0 * t - 1.0
            if psi < 1e-12:
                out = np.repeat(-q[None, :], pts.shape[0], axis=0)
            else:
                a = np.sin((1.0 - s) * psi) / np.sin(psi)
                b = np.sin(s * psi) / np.sin(psi)
                ray = a * (-q) + b * tgt
                out = np.repeat((ray / np.linalg.norm(ray))[None, :], pts.shape[0], axis=0)
        dq = np.arccos(np.clip(out @ q, -1.0, 1.0))
        if np.any(dq < CLEARANCE_EVAL_TOL):
            raise ClearanceViolationError("contraction path entered the missed cap")
        return out

    return Homotopy(
        f.domain_dim, f.codomain_dim, rule,
        start=f, end=constant_map(f.domain_dim, tgt),
        name=f"contract({f.name})",
    )
