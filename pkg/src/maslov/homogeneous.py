"""Homogeneous indices of families of contact structures on S^1 x S^2.

A family of contact forms over S^2, evaluated at a fixed point and read in a
fixed oriented tangent frame, gives a family of cooriented tangent planes;
on a 3-manifold the space of such planes is a 2-sphere via the Gauss map
(the metric-dual normal of the defining covector).  The homogeneous index is
the certified degree of that map and is independent of the evaluation datum.

Coordinates on S^1 x S^2 are (theta; x, y, z) with (x, y, z) on the unit
sphere; 1-forms are stored by their ambient coefficients (c_theta, c_x, c_y,
c_z).
"""

from dataclasses import dataclass

import numpy as np

from ._params import DEFAULT_DEGREE_BUDGET
from .degree import certified_degree
from .exceptions import MaslovError
from .sphere import SphereMapEvaluator, oriented_tangent_frames


def axis_angle_rotation(axis, angle):
    """Proper rotation of the given angle about the axis (Rodrigues formula)."""
    a = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(a)
    if norm < 1e-12:
        raise MaslovError("rotation axis must be nonzero")
    a = a / norm
    K = np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def _skew_batch(E):
    K = np.zeros(E.shape[:-1] + (3, 3))
    K[..., 0, 1] = -E[..., 2]
    K[..., 0, 2] = E[..., 1]
    K[..., 1, 0] = E[..., 2]
    K[..., 1, 2] = -E[..., 0]
    K[..., 2, 0] = -E[..., 1]
    K[..., 2, 1] = E[..., 0]
    return K


def _rodrigues_batch(axes, angles):
    K = _skew_batch(axes)
    s = np.sin(angles)[..., None, None]
    c = (1.0 - np.cos(angles))[..., None, None]
    return np.eye(3) + s * K + c * (K @ K)


def _broadcast_pairs(E, P):
    E = np.atleast_2d(np.asarray(E, dtype=float))
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if E.shape[0] == P.shape[0]:
        return E, P
    if E.shape[0] == 1:
        return np.repeat(E, P.shape[0], axis=0), P
    if P.shape[0] == 1:
        return E, np.repeat(P, E.shape[0], axis=0)
    raise MaslovError("parameter and point batches have incompatible lengths")


class ContactFormFamily:
    """A family of 1-forms on S^1 x S^2 parametrized by the 2-sphere.

    ``coeff(e, points)`` returns ambient coefficients (c_theta, c_x, c_y,
    c_z); either argument may be a batch (broadcast against the other).
    ``coeff_jacobian`` returns the exact partial derivatives with respect to
    (theta, x, y, z); families without one fall back to central differences.
    """

    param_dim = 2

    def __init__(self, coeff, coeff_jacobian=None, name="form-family"):
        self._coeff = coeff
        self._jac = coeff_jacobian
        self.name = name

    def coeff(self, e, points):
        E, P = _broadcast_pairs(e, points)
        return self._coeff(E, P)

    def coeff_jacobian(self, e, points, step=1e-5):
        E, P = _broadcast_pairs(e, points)
        if self._jac is not None:
            return self._jac(E, P)
        J = np.empty((P.shape[0], 4, 4))
        for i in range(4):
            dp = np.zeros(4)
            dp[i] = step
            J[:, i, :] = (self._coeff(E, P + dp) - self._coeff(E, P - dp)) / (2 * step)
        return J


class EvaluationDatum:
    """A point of S^1 x S^2 with a positively oriented orthonormal tangent frame.

    ``point`` is (theta, x, y, z) with unit (x, y, z); ``frame`` holds three
    tangent row vectors in ambient coordinates.
    """

    def __init__(self, point, frame):
        p = np.asarray(point, dtype=float).copy()
        if p.shape != (4,):
            raise MaslovError("datum point must be (theta, x, y, z)")
        v = p[1:]
        if abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise MaslovError("datum point must lie on the unit 2-sphere factor")
        tau = np.asarray(frame, dtype=float).copy()
        if tau.shape != (3, 4):
            raise MaslovError("datum frame must be three ambient 4-vectors")
        if np.abs(tau[:, 1:] @ v).max() > 1e-8:
            raise MaslovError("frame vectors must be tangent to the sphere factor")
        if np.abs(tau @ tau.T - np.eye(3)).max() > 1e-8:
            raise MaslovError("frame must be orthonormal")
        ref = self._reference_frame(v)
        if np.linalg.det(tau @ ref.T) <= 0:
            raise MaslovError("frame must be positively oriented")
        p.setflags(write=False)
        tau.setflags(write=False)
        self.point = p
        self.frame = tau

    @staticmethod
    def _reference_frame(v):
        t = oriented_tangent_frames(v[None, :])[0]  # (3, 2), det[v,t1,t2]=+1
        ref = np.zeros((3, 4))
        ref[0, 0] = 1.0
        ref[1, 1:] = t[:, 0]
        ref[2, 1:] = t[:, 1]
        return ref

    @classmethod
    def standard(cls):
        """theta = 0 at the top of the sphere factor, frame (d_theta, d_x, d_y)."""
        point = np.array([0.0, 0.0, 0.0, 1.0])
        frame = np.array([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        return cls(point, frame)

    @classmethod
    def random(cls, seed=0):
        rng = np.random.default_rng(seed)
        theta = rng.uniform(0.0, 2 * np.pi)
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        t = oriented_tangent_frames(v[None, :])[0]
        angle = rng.uniform(0.0, 2 * np.pi)
        t1 = np.cos(angle) * t[:, 0] + np.sin(angle) * t[:, 1]
        t2 = -np.sin(angle) * t[:, 0] + np.cos(angle) * t[:, 1]
        ref = np.zeros((3, 4))
        ref[0, 0] = 1.0
        ref[1, 1:] = t1
        ref[2, 1:] = t2
        # random positively oriented recombination of the reference frame
        rot = _rodrigues_batch(
            (lambda w: w / np.linalg.norm(w))(rng.normal(size=3))[None, :],
            np.array([rng.uniform(0.0, 2 * np.pi)]))[0]
        frame = rot @ ref
        return cls(np.concatenate([[theta], v]), frame)


def gauss_evaluation(family, datum):
    """The family's covectors at the datum, read as unit normals in its frame.

    Restricting each form to the tangent space at the datum point and taking
    metric duals in the frame gives a map from the parameter 2-sphere to the
    2-sphere of cooriented tangent planes.  A vanishing restriction means the
    family is not transverse at the point (error reports the offending
    parameter).
    """
    p = datum.point
    tau = datum.frame

    def rule(E):
        C = family.coeff(E, p)
        A = C @ tau.T
        norms = np.linalg.norm(A, axis=1)
        if norms.min() < 1e-9:
            bad = E[int(np.argmin(norms))]
            raise MaslovError(
                f"family {family.name} is not transverse at the datum "
                f"(restricted form vanishes at parameter {bad.tolist()})")
        return A / norms[:, None]

    return SphereMapEvaluator(2, 2, rule, vectorized=True,
                              name=f"gauss({family.name})")


def epsilon_index(family, datum=None, budget=DEFAULT_DEGREE_BUDGET, seed=0, jobs=1):
    """Homogeneous index of the family: certified degree of its Gauss map."""
    if datum is None:
        datum = EvaluationDatum.standard()
    gauss = gauss_evaluation(family, datum)
    result = certified_degree(gauss, budget=budget, seed=seed, jobs=jobs)
    return result.degree, result


def sample_points(n, seed=0):
    """Seeded sample points on S^1 x S^2 as (theta, x, y, z) rows."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2 * np.pi, size=n)
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return np.column_stack([theta, v])


def contact_check(family, e, n_samples=1000, seed=0):
    """Verify that the form at parameter e is contact on a seeded sample.

    Evaluates the 3-form alpha ^ d(alpha) on positively oriented tangent
    frames; passes when the sign is constant and bounded away from zero.
    Returns (ok, worst signed margin).
    """
    P = sample_points(n_samples, seed=seed)
    E = np.atleast_2d(np.asarray(e, dtype=float))
    C = family.coeff(E, P)
    J = family.coeff_jacobian(E, P)
    A = J - J.transpose(0, 2, 1)

    v = P[:, 1:]
    t = oriented_tangent_frames(v)  # (n, 3, 2)
    frames = np.zeros((P.shape[0], 3, 4))
    frames[:, 0, 0] = 1.0
    frames[:, 1, 1:] = t[:, :, 0]
    frames[:, 2, 1:] = t[:, :, 1]

    def pair(i, j):
        return np.einsum("ni,nij,nj->n", frames[:, i], A, frames[:, j])

    def val(i):
        return np.einsum("ni,ni->n", C, frames[:, i])

    vol = val(0) * pair(1, 2) - val(1) * pair(0, 2) + val(2) * pair(0, 1)
    margin = float(np.abs(vol).min())
    ok = bool((np.all(vol > 1e-9)) or (np.all(vol < -1e-9)))
    signed = margin if vol.mean() >= 0 else -margin
    return ok, signed


@dataclass(frozen=True)
class GroupDescriptor:
    """A homotopy group of the space of linear (almost-)complex structures."""

    group: str       # "Z", "Z2", "0" or "unknown"
    stable: bool
    k: int
    fiber_dim: int
    resolved_dim: int

    def to_dict(self):
        return {
            "group": self.group,
            "stable": self.stable,
            "k": self.k,
            "fiber_dim": self.fiber_dim,
            "resolved_dim": self.resolved_dim,
        }


# homotopy groups of the low-dimensional structure spaces (the dim-4 space is
# a 2-sphere, the dim-6 space a complex projective 3-space)
_UNSTABLE_RECORDED = {
    4: {1: "0", 2: "Z", 3: "Z"},
    6: {1: "0", 2: "Z", 3: "0", 4: "0", 5: "0", 6: "0"},
}


def stable_group(k, fiber_dim):
    """Homotopy group pi_k of the space of linear structures on R^fiber_dim.

    Odd fiber dimensions resolve to the next even one (the odd and even
    structure spaces are diffeomorphic).  Inside the stable range
    1 <= k <= dim - 2 the answer follows the period-8 pattern: Z_2 for
    k = 0, 7 mod 8, Z for k = 2 mod 4, zero otherwise.  Outside it, recorded
    low-dimensional answers are returned when known.
    """
    if k < 1:
        raise MaslovError("homotopy degree k must be >= 1")
    resolved = fiber_dim if fiber_dim % 2 == 0 else fiber_dim + 1
    if resolved < 2:
        raise MaslovError("fiber dimension too small")
    stable = 1 <= k <= resolved - 2
    if stable:
        if k % 8 in (0, 7):
            group = "Z2"
        elif k % 4 == 2:
            group = "Z"
        else:
            group = "0"
    else:
        group = _UNSTABLE_RECORDED.get(resolved, {}).get(k, "unknown")
    return GroupDescriptor(group=group, stable=stable, k=k,
                           fiber_dim=fiber_dim, resolved_dim=resolved)
