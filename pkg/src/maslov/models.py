"""Built-in model manifolds and frame policies.

Supported models:

* ``linear_contact_sphere(n)`` — the unit sphere of C^n with its standard
  contact planes (the complex-orthogonal hyperplanes); points are unit
  vectors in R^(2n) with interleaved real/imaginary coordinates.
* ``torus(d)`` — R^d / Z^d with the constant symplectic pairing of
  consecutive coordinates (x_1, y_1, x_2, y_2, ...).
* ``cp1()`` — the round 2-sphere with rotation actions; tangent planes carry
  the complex structure "cross product with the outward normal".
* ``s1xs2()`` — S^1 x S^2 with coordinates (theta; x, y, z); used by the
  homogeneous-index pipeline.

The table of minimal top Chern numbers is model configuration: a value of 0
means the index of that order is integer-valued (a global frame exists), a
positive value N means indices of that order are residues mod N.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import FrameDegenerateError, MaslovError
from .unitary import deinterleave, interleave


@dataclass(frozen=True)
class ModelManifold:
    kind: str
    dimension: int
    chern_table: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    @property
    def name(self):
        if self.params:
            inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
            return f"{self.kind}({inner})"
        return self.kind

    def to_dict(self):
        return {"kind": self.kind, "params": dict(self.params)}


def linear_contact_sphere(n):
    """S^(2n-1) in C^n with the standard contact planes; all orders framed."""
    if n < 1:
        raise MaslovError("linear contact sphere needs n >= 1")
    return ModelManifold(
        kind="linear_contact_sphere",
        dimension=2 * n - 1,
        chern_table={k: 0 for k in range(1, n + 1)},
        params={"n": n},
    )


def torus(dim):
    """R^dim / Z^dim with the standard symplectic pairing (trivial bundle)."""
    if dim < 2 or dim % 2:
        raise MaslovError("torus dimension must be even and >= 2")
    return ModelManifold(
        kind="torus",
        dimension=dim,
        chern_table={k: 0 for k in range(1, dim // 2 + 1)},
        params={"dim": dim},
    )


def cp1():
    """The round 2-sphere; the tangent line bundle pairs to 2 on the
    fundamental class (the classical Euler number of S^2), so first-order
    indices without a framing are residues mod 2."""
    return ModelManifold(kind="cp1", dimension=2, chern_table={1: 2}, params={})


def s1xs2():
    """S^1 x S^2 with its tight contact planes (zero Euler class)."""
    return ModelManifold(kind="s1xs2", dimension=3, chern_table={1: 0}, params={})


def minimal_chern(model, k):
    """Table lookup of the order-k minimal Chern number; 0 = integer-valued."""
    if k not in model.chern_table:
        raise MaslovError(f"order {k} outside the table of model {model.name}")
    return model.chern_table[k]


# ---------------------------------------------------------------------------
# frame policies


class AmbientFrame:
    """Standard complex basis of the ambient C^n along a linear contact sphere.

    With this policy a linear unitary family is its own frame transition.
    """

    policy = "ambient"

    def applies_to(self, model):
        return model.kind == "linear_contact_sphere"


class CoordinateFrame:
    """Constant coordinate frame on the torus (the trivialization making the
    first-order index of translation loops vanish)."""

    policy = "coordinate"

    def applies_to(self, model):
        return model.kind == "torus"

    def phases(self, points):
        return np.ones((points.shape[0], points.shape[1] // 2), dtype=complex)


class TwistedFrame:
    """Coordinate frame with the first vector twisted along one direction.

    The first frame vector is multiplied by exp(-2 pi i x_d), x_d the d-th
    position coordinate; the sign of the twist is pinned so a full positive
    translation loop in that direction has first-order index +1.
    """

    policy = "twisted"

    def __init__(self, direction=1):
        self.direction = int(direction)

    def applies_to(self, model):
        return model.kind == "torus" and 1 <= self.direction <= model.dimension // 2

    def phases(self, points):
        n = points.shape[1] // 2
        ph = np.ones((points.shape[0], n), dtype=complex)
        xd = points[:, 2 * (self.direction - 1)]
        ph[:, 0] = np.exp(-2j * np.pi * xd)
        return ph


def frame_policy(name, **kwargs):
    if name == "ambient":
        return AmbientFrame()
    if name == "coordinate":
        return CoordinateFrame()
    if name == "twisted":
        return TwistedFrame(kwargs.get("direction", 1))
    raise MaslovError(f"unknown frame policy '{name}'")


# ---------------------------------------------------------------------------
# fiber geometry per model kind (used by the capping pipeline)


class _ContactSphereOps:
    """Contact-plane geometry of S^(2n-1): fibers are complex orthogonal
    complements of the base point."""

    def __init__(self, n):
        self.n = n
        self.fiber_rank = n - 1

    def to_complex(self, points):
        return deinterleave(points)

    def base_frame(self, point):
        z = deinterleave(np.asarray(point, float)[None, :])[0]
        A = np.concatenate([z[:, None], np.eye(self.n, dtype=complex)], axis=1)
        Qm, _ = np.linalg.qr(A)
        return Qm[:, 1:self.n]

    def project_frames(self, points, frames):
        z = deinterleave(points)
        inner = np.einsum("ni,nir->nr", np.conj(z), frames)
        g = frames - z[:, :, None] * inner[:, None, :]
        gram = np.einsum("nir,nis->nrs", np.conj(g), g)
        vals, vecs = np.linalg.eigh(gram)
        if vals.min() < 1e-12:
            raise FrameDegenerateError("contact frame lost rank during transport")
        inv_sqrt = (vecs * (vals ** -0.5)[:, None, :]) @ np.conj(vecs.transpose(0, 2, 1))
        return g @ inv_sqrt

    def transition(self, diff_complex, frames_out, frame_in):
        mid = diff_complex @ frame_in[None, :, :]
        return np.einsum("nir,nis->nrs", np.conj(frames_out), mid)


class _Cp1Ops:
    """Tangent geometry of the round 2-sphere; frames are single unit tangent
    vectors, complexified by v -> (v, normal x v)."""

    fiber_rank = 1

    def base_frame(self, point):
        p = np.asarray(point, float)
        axis = np.eye(3)[int(np.argmin(np.abs(p)))]
        w = axis - np.dot(axis, p) * p
        nrm = np.linalg.norm(w)
        if nrm < 1e-9:
            raise FrameDegenerateError("no tangent direction at base point")
        return (w / nrm)[:, None]

    def project_frames(self, points, frames):
        w = frames[:, :, 0]
        w = w - np.einsum("ni,ni->n", w, points)[:, None] * points
        nrm = np.linalg.norm(w, axis=1)
        if nrm.min() < 1e-9:
            raise FrameDegenerateError("tangent frame degenerated during transport")
        return (w / nrm[:, None])[:, :, None]

    def transition(self, diff_real, frames_out, frame_in, points_out):
        v = np.einsum("nij,j->ni", diff_real, frame_in[:, 0])
        w = frames_out[:, :, 0]
        jw = np.cross(points_out, w)
        a = np.einsum("ni,ni->n", v, w)
        b = np.einsum("ni,ni->n", v, jw)
        return (a + 1j * b)[:, None, None]


def fiber_ops(model):
    if model.kind == "linear_contact_sphere":
        return _ContactSphereOps(model.params["n"])
    if model.kind == "cp1":
        return _Cp1Ops()
    raise MaslovError(f"model {model.name} has no capping fiber operations")
