"""Built-in families and the registry used by scenarios and tests.

Unitary families feed the reduction pipeline directly or act on the linear
contact sphere; transformation families act on the torus and the round
2-sphere; contact-form families feed the homogeneous index.  Sampled-grid
unitary families (vertex samples over a declared triangulation, spherical
barycentric interpolation, pointwise re-unitarization) are the wire format
for user-supplied families.
"""

import math

import numpy as np

from .exceptions import MaslovError, UnknownBuiltinError
from .homogeneous import ContactFormFamily, _rodrigues_batch, _skew_batch
from .models import cp1, linear_contact_sphere, s1xs2, torus
from .pipelines import TransformationFamily
from .sphere import SphereMapEvaluator
from .triangulation import base_triangulation
from .unitary import UnitaryFamily, deinterleave, interleave, polar_batch


# ---------------------------------------------------------------------------
# unitary families


def constant_unitary(n, k=1, matrix=None):
    C = np.eye(n, dtype=complex) if matrix is None else np.asarray(matrix, complex)

    def rule(X):
        return np.repeat(C[None, :, :], X.shape[0], axis=0)

    return UnitaryFamily(2 * k - 1, n, rule, lipschitz=0.0, vectorized=True,
                         name=f"constant(U({n}))")


def su2_tautological(n=2):
    """The 3-sphere of special unitaries whose first column is the parameter,
    embedded in the top-left block of U(n).  Its order-2 index is 1."""
    if n < 2:
        raise MaslovError("tautological family needs size >= 2")

    def rule(X):
        z1 = X[:, 0] + 1j * X[:, 1]
        z2 = X[:, 2] + 1j * X[:, 3]
        M = np.zeros((X.shape[0], n, n), dtype=complex)
        M[:, 0, 0] = z1
        M[:, 0, 1] = -np.conj(z2)
        M[:, 1, 0] = z2
        M[:, 1, 1] = np.conj(z1)
        for i in range(2, n):
            M[:, i, i] = 1.0
        return M

    return UnitaryFamily(3, n, rule, lipschitz=1.5, vectorized=True,
                         name=f"su2_generator(U({n}))")


def circle_angles(X):
    return np.arctan2(X[:, 1], X[:, 0])


def diag_loop(exponents):
    """Loop of diagonal unitaries with the given integer winding exponents."""
    exps = [int(e) for e in exponents]
    n = len(exps)

    def rule(X):
        th = circle_angles(X)
        M = np.zeros((X.shape[0], n, n), dtype=complex)
        for i, m in enumerate(exps):
            M[:, i, i] = np.exp(1j * m * th)
        return M

    lip = float(max((abs(e) for e in exps), default=0))
    return UnitaryFamily(1, n, rule, lipschitz=lip, vectorized=True,
                         name=f"diag_loop{tuple(exps)}")


def exp_wash(n=3, k=3, seed=0, terms=5, amplitude=0.15):
    """Null-homotopic exponential family with a full-rank column map.

    sigma -> exp(i * sum_j P_j(sigma) H_j) for fixed random Hermitian H_j and
    low-degree polynomial scalars P_j (alternating linear and quadratic);
    contracting the exponent linearly to zero contracts the family, so every
    index of it vanishes and its order-3 column degrees must come out even
    and zero.
    """
    rng = np.random.default_rng(seed)
    d = 2 * k
    herms = []
    for _ in range(terms):
        Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        H = 0.5 * (Z + np.conj(Z.T))
        herms.append(H / np.linalg.norm(H, 2))
    dirs = rng.normal(size=(terms, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs2 = rng.normal(size=(terms, d))
    dirs2 /= np.linalg.norm(dirs2, axis=1, keepdims=True)

    def rule(X):
        A = np.zeros((X.shape[0], n, n), dtype=complex)
        for j in range(terms):
            if j % 2 == 0:
                scal = X @ dirs[j]
            else:
                scal = (X @ dirs[j]) * (X @ dirs2[j])
            A += amplitude * scal[:, None, None] * herms[j][None, :, :]
        vals, vecs = np.linalg.eigh(A)
        phase = np.exp(1j * vals)
        return (vecs * phase[:, None, :]) @ np.conj(vecs.transpose(0, 2, 1))

    n_lin = (terms + 1) // 2
    lip = amplitude * (n_lin + 2.0 * (terms - n_lin))
    return UnitaryFamily(d - 1, n, rule, lipschitz=lip, vectorized=True,
                         name=f"exp_wash(n={n},seed={seed})")


def conjugate_family(family, C):
    C = np.asarray(C, dtype=complex)
    Ci = np.conj(C.T)

    def rule(X):
        return C[None] @ family.batch(X) @ Ci[None]

    return UnitaryFamily(family.param_dim, family.size, rule,
                         lipschitz=family.lipschitz, vectorized=True,
                         name=f"conj({family.name})")


def pointwise_product(f, g):
    if (f.param_dim, f.size) != (g.param_dim, g.size):
        raise MaslovError("product needs families of equal shape")
    lip = None
    if f.lipschitz is not None and g.lipschitz is not None:
        lip = f.lipschitz + g.lipschitz

    def rule(X):
        return f.batch(X) @ g.batch(X)

    return UnitaryFamily(f.param_dim, f.size, rule, lipschitz=lip,
                         vectorized=True, name=f"{f.name}*{g.name}")


def stabilize(family, n_total=None):
    """Embed as the lower-right block behind leading ones: diag(1, F)."""
    if n_total is None:
        n_total = family.size + 1
    pad = n_total - family.size
    if pad < 0:
        raise MaslovError("cannot stabilize into a smaller group")

    def rule(X):
        M = family.batch(X)
        out = np.zeros((X.shape[0], n_total, n_total), dtype=complex)
        for i in range(pad):
            out[:, i, i] = 1.0
        out[:, pad:, pad:] = M
        return out

    return UnitaryFamily(family.param_dim, n_total, rule,
                         lipschitz=family.lipschitz, vectorized=True,
                         name=f"stab({family.name},{n_total})")


def reflect_parameter(family, axis=0):
    A = np.eye(family.param_dim + 1)
    A[axis, axis] = -1.0
    return precompose_parameter(family, A, tag="refl")


def precompose_parameter(family, A, tag="rot"):
    A = np.asarray(A, dtype=float)

    def rule(X):
        return family.batch(X @ A.T)

    return UnitaryFamily(family.param_dim, family.size, rule,
                         lipschitz=family.lipschitz, vectorized=True,
                         name=f"{tag}({family.name})")


def sample_unitary_family(family, level):
    """Grid payload of a family: samples at the canonical triangulation vertices."""
    tri = base_triangulation(family.param_dim, level)
    M = family.batch(tri.vertices)
    return {
        "dim": family.param_dim,
        "level": level,
        "size": family.size,
        "samples": np.stack([M.real, M.imag], axis=-1).tolist(),
    }


def sampled_unitary_family(payload):
    """Family interpolated from vertex samples over a declared triangulation.

    Evaluation locates the spherical simplex whose radial cone contains the
    query, blends the vertex matrices with the normalized cone coordinates
    and re-unitarizes (polar factor).
    """
    dim = int(payload["dim"])
    level = int(payload["level"])
    size = int(payload["size"])
    raw = np.asarray(payload["samples"], dtype=float)
    tri = base_triangulation(dim, level)
    if raw.shape != (tri.num_vertices, size, size, 2):
        raise MaslovError(
            f"sample array has shape {raw.shape}, expected "
            f"({tri.num_vertices}, {size}, {size}, 2)")
    samples = raw[..., 0] + 1j * raw[..., 1]
    corners = tri.vertices[tri.simplices].transpose(0, 2, 1)  # columns = vertices
    inv = np.linalg.inv(corners)

    def rule(X):
        out = np.empty((X.shape[0], size, size), dtype=complex)
        for start in range(0, X.shape[0], 512):
            chunk = X[start:start + 512]
            mu = np.einsum("tij,nj->nti", inv, chunk)
            ok = (mu >= -1e-12).all(axis=2)
            pick = np.argmax(ok, axis=1)
            if not ok[np.arange(len(chunk)), pick].all():
                raise MaslovError("query point not covered by the declared triangulation")
            w = mu[np.arange(len(chunk)), pick]
            w = np.clip(w, 0.0, None)
            w /= w.sum(axis=1, keepdims=True)
            verts = tri.simplices[pick]
            blend = np.einsum("nv,nvij->nij", w, samples[verts])
            out[start:start + 512] = polar_batch(blend)
        return out

    return UnitaryFamily(dim, size, rule, vectorized=True, name="sampled_unitary")


# ---------------------------------------------------------------------------
# transformation families


def contact_sphere_action(unitary_family):
    """A unitary family acting linearly on the sphere of C^n."""
    n = unitary_family.size

    def action(X, p):
        z = deinterleave(np.asarray(p, float)[None, :])[0]
        return interleave(np.einsum("nij,j->ni", unitary_family.batch(X), z))

    def differential(X, p):
        return unitary_family.batch(X)

    lip = unitary_family.lipschitz

    return TransformationFamily(
        unitary_family.param_dim, "linear_contact_sphere", action, differential,
        name=unitary_family.name, unitary=unitary_family,
        orbit_lipschitz=None if lip is None else lip * math.pi / 2.0,
    )


def torus_translation(dim=2, direction=1, turns=1, along="x"):
    """Loop translating ``turns`` times around one coordinate circle.

    ``direction`` picks the symplectic pair, ``along`` the position ("x") or
    momentum ("y") coordinate of that pair.
    """
    if not 1 <= direction <= dim // 2:
        raise MaslovError("translation direction outside the torus coordinates")
    if along not in ("x", "y"):
        raise MaslovError("translation axis must be 'x' or 'y'")
    v = np.zeros(dim)
    v[2 * (direction - 1) + (0 if along == "x" else 1)] = float(turns)

    def action(X, p):
        t = circle_angles(X) / (2.0 * np.pi)
        return np.mod(np.asarray(p, float)[None, :] + t[:, None] * v[None, :], 1.0)

    def differential(X, p):
        n = dim // 2
        return np.repeat(np.eye(n, dtype=complex)[None], X.shape[0], axis=0)

    def lift_action(t, pts):
        return np.asarray(pts, float) + float(t) * v[None, :]

    def orbit_winding(p):
        return v

    return TransformationFamily(
        1, "torus", action, differential,
        name=f"torus_translation(dim={dim},dir={direction},along={along},turns={turns})",
        lift_action=lift_action, orbit_winding=orbit_winding,
    )


def cp1_rotation(axis=(0.0, 0.0, 1.0), turns=1):
    """Loop of rotations of the round 2-sphere about a fixed axis."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)

    def matrices(X):
        th = circle_angles(X) * float(turns)
        return _rodrigues_batch(np.repeat(a[None, :], X.shape[0], axis=0), th)

    def action(X, p):
        return np.einsum("nij,j->ni", matrices(X), np.asarray(p, float))

    def differential(X, p):
        return matrices(X)

    return TransformationFamily(
        1, "cp1", action, differential,
        name=f"cp1_rotation(turns={turns})",
        orbit_lipschitz=float(abs(turns)) + 0.1,
    )


# ---------------------------------------------------------------------------
# contact-form families on S^1 x S^2


def _triple_form_coeff(E, P):
    """Coefficients of e0*a0 + e1*a1 + e2*a2 for the three cyclic tight forms."""
    x, y, z = P[:, 1], P[:, 2], P[:, 3]
    e0, e1, e2 = E[:, 0], E[:, 1], E[:, 2]
    return np.column_stack([
        e0 * z + e1 * x + e2 * y,
        -e0 * y + e2 * z,
        e0 * x - e1 * z,
        e1 * y - e2 * x,
    ])


def _triple_form_jacobian(E, P):
    n = P.shape[0]
    e0, e1, e2 = E[:, 0], E[:, 1], E[:, 2]
    J = np.zeros((n, 4, 4))
    zero = np.zeros(n)
    J[:, 1, :] = np.column_stack([e1, zero, e0, -e2])
    J[:, 2, :] = np.column_stack([e2, -e0, zero, e1])
    J[:, 3, :] = np.column_stack([e0, e2, -e1, zero])
    return J


def linear_contact_sphere_family():
    """The 2-sphere of combinations of the three cyclic tight contact forms.

    Every member is contact; the homogeneous index of the family is 1, so
    its class has infinite order.
    """
    return ContactFormFamily(_triple_form_coeff, _triple_form_jacobian,
                             name="linear_contact_sphere_S")


_DC0 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


def _delta_parts(E, P):
    theta = P[:, 0]
    v = P[:, 1:]
    Rp = _rodrigues_batch(E, theta)
    Rm = Rp.transpose(0, 2, 1)
    w = np.einsum("nij,nj->ni", Rm, v)
    c0 = np.column_stack([-w[:, 1], w[:, 0], np.zeros(len(w))])
    ew = np.cross(E, w)
    return Rp, w, c0, ew


def _delta_coeff(E, P):
    Rp, w, c0, ew = _delta_parts(E, P)
    ctheta = w[:, 2] - np.einsum("ni,ni->n", c0, ew)
    cvec = np.einsum("nij,nj->ni", Rp, c0)
    return np.column_stack([ctheta, cvec])


def _delta_jacobian(E, P):
    Rp, w, c0, ew = _delta_parts(E, P)
    n = P.shape[0]
    cvec = np.einsum("nij,nj->ni", Rp, c0)
    # gradient of the theta-coefficient with respect to the rotated point
    grad_psi = np.zeros((n, 3))
    grad_psi[:, 2] = 1.0
    grad_psi += np.cross(E, c0)
    grad_psi -= np.column_stack([ew[:, 1], -ew[:, 0], np.zeros(n)])

    J = np.zeros((n, 4, 4))
    J[:, 0, 0] = np.einsum("ni,ni->n", grad_psi, -ew)
    J[:, 1:, 0] = np.einsum("nij,nj->ni", Rp, grad_psi)
    dc0_ew = np.einsum("ij,nj->ni", _DC0, ew)
    J[:, 0, 1:] = np.cross(E, cvec) - np.einsum("nij,nj->ni", Rp, dc0_ew)
    Jstd = Rp @ _DC0[None, :, :] @ Rp.transpose(0, 2, 1)
    J[:, 1:, 1:] = Jstd.transpose(0, 2, 1)
    return J


def delta_rotation_family():
    """Push-forwards of the tight structure by the axis-rotation 2-sphere.

    delta(e) rotates the sphere factor about axis e by the circle coordinate;
    the family of transported contact planes evaluates to a constant plane at
    the standard datum and its homogeneous index is 0.
    """
    return ContactFormFamily(_delta_coeff, _delta_jacobian, name="delta_rotations")


def constant_tight_family():
    base = np.array([1.0, 0.0, 0.0])

    def coeff(E, P):
        return _triple_form_coeff(np.repeat(base[None], P.shape[0], axis=0), P)

    def jac(E, P):
        return _triple_form_jacobian(np.repeat(base[None], P.shape[0], axis=0), P)

    return ContactFormFamily(coeff, jac, name="constant_tight")


# ---------------------------------------------------------------------------
# plain sphere maps (degree scenarios)


def identity_map(m):
    return SphereMapEvaluator(m, m, lambda X: X, lipschitz=1.0, vectorized=True,
                              name=f"identity(S{m})")


def antipodal_map(m):
    return SphereMapEvaluator(m, m, lambda X: -X, lipschitz=1.0, vectorized=True,
                              name=f"antipodal(S{m})")


def circle_power(d):
    def rule(X):
        th = circle_angles(X) * int(d)
        return np.column_stack([np.cos(th), np.sin(th)])

    return SphereMapEvaluator(1, 1, rule, lipschitz=float(abs(int(d))) + 0.01,
                              vectorized=True, name=f"circle_power({d})")


# ---------------------------------------------------------------------------
# registry


def build_model(model_id, params):
    params = dict(params or {})
    if model_id == "linear_contact_sphere":
        return linear_contact_sphere(int(params.get("n", 2)))
    if model_id == "torus":
        return torus(int(params.get("dim", 2)))
    if model_id == "cp1":
        return cp1()
    if model_id == "s1xs2":
        return s1xs2()
    raise UnknownBuiltinError(f"unknown model '{model_id}'")


def build_unitary_family(family_id, params):
    params = dict(params or {})
    if family_id == "su2_generator":
        return su2_tautological(int(params.get("n", 2)))
    if family_id == "diag_loop":
        return diag_loop(params.get("exponents", [1]))
    if family_id == "constant":
        return constant_unitary(int(params.get("n", 2)), int(params.get("k", 1)))
    if family_id == "exp_wash":
        return exp_wash(n=int(params.get("n", 3)), k=int(params.get("k", 3)),
                        seed=int(params.get("seed", 0)))
    if family_id == "sampled_unitary":
        return sampled_unitary_family(params)
    raise UnknownBuiltinError(f"unknown family '{family_id}'")


def build_transformation_family(family_id, params, model):
    params = dict(params or {})
    if model.kind == "linear_contact_sphere":
        return contact_sphere_action(build_unitary_family(family_id, params))
    if family_id == "torus_translation":
        return torus_translation(dim=int(params.get("dim", model.dimension)),
                                 direction=int(params.get("direction", 1)),
                                 turns=int(params.get("turns", 1)),
                                 along=params.get("along", "x"))
    if family_id == "cp1_rotation":
        return cp1_rotation(axis=params.get("axis", (0.0, 0.0, 1.0)),
                            turns=int(params.get("turns", 1)))
    raise UnknownBuiltinError(
        f"unknown family '{family_id}' for model '{model.kind}'")


def build_contact_family(family_id, params):
    if family_id == "linear_contact_sphere_S":
        return linear_contact_sphere_family()
    if family_id == "delta_rotations":
        return delta_rotation_family()
    if family_id == "constant_tight":
        return constant_tight_family()
    raise UnknownBuiltinError(f"unknown contact family '{family_id}'")


def build_sphere_map(family_id, params):
    params = dict(params or {})
    if family_id == "identity":
        return identity_map(int(params.get("m", 2)))
    if family_id == "antipodal":
        return antipodal_map(int(params.get("m", 2)))
    if family_id == "circle_power":
        return circle_power(int(params.get("d", 1)))
    raise UnknownBuiltinError(f"unknown sphere map '{family_id}'")


CATALOG = [
    {
        "name": "su2_generator",
        "kind": "unitary",
        "models": ["linear_contact_sphere"],
        "reproduces": "generator 3-sphere of 2x2 special unitaries; its order-2 "
                      "index is 1, in U(2) and after embedding in U(n)",
    },
    {
        "name": "diag_loop",
        "kind": "unitary",
        "models": ["linear_contact_sphere"],
        "reproduces": "diagonal phase loops; the order-1 index equals the sum of "
                      "the winding exponents (the determinant winding number)",
    },
    {
        "name": "constant",
        "kind": "unitary",
        "models": ["linear_contact_sphere"],
        "reproduces": "constant families; every index vanishes",
    },
    {
        "name": "exp_wash",
        "kind": "unitary",
        "models": ["linear_contact_sphere"],
        "reproduces": "null-homotopic exponential families over the 5-sphere; "
                      "order-3 column degrees must be even (factorial divisibility)",
    },
    {
        "name": "sampled_unitary",
        "kind": "unitary",
        "models": ["linear_contact_sphere"],
        "reproduces": "grid-sampled family payload with spherical barycentric "
                      "interpolation; indices agree with the sampled source",
    },
    {
        "name": "torus_translation",
        "kind": "transformation",
        "models": ["torus"],
        "reproduces": "full translation loop: order-1 index 0 in the coordinate "
                      "frame and 1 in the twisted frame; unit flux against the "
                      "transverse cycle",
    },
    {
        "name": "cp1_rotation",
        "kind": "transformation",
        "models": ["cp1"],
        "reproduces": "full rotation loop of the 2-sphere: capped order-1 index "
                      "1 = -1 mod 2 at the fixed point",
    },
    {
        "name": "linear_contact_sphere_S",
        "kind": "contact_form",
        "models": ["s1xs2"],
        "reproduces": "2-sphere of combined tight contact forms; homogeneous "
                      "index 1, hence a class of infinite order",
    },
    {
        "name": "delta_rotations",
        "kind": "contact_form",
        "models": ["s1xs2"],
        "reproduces": "push-forward sphere of the tight structure by axis "
                      "rotations; homogeneous index 0, distinguishing it from "
                      "the combined-forms sphere",
    },
    {
        "name": "constant_tight",
        "kind": "contact_form",
        "models": ["s1xs2"],
        "reproduces": "constant family at the tight form; homogeneous index 0",
    },
    {
        "name": "identity / antipodal / circle_power",
        "kind": "sphere_map",
        "models": [],
        "reproduces": "degree axioms: identity 1, antipodal (-1)^(m+1), d-fold "
                      "circle cover d",
    },
]


def list_builtins():
    """Catalog of builtin families with the statement each one reproduces."""
    return [dict(entry) for entry in CATALOG]
