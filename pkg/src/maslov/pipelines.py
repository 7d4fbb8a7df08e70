"""End-to-end index computations on the built-in models.

An A-type index uses a named global frame policy; a B-type index builds its
frame by contracting the orbit sphere of the family to the basepoint and
transporting the basepoint frame along the contraction, and is reduced mod
the model's minimal Chern number when that is positive.  The flux of a torus
loop against a cycle is the signed area swept by the cycle.
"""

from dataclasses import dataclass

import numpy as np

from ._params import (
    DEFAULT_DEGREE_BUDGET,
    DEFAULT_SEARCH_BUDGET,
    POINTED_TOL,
    TRANSPORT_STEP,
    tolerances_dict,
)
from .degree import DegreeResult
from .exceptions import MaslovError, NotNullHomotopicError
from .models import AmbientFrame, fiber_ops, minimal_chern
from .sphere import SphereMapEvaluator, find_missed_point, geodesic_contraction
from .unitary import ReductionTrace, UnitaryFamily, mu_k_unitary, polar_batch


def reference_parameter(param_dim):
    """The marked point of the parameter sphere at which families must be
    the identity transformation."""
    e = np.zeros(param_dim + 1)
    e[0] = 1.0
    return e


def model_basepoint(model):
    if model.kind == "linear_contact_sphere":
        p = np.zeros(model.dimension + 1)
        p[0] = 1.0
        return p
    if model.kind == "cp1":
        return np.array([0.0, 0.0, 1.0])
    if model.kind == "torus":
        return np.zeros(model.dimension)
    raise MaslovError(f"model {model.name} has no transformation basepoint")


class TransformationFamily:
    """A sphere of transformations of one model manifold.

    ``action(X, p)`` moves the point p by each parameter in the batch X;
    ``differential(X, p)`` returns the corresponding fiber maps (ambient
    complex matrices on the contact sphere and torus, real 3x3 matrices on
    the 2-sphere).  Families are pure evaluators.
    """

    def __init__(self, param_dim, model_kind, action, differential, name="family",
                 unitary=None, lift_action=None, orbit_winding=None,
                 breakpoints=(), orbit_lipschitz=None):
        self.param_dim = int(param_dim)
        self.model_kind = model_kind
        self.action = action
        self.differential = differential
        self.name = name
        self.unitary = unitary
        self.lift_action = lift_action
        self.orbit_winding = orbit_winding
        self.breakpoints = tuple(breakpoints)
        self.orbit_lipschitz = orbit_lipschitz

    def check_pointed(self, p):
        sigma = reference_parameter(self.param_dim)[None, :]
        moved = self.action(sigma, p)[0]
        if np.linalg.norm(moved - p) > POINTED_TOL:
            raise MaslovError(
                f"family {self.name} does not fix the basepoint at the reference parameter")
        D = np.asarray(self.differential(sigma, p)[0])
        if np.abs(D - np.eye(D.shape[0])).max() > POINTED_TOL:
            raise MaslovError(
                f"family {self.name} is not the identity at the reference parameter")


@dataclass(frozen=True)
class IndexReport:
    """A computed index with its numerical certificates."""

    value: int
    modulus: int
    index_type: str
    degree_result: DegreeResult
    trace: ReductionTrace
    model_id: str
    family_id: str
    raw_integer: int
    tolerances: dict

    def to_dict(self):
        return {
            "value": self.value,
            "modulus": self.modulus,
            "index_type": self.index_type,
            "raw_integer": self.raw_integer,
            "model": self.model_id,
            "family": self.family_id,
            "degree": self.degree_result.to_dict(),
            "trace": self.trace.to_dict(),
            "tolerances": self.tolerances,
        }


def pushed_frame_transition(model, family, p=None, policy=None):
    """Matrix of the pushed frame in the reference frame, as a unitary family.

    For the linear contact sphere with the ambient policy a unitary family is
    its own transition.  On the torus the transition conjugates the (complex)
    differential by the policy's frame phases at the endpoint positions.
    """
    if policy is None or not policy.applies_to(model):
        raise MaslovError(f"frame policy does not apply to model {model.name}")
    if p is None:
        p = model_basepoint(model)

    if isinstance(policy, AmbientFrame):
        if family.unitary is None:
            raise MaslovError("ambient policy needs a linear unitary family")
        return family.unitary

    if model.kind == "torus":
        ph_p = policy.phases(np.asarray(p, float)[None, :])[0]

        def rule(X):
            D = family.differential(X, p)
            q = family.action(X, p)
            ph_q = policy.phases(q)
            T = (1.0 / ph_q)[:, :, None] * D * ph_p[None, None, :]
            return polar_batch(T)

        return UnitaryFamily(
            family.param_dim, ph_p.size, rule, vectorized=True,
            name=f"transition({family.name},{policy.policy})",
        )

    raise MaslovError(f"no frame transition rule for model {model.name}")


def index_a(model, family, k, policy, budget=DEFAULT_DEGREE_BUDGET, seed=0, jobs=1):
    """A-type index of order k for a family with a global frame policy.

    Requires the model's order-k minimal Chern number to be 0 (a global frame
    exists); the result is an integer (modulus 0).
    """
    if minimal_chern(model, k) != 0:
        raise MaslovError(
            f"model {model.name} admits no global order-{k} frame; use the B-type index")
    transition = pushed_frame_transition(model, family, policy=policy)
    mu, trace, dres = mu_k_unitary(transition, k, budget=budget, seed=seed, jobs=jobs)
    return IndexReport(
        value=mu, modulus=0, index_type="A", degree_result=dres, trace=trace,
        model_id=model.name, family_id=family.name, raw_integer=mu,
        tolerances=tolerances_dict(),
    )


def _capping_transition(model, family, p, budget, seed):
    """Unitary transition family from the capped orbit frame.

    Contracts the orbit sphere to the basepoint (certified missed point +
    geodesic contraction on sphere models, straight line in the universal
    cover on the torus), transports the basepoint fiber frame along the
    contraction with re-unitarization at each step, and compares the pushed
    frame with the transported one.
    """
    family.check_pointed(p)
    sigma_b = reference_parameter(family.param_dim)

    if model.kind == "torus":
        if family.orbit_winding is None:
            raise MaslovError("torus family lacks an orbit winding rule")
        w = np.asarray(family.orbit_winding(p))
        if np.any(np.abs(w) > 1e-9):
            raise NotNullHomotopicError(
                f"orbit of {family.name} winds {w.astype(int).tolist()}; not contractible")
        n = model.dimension // 2

        def rule(X):
            return polar_batch(family.differential(X, p))

        return UnitaryFamily(family.param_dim, n, rule, vectorized=True,
                             name=f"capped({family.name})")

    # sphere-like models: the orbit lives on the model sphere itself
    dim_sphere = len(p) - 1
    orbit = SphereMapEvaluator(
        family.param_dim, dim_sphere,
        lambda X: family.action(X, p),
        lipschitz=family.orbit_lipschitz, vectorized=True,
        name=f"orbit({family.name})",
    )
    missed = find_missed_point(orbit, budget=budget, seed=seed)
    contraction = geodesic_contraction(orbit, missed.point, p)
    ops = fiber_ops(model)
    base = ops.base_frame(p)
    steps = int(round(1.0 / TRANSPORT_STEP))
    tgrid = np.linspace(1.0, 0.0, steps + 1)

    def transported(X):
        frames = np.repeat(base[None, ...], X.shape[0], axis=0)
        pts = None
        for t in tgrid[1:]:
            pts = contraction.batch_at(X, t)
            frames = ops.project_frames(pts, frames)
        return frames, pts

    frame_b, _ = transported(sigma_b[None, :])
    frame_b = frame_b[0]

    def rule(X):
        frames_out, pts_out = transported(np.asarray(X, float))
        D = family.differential(X, p)
        if model.kind == "cp1":
            T = ops.transition(D, frames_out, frame_b, pts_out)
        else:
            T = ops.transition(D, frames_out, frame_b)
        return polar_batch(T)

    return UnitaryFamily(family.param_dim, ops.fiber_rank, rule, vectorized=True,
                         name=f"capped({family.name})")


def index_b(model, family, k, p=None, budget=DEFAULT_DEGREE_BUDGET, seed=0, jobs=1):
    """B-type index of order k at a basepoint with contractible orbit.

    The orbit sphere must be verifiably contractible (a failed contraction is
    an error, never a guess).  The result is reduced mod the model's minimal
    Chern number when that is positive.
    """
    if p is None:
        p = model_basepoint(model)
    p = np.asarray(p, dtype=float)
    search_budget = min(DEFAULT_SEARCH_BUDGET, max(budget // 8, 256))
    transition = _capping_transition(model, family, p, search_budget, seed)
    mu, trace, dres = mu_k_unitary(transition, k, budget=budget, seed=seed, jobs=jobs)
    modulus = minimal_chern(model, k)
    value = mu % modulus if modulus > 0 else mu
    return IndexReport(
        value=value, modulus=modulus, index_type="B", degree_result=dres,
        trace=trace, model_id=model.name, family_id=family.name, raw_integer=mu,
        tolerances=tolerances_dict(),
    )


# ---------------------------------------------------------------------------
# flux


@dataclass(frozen=True)
class FluxResult:
    value: float
    error_estimate: float

    def to_dict(self):
        return {"value": self.value, "error_estimate": self.error_estimate}


def standard_symplectic_matrix(dim):
    """Constant coefficients of sum dx_j ^ dy_j in interleaved coordinates."""
    omega = np.zeros((dim, dim))
    for j in range(0, dim, 2):
        omega[j, j + 1] = 1.0
        omega[j + 1, j] = -1.0
    return omega


class TorusCycle:
    """A closed curve on the torus given by a continuous lift [0,1] -> R^d."""

    def __init__(self, lift, name="cycle"):
        self.lift = lift
        self.name = name
        ends = self.lift(np.array([0.0, 1.0]))
        gap = ends[1] - ends[0]
        if np.any(np.abs(gap - np.round(gap)) > 1e-9):
            raise MaslovError(f"cycle {name} does not close on the torus")


def coordinate_cycle(dim, axis, turns=1):
    """The cycle winding ``turns`` times along one coordinate circle."""
    e = np.zeros(dim)
    e[axis] = float(turns)

    def lift(U):
        return np.asarray(U, float)[:, None] * e[None, :]

    return TorusCycle(lift, name=f"axis{axis}x{turns}")


def _panel_quadrature(loop, cycle, omega, t0, t1, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    tn = 0.5 * (t1 - t0) * (nodes + 1.0) + t0
    tw = 0.5 * (t1 - t0) * weights
    un = 0.5 * (nodes + 1.0)
    uw = 0.5 * weights
    h = 1e-6
    base_u = cycle.lift(un)
    up = cycle.lift(un + h)
    um = cycle.lift(un - h)
    total = 0.0
    for ti, wi in zip(tn, tw):
        Ct_p = loop.lift_action(ti + h, base_u)
        Ct_m = loop.lift_action(ti - h, base_u)
        dt = (Ct_p - Ct_m) / (2.0 * h)
        Cu_p = loop.lift_action(ti, up)
        Cu_m = loop.lift_action(ti, um)
        du = (Cu_p - Cu_m) / (2.0 * h)
        vals = np.einsum("ni,ij,nj->n", dt, omega, du)
        total += wi * float(vals @ uw)
    return total


def flux(loop, cycle, omega=None, order=24):
    """Signed area swept by a cycle under a loop of torus maps.

    2-D Gauss-Legendre quadrature of the pullback of the constant 2-form over
    the cylinder (t, u) -> loop(t)(cycle(u)), computed in the universal cover
    with central-difference partials.  The returned error estimate compares
    two quadrature orders.  Requires loop(0) = identity.
    """
    if loop.lift_action is None:
        raise MaslovError(f"family {loop.name} has no lifted action; flux undefined")
    probe = cycle.lift(np.linspace(0.1, 0.9, 5))
    if np.abs(loop.lift_action(0.0, probe) - probe).max() > POINTED_TOL:
        raise MaslovError("flux needs a loop starting at the identity")
    dim = probe.shape[1]
    if omega is None:
        omega = standard_symplectic_matrix(dim)
    omega = np.asarray(omega, dtype=float)
    panels = sorted({0.0, 1.0, *loop.breakpoints})

    def run(order_):
        return sum(
            _panel_quadrature(loop, cycle, omega, a, b, order_)
            for a, b in zip(panels, panels[1:])
        )

    coarse = run(order)
    fine = run(order + 10)
    return FluxResult(value=float(fine), error_estimate=float(abs(fine - coarse)))


def concatenate_loops(first, second):
    """Loop concatenation (first for t <= 1/2, then second after first(1))."""
    if first.lift_action is None or second.lift_action is None:
        raise MaslovError("concatenation needs lifted actions")

    def lift_action(t, x):
        if t <= 0.5:
            return first.lift_action(2.0 * t, x)
        return second.lift_action(2.0 * t - 1.0, first.lift_action(1.0, x))

    bps = {0.5}
    bps.update(b / 2.0 for b in first.breakpoints)
    bps.update(0.5 + b / 2.0 for b in second.breakpoints)
    return TransformationFamily(
        first.param_dim, first.model_kind,
        action=None, differential=None,
        name=f"{first.name}*{second.name}",
        lift_action=lift_action, breakpoints=sorted(bps),
    )
