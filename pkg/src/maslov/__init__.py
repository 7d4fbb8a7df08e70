"""Numerical Maslov-type and homogeneous indices on model manifolds.

The package computes, at desk scale and with numerical certificates:

* integer degrees of maps between spheres (piecewise-linear counting with
  refinement-agreement and quadrature cross-checks),
* indices of order k of families of unitary matrices over S^(2k-1), via the
  column fibration of U(n) and the factorial normalization,
* A-type (globally framed) and B-type (capped, mod minimal Chern number)
  indices of transformation families on the linear contact sphere, the torus
  and the round 2-sphere, plus the flux of torus loops,
* homogeneous indices of families of contact structures on S^1 x S^2 and the
  stable homotopy tables of the spaces of linear structures.
"""

__version__ = "0.1.0"

from .degree import DegreeResult, certified_degree, degree_estimate_integral, pl_degree
from .exceptions import MaslovError
from .homogeneous import (
    ContactFormFamily,
    EvaluationDatum,
    GroupDescriptor,
    axis_angle_rotation,
    contact_check,
    epsilon_index,
    gauss_evaluation,
    stable_group,
)
from .models import (
    ModelManifold,
    cp1,
    frame_policy,
    linear_contact_sphere,
    minimal_chern,
    s1xs2,
    torus,
)
from .pipelines import (
    FluxResult,
    IndexReport,
    TransformationFamily,
    coordinate_cycle,
    flux,
    index_a,
    index_b,
    pushed_frame_transition,
)
from .sphere import (
    Homotopy,
    MissedPoint,
    SphereMapEvaluator,
    UnitVector,
    find_missed_point,
    geodesic_contraction,
)
from .triangulation import SphereTriangulation, base_triangulation
from .unitary import (
    ReductionTrace,
    UnitaryFamily,
    column_map,
    mu_k_unitary,
    reduce_once,
    unitarize,
)

__all__ = [
    "__version__",
    "ContactFormFamily",
    "DegreeResult",
    "EvaluationDatum",
    "FluxResult",
    "GroupDescriptor",
    "Homotopy",
    "IndexReport",
    "MaslovError",
    "MissedPoint",
    "ModelManifold",
    "ReductionTrace",
    "SphereMapEvaluator",
    "SphereTriangulation",
    "TransformationFamily",
    "UnitVector",
    "UnitaryFamily",
    "axis_angle_rotation",
    "base_triangulation",
    "certified_degree",
    "column_map",
    "contact_check",
    "coordinate_cycle",
    "cp1",
    "degree_estimate_integral",
    "epsilon_index",
    "find_missed_point",
    "flux",
    "frame_policy",
    "gauss_evaluation",
    "geodesic_contraction",
    "index_a",
    "index_b",
    "linear_contact_sphere",
    "minimal_chern",
    "mu_k_unitary",
    "pl_degree",
    "pushed_frame_transition",
    "reduce_once",
    "s1xs2",
    "stable_group",
    "torus",
    "unitarize",
]
