"""Numeric tolerances and default budgets shared across the package.

Every tolerance that appears in a report or a contract lives here so that
reports can echo the exact values used.
"""

UNIT_NORM_TOL = 1e-12        # unit vectors are normalized to this accuracy
UNITARITY_TOL = 1e-8         # allowed drift ||F*F - I|| for matrix families
ENDPOINT_TOL = 1e-9          # homotopy endpoints must match declared maps this well
CLEARANCE_EVAL_TOL = 1e-6    # contraction paths must stay this far from the missed point
REGULAR_BARY_TOL = 1e-9      # barycentric margin below which a target value is non-regular
DEGENERATE_DET_TOL = 1e-12   # image simplex treated as degenerate below this determinant
DEGENERATE_FRACTION = 0.01   # allowed fraction of degenerate near-target simplices
INTEGRAL_AGREEMENT = 0.25    # |quadrature estimate - integer| required for certification
FD_STEP = 1e-5               # finite-difference step for tangential Jacobians
TRANSPORT_STEP = 1e-2        # time step for discrete frame transport along cappings
SINGULAR_VALUE_FLOOR = 1e-6  # unitarize rejects matrices with smaller sigma_min
POINTED_TOL = 1e-6           # families must fix the basepoint at the reference parameter

MAX_REGULAR_RETRIES = 20
MAX_LADDER_LEVELS = 9
MAX_SPHERE_DIM = 6

DEFAULT_DEGREE_BUDGET = 3_000_000   # map evaluations per certified degree computation
DEFAULT_SEARCH_BUDGET = 20_000      # domain samples per missed-point search
DEFAULT_SEED = 2024


def tolerances_dict():
    """Snapshot of the tolerances, for inclusion in reports."""
    return {
        "unit_norm": UNIT_NORM_TOL,
        "unitarity": UNITARITY_TOL,
        "homotopy_endpoint": ENDPOINT_TOL,
        "clearance_eval": CLEARANCE_EVAL_TOL,
        "regular_barycentric": REGULAR_BARY_TOL,
        "degenerate_det": DEGENERATE_DET_TOL,
        "degenerate_fraction": DEGENERATE_FRACTION,
        "integral_agreement": INTEGRAL_AGREEMENT,
        "fd_step": FD_STEP,
        "transport_step": TRANSPORT_STEP,
        "singular_value_floor": SINGULAR_VALUE_FLOOR,
    }
