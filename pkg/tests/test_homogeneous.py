import numpy as np
import pytest

from maslov.exceptions import MaslovError
from maslov.families import (
    constant_tight_family,
    delta_rotation_family,
    linear_contact_sphere_family,
)
from maslov.homogeneous import (
    ContactFormFamily,
    EvaluationDatum,
    axis_angle_rotation,
    contact_check,
    epsilon_index,
    gauss_evaluation,
    stable_group,
)
from maslov.sphere import random_unit


# --- rotations ---------------------------------------------------------------

def test_rotation_angle_zero_is_identity():
    rng = np.random.default_rng(0)
    for _ in range(5):
        axis = rng.normal(size=3)
        assert np.abs(axis_angle_rotation(axis, 0.0) - np.eye(3)).max() < 1e-15


def test_rotation_quarter_turn_about_z():
    R = axis_angle_rotation([0, 0, 1], np.pi / 2)
    expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert np.abs(R - expected).max() < 1e-12
    v = np.array([0.3, -0.7, 0.2])
    assert np.allclose(R @ v, [0.7, 0.3, 0.2])


def test_rotation_one_parameter_group_law_and_determinant():
    rng = np.random.default_rng(1)
    for _ in range(10):
        axis = rng.normal(size=3)
        a, b = rng.uniform(-3, 3, size=2)
        Ra, Rb = axis_angle_rotation(axis, a), axis_angle_rotation(axis, b)
        assert np.abs(Ra @ Rb - axis_angle_rotation(axis, a + b)).max() < 1e-12
        assert abs(np.linalg.det(Ra) - 1.0) < 1e-12


def test_rotation_rejects_zero_axis():
    with pytest.raises(MaslovError):
        axis_angle_rotation([0, 0, 0], 1.0)


# --- datum -------------------------------------------------------------------

def test_standard_datum_is_valid():
    d = EvaluationDatum.standard()
    assert np.allclose(d.point, [0, 0, 0, 1])


def test_datum_rejects_non_tangent_frame():
    point = np.array([0.0, 0.0, 0.0, 1.0])
    frame = np.array([[1.0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1.0]])  # d_z not tangent
    with pytest.raises(MaslovError):
        EvaluationDatum(point, frame)


def test_datum_rejects_negative_orientation():
    point = np.array([0.0, 0.0, 0.0, 1.0])
    frame = np.array([[1.0, 0, 0, 0], [0, 0, 1.0, 0], [0, 1.0, 0, 0]])  # swapped
    with pytest.raises(MaslovError):
        EvaluationDatum(point, frame)


def test_random_data_are_valid():
    for seed in range(6):
        EvaluationDatum.random(seed=seed)


# --- gauss evaluation ----------------------------------------------------------

def test_gauss_of_combined_forms_at_standard_datum():
    # symbolic evaluation of the three cyclic forms at the top point gives the
    # orthogonal map e -> (e0, e2, -e1), determinant +1
    g = gauss_evaluation(linear_contact_sphere_family(), EvaluationDatum.standard())
    E = random_unit(np.random.default_rng(2), 2, 200)
    expected = np.column_stack([E[:, 0], E[:, 2], -E[:, 1]])
    assert np.abs(g.batch(E) - expected).max() < 1e-12


def test_gauss_of_rotation_pushforwards_is_constant_at_standard_datum():
    g = gauss_evaluation(delta_rotation_family(), EvaluationDatum.standard())
    E = random_unit(np.random.default_rng(3), 2, 200)
    out = g.batch(E)
    assert np.abs(out - np.array([1.0, 0.0, 0.0])).max() < 1e-12


def test_gauss_of_constant_family():
    g = gauss_evaluation(constant_tight_family(), EvaluationDatum.standard())
    E = random_unit(np.random.default_rng(4), 2, 50)
    assert np.abs(g.batch(E) - np.array([1.0, 0.0, 0.0])).max() < 1e-12


def test_gauss_outputs_are_unit_on_large_sample():
    for fam in (linear_contact_sphere_family(), delta_rotation_family()):
        g = gauss_evaluation(fam, EvaluationDatum.random(seed=5))
        E = random_unit(np.random.default_rng(6), 2, 10_000)
        assert np.allclose(np.linalg.norm(g.batch(E), axis=1), 1.0, atol=1e-12)


def test_gauss_reports_non_transverse_family():
    # a family whose form vanishes on the tangent space at some parameter
    def coeff(E, P):
        out = np.zeros((P.shape[0], 4))
        out[:, 0] = E[:, 0]  # theta-component only, vanishes at e0 = 0
        return out

    fam = ContactFormFamily(coeff, name="degenerate")
    g = gauss_evaluation(fam, EvaluationDatum.standard())
    with pytest.raises(MaslovError):
        g.batch(np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]))


# --- homogeneous indices -------------------------------------------------------

def test_epsilon_of_combined_forms_is_one():
    value, dres = epsilon_index(linear_contact_sphere_family(), seed=1)
    assert value == 1
    assert dres.certified


def test_epsilon_of_rotation_pushforwards_is_zero():
    value, dres = epsilon_index(delta_rotation_family(), seed=2)
    assert value == 0
    assert dres.certified


def test_epsilon_of_constant_family_is_zero():
    value, _ = epsilon_index(constant_tight_family(), seed=3)
    assert value == 0


def test_epsilon_datum_independence():
    sv, dv = set(), set()
    for seed in range(5):
        datum = EvaluationDatum.random(seed=seed)
        sv.add(epsilon_index(linear_contact_sphere_family(), datum, seed=30 + seed)[0])
        dv.add(epsilon_index(delta_rotation_family(), datum, seed=40 + seed)[0])
    assert sv == {1}
    assert dv == {0}


def test_epsilon_invariant_under_parameter_rotation():
    fam = linear_contact_sphere_family()
    R = axis_angle_rotation([1.0, 2.0, 0.5], 1.2)

    rotated = ContactFormFamily(
        lambda E, P: fam.coeff(E @ R.T, P),
        lambda E, P: fam.coeff_jacobian(E @ R.T, P),
        name="rotated",
    )
    value, _ = epsilon_index(rotated, seed=4)
    assert value == 1


# --- contact checks ------------------------------------------------------------

def test_contact_check_tight_form():
    ok, margin = contact_check(linear_contact_sphere_family(), [1.0, 0.0, 0.0], seed=0)
    assert ok
    assert abs(margin) > 0.5


def test_contact_check_rejects_closed_form():
    dtheta = ContactFormFamily(
        lambda E, P: np.column_stack([np.ones(len(P)), np.zeros((len(P), 3))]),
        lambda E, P: np.zeros((len(P), 4, 4)),
        name="dtheta",
    )
    ok, margin = contact_check(dtheta, [1.0, 0.0, 0.0], seed=0)
    assert not ok
    assert abs(margin) < 1e-12


def test_contact_check_on_parameter_grid():
    # every member of the combined-forms family is contact (20 x 20 grid)
    fam = linear_contact_sphere_family()
    phi = np.linspace(0.05, np.pi - 0.05, 20)
    psi = np.linspace(0.0, 2 * np.pi, 20, endpoint=False)
    for i, a in enumerate(phi):
        for j, b in enumerate(psi):
            e = [np.sin(a) * np.cos(b), np.sin(a) * np.sin(b), np.cos(a)]
            ok, _ = contact_check(fam, e, n_samples=120, seed=i * 20 + j)
            assert ok


def test_contact_check_rotation_pushforwards():
    fam = delta_rotation_family()
    rng = np.random.default_rng(7)
    for trial in range(8):
        e = random_unit(rng, 2)
        ok, _ = contact_check(fam, e, n_samples=300, seed=trial)
        assert ok


def test_delta_jacobian_matches_finite_differences():
    fam = delta_rotation_family()
    numeric = ContactFormFamily(fam._coeff, None)
    rng = np.random.default_rng(8)
    e = random_unit(rng, 2)
    P = np.column_stack([rng.uniform(0, 2 * np.pi, 10),
                         random_unit(rng, 2, 10)])
    exact = fam.coeff_jacobian(e, P)
    fd = numeric.coeff_jacobian(e, P)
    assert np.abs(exact - fd).max() < 1e-7


# --- group tables ---------------------------------------------------------------

@pytest.mark.parametrize("k,dim,group,stable", [
    (2, 8, "Z", True),       # k = 2 mod 4
    (7, 16, "Z2", True),     # k = 7 mod 8
    (8, 20, "Z2", True),     # k = 0 mod 8
    (6, 16, "Z", True),
    (1, 8, "0", True),
    (4, 12, "0", True),
    (2, 3, "Z", True),       # odd dimension resolves to 4
    (3, 3, "Z", False),      # recorded unstable value of the 2-sphere space
    (5, 5, "0", False),      # dim-6 space: recorded unstable value
    (5, 4, "unknown", False),
])
def test_stable_group_table(k, dim, group, stable):
    desc = stable_group(k, dim)
    assert desc.group == group
    assert desc.stable == stable


def test_stable_flag_definition():
    # flag set exactly when 1 <= k <= (resolved dimension) - 2
    for dim in (3, 4, 6, 8):
        resolved = dim if dim % 2 == 0 else dim + 1
        for k in range(1, 12):
            assert stable_group(k, dim).stable == (1 <= k <= resolved - 2)


def test_stable_group_rejects_bad_k():
    with pytest.raises(MaslovError):
        stable_group(0, 8)
