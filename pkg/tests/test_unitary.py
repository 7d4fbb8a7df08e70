import numpy as np
import pytest

from maslov.exceptions import DivisibilityError, MaslovError, UnitarityError
from maslov.families import (
    conjugate_family,
    constant_unitary,
    diag_loop,
    pointwise_product,
    reflect_parameter,
    precompose_parameter,
    stabilize,
    su2_tautological,
)
from maslov.sphere import random_unit
from maslov.unitary import (
    UnitaryFamily,
    column_map,
    mu_k_unitary,
    reduce_once,
    unitarize,
)


def det_winding(family, samples=10_000):
    """Independent order-1 oracle: accumulated angle of det(F) around the circle."""
    th = np.linspace(0.0, 2 * np.pi, samples, endpoint=True)
    X = np.column_stack([np.cos(th), np.sin(th)])
    dets = np.linalg.det(family.batch(X))
    angles = np.unwrap(np.angle(dets))
    turns = (angles[-1] - angles[0]) / (2 * np.pi)
    assert abs(turns - round(turns)) < 1e-6
    return int(round(turns))


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# --- unitarize -------------------------------------------------------------

def test_unitarize_identity():
    assert np.allclose(unitarize(np.eye(3)), np.eye(3))


def test_unitarize_near_identity():
    rng = np.random.default_rng(0)
    E = rng.normal(size=(3, 3)) * 1e-10
    U = unitarize(np.eye(3) + E)
    assert np.abs(U - np.eye(3)).max() < 1e-9
    assert np.abs(np.conj(U.T) @ U - np.eye(3)).max() < 1e-12


def test_unitarize_rejects_rank_deficiency():
    M = np.eye(3, dtype=complex)
    M[:, 2] = 0.0
    with pytest.raises(MaslovError):
        unitarize(M)


def test_unitarize_distance_bound():
    rng = np.random.default_rng(1)
    for _ in range(20):
        M = random_unitary(rng, 3) + 1e-4 * (rng.normal(size=(3, 3))
                                             + 1j * rng.normal(size=(3, 3)))
        U = unitarize(M)
        lhs = np.linalg.norm(U - M, 2)
        rhs = np.linalg.norm(np.conj(M.T) @ M - np.eye(3), 2)
        assert lhs <= 10 * rhs


# --- column map ------------------------------------------------------------

def test_column_map_of_identity_family_is_constant():
    f = constant_unitary(2, k=1)
    col = column_map(f, 1)
    X = random_unit(np.random.default_rng(2), 1, 20)
    out = col.batch(X)
    assert np.abs(out - np.array([1.0, 0, 0, 0])).max() < 1e-12


def test_column_map_diag_circle():
    f = diag_loop([1, 0])
    col = column_map(f, 1)
    th = np.linspace(0, 2 * np.pi, 17, endpoint=False)
    X = np.column_stack([np.cos(th), np.sin(th)])
    out = col.batch(X)
    expected = np.column_stack([np.cos(th), np.sin(th),
                                np.zeros_like(th), np.zeros_like(th)])
    assert np.abs(out - expected).max() < 1e-12


def test_su2_column_map_is_the_parameter():
    col = column_map(su2_tautological(2), 1)
    X = random_unit(np.random.default_rng(3), 3, 1000)
    assert np.abs(col.batch(X) - X).max() < 1e-12


def test_column_index_bounds():
    with pytest.raises(MaslovError):
        column_map(su2_tautological(2), 3)


# --- reduce_once -----------------------------------------------------------

def test_reduce_block_diagonal_family_passes_through():
    inner = su2_tautological(2)
    fam = stabilize(inner, 3)  # first column constantly e_1
    reduced, stage = reduce_once(fam, 2, seed=0)
    X = random_unit(np.random.default_rng(4), 3, 50)
    assert np.abs(reduced.batch(X) - inner.batch(X)).max() < 1e-12
    assert stage.missed_line is None
    assert (stage.size_from, stage.size_to) == (3, 2)


def test_reduce_constant_family():
    rng = np.random.default_rng(5)
    C = random_unitary(rng, 3)
    fam = UnitaryFamily(1, 3, lambda X: np.repeat(C[None], X.shape[0], 0),
                        lipschitz=0.0, vectorized=True, name="constC")
    reduced, _ = reduce_once(fam, 1, seed=1)
    X = random_unit(rng, 1, 30)
    out = reduced.batch(X)
    assert np.abs(out - out[0]).max() < 1e-10  # still constant
    mu, _, _ = mu_k_unitary(reduced, 1, seed=1)
    assert mu == 0


def test_reduction_preserves_order_two_index():
    fam = conjugate_family(stabilize(su2_tautological(2), 3),
                           random_unitary(np.random.default_rng(6), 3))
    mu_before, _, _ = mu_k_unitary(fam, 2, seed=2)
    reduced, _ = reduce_once(fam, 2, seed=3)
    mu_after, _, _ = mu_k_unitary(reduced, 2, seed=4)
    assert mu_before == mu_after == 1


def test_reduce_requires_room():
    with pytest.raises(MaslovError):
        reduce_once(su2_tautological(2), 2, seed=0)


# --- mu_k ------------------------------------------------------------------

def test_mu1_single_winding_in_u3():
    mu, trace, dres = mu_k_unitary(diag_loop([1, 0, 0]), 1, seed=5)
    assert mu == 1
    assert dres.certified
    assert [s.size_from for s in trace.stages] == [3, 2]


def test_mu1_matches_winding_oracle_on_products():
    f = diag_loop([1])
    g = diag_loop([2])
    prod = pointwise_product(f, g)
    assert det_winding(prod) == 3
    mu, _, _ = mu_k_unitary(prod, 1, seed=6)
    assert mu == 3


def test_mu2_su2_generator():
    mu, _, dres = mu_k_unitary(su2_tautological(2), 2, seed=7)
    assert mu == 1
    assert dres.certified


def test_mu_constant_family_any_shape():
    for k, n in [(1, 2), (2, 2), (2, 3)]:
        mu, _, _ = mu_k_unitary(constant_unitary(n, k=k), k, seed=8)
        assert mu == 0


def test_order_cap_and_shape_checks():
    with pytest.raises(MaslovError):
        mu_k_unitary(diag_loop([1]), 2, seed=0)  # wrong parameter sphere
    with pytest.raises(MaslovError):
        mu_k_unitary(su2_tautological(2), 3, seed=0)  # k > n


def test_divisibility_guard_rejects_discontinuous_section():
    # pointwise-unitary completion of the identity column map of S^5: its
    # column degree 1 is odd, impossible for a continuous family, and the
    # factorial divisibility check must refuse it
    def fake_rule(X):
        z = X[:, 0::2] + 1j * X[:, 1::2]
        N = X.shape[0]
        M = np.empty((N, 3, 3), dtype=complex)
        M[:, :, 0] = z
        basis = np.eye(3, dtype=complex)
        for i in range(N):
            cols = [z[i]]
            for b in basis:
                w = b - sum(np.vdot(c, b) * c for c in cols)
                nrm = np.linalg.norm(w)
                if nrm > 1e-8:
                    cols.append(w / nrm)
                if len(cols) == 3:
                    break
            M[i, :, 1] = cols[1]
            M[i, :, 2] = cols[2]
        return M

    fake = UnitaryFamily(5, 3, fake_rule, vectorized=True, name="fake-section")
    with pytest.raises(DivisibilityError):
        mu_k_unitary(fake, 3, seed=9)


def test_unitarity_drift_is_an_error():
    bad = UnitaryFamily(1, 2, lambda X: 0.9 * np.repeat(np.eye(2, dtype=complex)[None],
                                                        X.shape[0], 0),
                        vectorized=True)
    with pytest.raises(UnitarityError):
        bad.batch(random_unit(np.random.default_rng(10), 1, 4))


# --- structural invariants --------------------------------------------------

def test_homomorphism_order_one():
    rng = np.random.default_rng(11)
    for n in (2, 3):
        e1 = rng.integers(-2, 3, size=n)
        e2 = rng.integers(-2, 3, size=n)
        f = conjugate_family(diag_loop(e1), random_unitary(rng, n))
        g = diag_loop(e2)
        mu_f, _, _ = mu_k_unitary(f, 1, seed=12)
        mu_g, _, _ = mu_k_unitary(g, 1, seed=13)
        mu_fg, _, _ = mu_k_unitary(pointwise_product(f, g), 1, seed=14)
        assert mu_fg == mu_f + mu_g == int(e1.sum() + e2.sum())


def test_homomorphism_order_two():
    taut = su2_tautological(2)
    sq = pointwise_product(taut, taut)
    mu, _, _ = mu_k_unitary(sq, 2, seed=15)
    assert mu == 2


def test_conjugation_invariance():
    rng = np.random.default_rng(16)
    fam = diag_loop([2, -1, 0])
    conj = conjugate_family(fam, random_unitary(rng, 3))
    assert mu_k_unitary(conj, 1, seed=17)[0] == mu_k_unitary(fam, 1, seed=18)[0] == 1
    taut = su2_tautological(2)
    conj2 = conjugate_family(taut, random_unitary(rng, 2))
    assert mu_k_unitary(conj2, 2, seed=19)[0] == 1


def test_column_choice_invariance():
    # the column index applies to the final size-k family, so order-2 runs
    # can read either column; reordering the columns of a diagonal loop by a
    # permutation conjugation must not change the order-1 index either
    taut = su2_tautological(2)
    for j in (1, 2):
        assert mu_k_unitary(taut, 2, seed=20, column=j)[0] == 1
    sq = pointwise_product(taut, conjugate_family(
        taut, random_unitary(np.random.default_rng(28), 2)))
    for j in (1, 2):
        assert mu_k_unitary(sq, 2, seed=29, column=j)[0] == 2
    fam = diag_loop([1, 1, -1])
    perm = np.roll(np.eye(3), 1, axis=1).astype(complex)
    assert (mu_k_unitary(fam, 1, seed=21)[0]
            == mu_k_unitary(conjugate_family(fam, perm), 1, seed=21)[0] == 1)


def test_stabilization_invariance():
    fam = diag_loop([1, 2])
    assert mu_k_unitary(stabilize(fam, 3), 1, seed=22)[0] == 3
    taut = su2_tautological(2)
    assert mu_k_unitary(stabilize(taut, 3), 2, seed=23)[0] == 1


def test_reflection_negates_index():
    taut = su2_tautological(2)
    assert mu_k_unitary(reflect_parameter(taut, axis=0), 2, seed=24)[0] == -1
    fam = diag_loop([2])
    assert mu_k_unitary(reflect_parameter(fam, axis=1), 1, seed=25)[0] == -2


def test_rotation_reparametrization_invariance():
    taut = su2_tautological(2)
    theta = 0.7
    R = np.eye(4)
    R[0, 0] = R[1, 1] = np.cos(theta)
    R[0, 1], R[1, 0] = -np.sin(theta), np.sin(theta)
    assert mu_k_unitary(precompose_parameter(taut, R), 2, seed=26)[0] == 1


def test_oracle_equivalence_randomized():
    rng = np.random.default_rng(27)
    for trial in range(20):
        n = int(rng.integers(1, 4))
        exps = rng.integers(-3, 4, size=n)
        fam = diag_loop(exps)
        if rng.random() < 0.5 and n > 1:
            fam = conjugate_family(fam, random_unitary(rng, n))
        mu, _, _ = mu_k_unitary(fam, 1, seed=100 + trial)
        assert mu == det_winding(fam) == int(exps.sum())
