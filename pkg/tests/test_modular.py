import numpy as np
import pytest

from wedgelab import modular as md
from wedgelab.modular import (algebra_closure, commutant_dense, factor_and_minimal_projection,
                              kms_deviation, modular_from_vector, span_residual,
                              standard_form_algebra, standard_form_vector,
                              toy_charge_unitary, twisted_generators,
                              twisted_wedge_algebra, verify_commutant_twisted,
                              verify_modular_twisted)


def rnd(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


# ---------- closures ----------

def test_closure_of_identity_is_one_dimensional():
    alg = algebra_closure([np.eye(3)])
    assert alg.size == 1 and alg.stabilized


def test_closure_of_matrix_units_is_full():
    e01 = np.array([[0, 1], [0, 0]], dtype=complex)
    alg = algebra_closure([e01])
    assert alg.size == 4 and alg.stabilized


def test_twisted_closure_matches_brute_force_span():
    # oracle: orthonormalized span of explicitly enumerated words
    n, N, k = 2, 2, 1
    M = standard_form_algebra(n)
    V, _ = toy_charge_unitary(n, N, np.array([0, 1]))
    gens, _ = twisted_generators(M, V, k, N)
    alg, _ = twisted_wedge_algebra(M, V, k, N)
    words = [np.eye(16, dtype=complex)] + list(gens)
    for _ in range(3):
        words = words + [w @ g for w in words[-len(gens) * 4:] for g in gens]
    oracle = md.orthonormal_basis(words)
    assert len(oracle) == alg.size == 16
    assert span_residual(alg.basis, oracle) <= 1e-10


def test_structural_twisted_basis_matches_closure():
    n, N, k = 3, 3, 1
    M = standard_form_algebra(n)
    V, _ = toy_charge_unitary(n, N, np.arange(n))
    alg_c, _ = twisted_wedge_algebra(M, V, k, N, method="closure")
    alg_s, _ = twisted_wedge_algebra(M, V, k, N, method="structural")
    assert alg_c.size == alg_s.size == n ** 4
    assert span_residual(alg_c.basis, alg_s.basis) <= 1e-9


# ---------- modular data ----------

def test_tracial_vector_gives_trivial_modular_operator():
    n = 3
    alg = algebra_closure(standard_form_algebra(n))
    Om = standard_form_vector(n, np.ones(n))
    data = modular_from_vector(alg, Om)
    assert np.abs(data.delta - np.eye(n * n)).max() <= 1e-12


def test_modular_operator_matches_density_matrix_formula():
    # polar-decomposition output against the closed form rho (x) rho^{-1}
    lam = np.array([0.8, 0.2])
    alg = algebra_closure(standard_form_algebra(2))
    data = modular_from_vector(alg, standard_form_vector(2, lam))
    rho = np.diag(lam)
    assert np.abs(data.delta - np.kron(rho, np.linalg.inv(rho))).max() <= 1e-12


def test_modular_defining_property_on_random_elements():
    rng = np.random.default_rng(0)
    n = 3
    alg = algebra_closure(standard_form_algebra(n))
    Om = standard_form_vector(n, np.array([0.5, 0.3, 0.2]))
    data = modular_from_vector(alg, Om)
    for _ in range(50):
        x = np.kron(rnd(rng, (n, n)), np.eye(n))
        assert np.abs(data.s_apply(x @ Om) - x.conj().T @ Om).max() <= 1e-12


def test_modular_consistency_invariants():
    alg = algebra_closure(standard_form_algebra(2))
    data = modular_from_vector(alg, standard_form_vector(2, np.array([0.7, 0.3])))
    cons = data.consistency()
    assert max(cons.values()) <= 1e-12


def test_kms_identity_and_its_orientation():
    rng = np.random.default_rng(1)
    n = 2
    alg = algebra_closure(standard_form_algebra(n))
    Om = standard_form_vector(n, np.array([0.8, 0.2]))
    data = modular_from_vector(alg, Om)
    x = np.kron(rnd(rng, (n, n)), np.eye(n))
    y = np.kron(rnd(rng, (n, n)), np.eye(n))
    assert kms_deviation(data, x, y) <= 1e-12
    # flipped conjugation orientation is wrong for non-tracial vectors
    wrong = abs(np.vdot(Om, data.delta @ x @ np.linalg.inv(data.delta) @ y @ Om)
                - np.vdot(Om, y @ x @ Om))
    assert wrong > 1e-3


def test_modular_rejects_non_cyclic_vector():
    alg = algebra_closure(standard_form_algebra(2))
    bad = np.zeros(4, dtype=complex)
    bad[0] = 1.0   # product vector: cyclic for M (x) M', not for M alone
    with pytest.raises(ValueError):
        modular_from_vector(alg, bad)


# ---------- twisted algebras: modular data and commutant ----------

def test_twisted_wedge_requires_stable_algebra():
    n = 2
    M = [np.kron(np.eye(2), np.array([[0, 1], [0, 0]], dtype=complex))]
    V, _ = toy_charge_unitary(n, 2, np.array([0, 1]))
    # M here is 1 (x) e01 whose closure is not Ad V stable in the required sense?
    # use a genuinely unstable algebra: the span of a single non-graded projection
    P = np.kron(np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex), np.eye(2))
    with pytest.raises(ValueError):
        twisted_wedge_algebra([P], V, 1, 2)


def test_untwisted_limit_is_tensor_product():
    # k = 0: the closure is span{x (x) 1} . span{1 (x) y} = M (x) M on H (x) H
    n = 2
    M = standard_form_algebra(n)
    V, _ = toy_charge_unitary(n, 2, np.array([0, 1]))
    alg, _ = twisted_wedge_algebra(M, V, 0, 2)
    gens = [np.kron(x, np.eye(n * n)) for x in M] + [np.kron(np.eye(n * n), y) for y in M]
    oracle = md.orthonormal_basis([a @ b for a in gens for b in gens] + gens)
    assert span_residual(alg.basis, oracle) <= 1e-10


def test_verify_modular_twisted_kappa_zero():
    rep = verify_modular_twisted(2, 2, 0, [0.8, 0.2])
    assert rep["max_deviation"] <= 1e-10


def test_verify_modular_twisted_m2():
    rep = verify_modular_twisted(2, 2, 1, [0.8, 0.2])
    assert rep["delta_deviation"] <= 1e-10
    assert rep["j_deviation"] <= 1e-10
    assert rep["kms_deviation"] <= 1e-10
    assert max(rep["modular_consistency"].values()) <= 1e-12


def test_verify_modular_twisted_bigger_toys():
    rep = verify_modular_twisted(3, 3, 2, [0.5, 0.3, 0.2])
    assert rep["max_deviation"] <= 1e-10
    rep = verify_modular_twisted(4, 2, 1, [0.4, 0.3, 0.2, 0.1])
    assert rep["max_deviation"] <= 1e-10


def test_twisted_vacuum_cyclic_separating():
    # separate clause of the construction: the closure passes the cyclic/separating
    # gate inside modular_from_vector
    n, N, k = 2, 3, 2
    M = standard_form_algebra(n)
    V, _ = toy_charge_unitary(n, N, np.array([0, 1]))
    alg, _ = twisted_wedge_algebra(M, V, k, N)
    Om = standard_form_vector(n, np.array([0.6, 0.4]))
    data = modular_from_vector(alg, np.kron(Om, Om))
    assert max(data.consistency().values()) <= 1e-10


def test_verify_commutant_twisted_kappa_zero():
    rep = verify_commutant_twisted(2, 2, 0, [0.8, 0.2])
    assert rep["dimension_match"] and rep["max_deviation"] <= 1e-10


def test_verify_commutant_twisted_m2():
    rep = verify_commutant_twisted(2, 2, 1, [0.8, 0.2])
    assert rep["dimension_match"]
    assert rep["span_residual"] <= 1e-12
    assert rep["cross_commutation"] <= 1e-12


def test_staged_commutant_matches_dense_solver():
    # dual route at the smallest size where both are exact
    n, N, k = 2, 2, 1
    dense = verify_commutant_twisted(n, N, k, [0.8, 0.2], method="dense")
    staged = verify_commutant_twisted(n, N, k, [0.8, 0.2], method="staged")
    assert dense["dimension_match"] and staged["dimension_match"]
    assert dense["span_residual"] <= 1e-10 and staged["span_residual"] <= 1e-10


def test_commutant_of_full_matrix_algebra_is_scalars():
    rng = np.random.default_rng(2)
    full = [rnd(rng, (3, 3)) for _ in range(3)]
    comm = commutant_dense(full + [np.eye(3)], 3)
    assert len(comm) == 1
    z = comm[0]
    assert np.abs(z - z[0, 0] * np.eye(3)).max() <= 1e-10


# ---------- type I structure ----------

def test_minimal_projection_trivial_grading():
    rep = factor_and_minimal_projection(2, 2, 0)
    assert rep["center_trivial"] and rep["minimal"]


@pytest.mark.parametrize("n,N", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_minimal_projection_twisted(n, N):
    rep = factor_and_minimal_projection(n, N, 1)
    assert rep["center_trivial"], rep
    assert rep["minimal"], rep
    assert rep["fixed_point_deviation"] <= 1e-12
    assert rep["projection_membership_residual"] <= 1e-10
