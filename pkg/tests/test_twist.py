import numpy as np
import pytest

from wedgelab import twist
from wedgelab.fock import FockSpace, charge_labels, second_quantize
from wedgelab.modular import standard_form_algebra, toy_charge_unitary
from wedgelab.onepspace import make_grid, poincare_u1
from wedgelab.twist import (ChargeGrading, build_R_tilde, double_fourier,
                            fourier_component, grading_from_unitary,
                            rtilde_disintegration_check, tau_k, tau_k_inverse,
                            twist_unitary)


def rnd(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


# ---------- gradings ----------

def test_grading_from_identity():
    g, projs = grading_from_unitary(np.eye(3), 2)
    assert np.all(g.labels == 0)
    assert np.abs(projs[0] - np.eye(3)).max() < 1e-12


def test_grading_from_diagonal_sign():
    g, projs = grading_from_unitary(np.diag([1.0, -1.0]), 2)
    assert list(g.labels) == [0, 1]
    # direct eigen-decomposition oracle: the projections are the eigenprojections
    assert np.abs(projs[0] - np.diag([1.0, 0.0])).max() < 1e-12
    assert np.abs(projs[1] - np.diag([0.0, 1.0])).max() < 1e-12


def test_grading_reconstructs_unitary():
    N = 3
    V = np.diag(np.exp(2j * np.pi * np.array([0, 1, 2, 1]) / N))
    g, _ = grading_from_unitary(V, N)
    recon = np.diag(np.exp(2j * np.pi * g.labels / N))
    assert np.abs(recon - V).max() <= 1e-12


def test_grading_rejects_wrong_order_and_moved_vacuum():
    with pytest.raises(ValueError):
        grading_from_unitary(np.diag([1.0, np.exp(0.4j)]), 2)
    V = np.diag([-1.0, 1.0])
    with pytest.raises(ValueError):
        grading_from_unitary(V, 2, omega=np.array([1.0, 0.0]))


def test_cyclic_labels_range_checked():
    with pytest.raises(ValueError):
        ChargeGrading(labels=np.array([0, 3]), group=("cyclic", 2))


# ---------- twist unitaries ----------

def test_twist_kappa_zero_is_identity():
    ga = ChargeGrading(labels=np.array([0, 1, 2]), group=("circle",))
    tw = twist_unitary(ga, ga, kappa=0.0)
    assert np.abs(tw.matrix() - np.eye(9)).max() == 0


def test_twist_kappa_one_is_identity_for_integer_labels():
    ga = ChargeGrading(labels=np.array([-2, 0, 3]), group=("circle",))
    tw = twist_unitary(ga, ga, kappa=1.0)
    assert np.abs(tw.matrix() - np.eye(9)).max() < 1e-12


def test_twisted_action_on_graded_element():
    # Ad Vt(1 (x) y_m) = V(m kappa) (x) y_m for a grade-m element
    rng = np.random.default_rng(0)
    n, N, kappa = 3, 3, 0.37
    charges = np.array([0, 1, 2])
    v = np.diag(np.exp(2j * np.pi * charges / N))
    V = np.kron(v, np.conj(v))
    g, _ = grading_from_unitary(V, N)
    gc = ChargeGrading(labels=np.where(g.labels <= N // 2, g.labels, g.labels - N),
                       group=("circle",))
    tw = twist_unitary(gc, gc, kappa=kappa)
    # y of definite grade m: e_ij (x) 1 with m = c_i - c_j
    i, j = 0, 2
    m = charges[i] - charges[j]
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    y = np.kron(e, np.eye(n))
    lhs = tw.ad(np.kron(np.eye(n * n), y))
    Vmk = np.diag(np.exp(2j * np.pi * (m * kappa) * gc.labels))
    rhs = np.kron(Vmk, y)
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_twist_commutes_with_second_quantized_translations():
    # both are diagonal in the graded momentum basis
    grid = make_grid(1.0, 3, 1.0)
    space = FockSpace(grid, 2, n_species=2)
    labels = charge_labels(space, (+1, -1))
    flat = np.concatenate([labels[n] for n in range(space.n_max + 1)])
    gc = ChargeGrading(labels=flat, group=("circle",))
    tw = twist_unitary(gc, gc, kappa=0.41)
    U1 = poincare_u1((0.6, 0.3), 0.0, grid)
    G = second_quantize(space, U1).dense()
    GG = np.kron(G, G)
    T = tw.matrix()
    assert np.abs(T @ GG - GG @ T).max() <= 1e-12


def test_commutativity_lemma_matrix_toy():
    # x (x) 1 commutes with Ad Vt (x' (x) 1) for x in M, x' in M', graded twist
    rng = np.random.default_rng(1)
    n, N, k = 2, 2, 1
    M = standard_form_algebra(n)
    V, _ = toy_charge_unitary(n, N, np.array([0, 1]))
    g, _ = grading_from_unitary(V, N)
    tw = twist_unitary(g, g, k=k, N=N)
    H = n * n
    x = sum(rng.normal() * b for b in M)
    xp = np.kron(np.eye(n), rnd(rng, (n, n)))   # commutant element 1 (x) y
    lhs = np.kron(x, np.eye(H)) @ tw.ad(np.kron(xp, np.eye(H)))
    rhs = tw.ad(np.kron(xp, np.eye(H))) @ np.kron(x, np.eye(H))
    assert np.abs(lhs - rhs).max() <= 1e-12


# ---------- discrete Fourier components ----------

def test_fourier_trivial_action():
    rng = np.random.default_rng(2)
    x = rnd(rng, (3, 3))
    x0 = fourier_component(x, np.eye(3), 0, N=2)
    x1 = fourier_component(x, np.eye(3), 1, N=2)
    assert np.abs(x0 - x).max() < 1e-14
    assert np.abs(x1).max() < 1e-14


def test_fourier_diagonal_split_hand_oracle():
    rng = np.random.default_rng(3)
    V = np.diag([1.0, -1.0])
    x = rnd(rng, (2, 2))
    x0 = fourier_component(x, V, 0, N=2)
    x1 = fourier_component(x, V, 1, N=2)
    # by hand: (x + VxV)/2 keeps the diagonal, (x - VxV)/2 the off-diagonal
    assert np.abs(x0 - np.diag(np.diag(x))).max() < 1e-14
    assert np.abs(x1 - (x - np.diag(np.diag(x)))).max() < 1e-14
    assert np.abs((x0 + x1) - x).max() < 1e-14


def test_fourier_components_reconstruct_and_transform():
    rng = np.random.default_rng(4)
    N = 3
    V = np.diag(np.exp(2j * np.pi * np.array([0, 1, 2]) / N))
    x = rnd(rng, (3, 3))
    comps = [fourier_component(x, V, l, N=N) for l in range(N)]
    assert np.abs(sum(comps) - x).max() <= 1e-12
    for l, xl in enumerate(comps):
        assert np.abs(V @ xl @ V.conj().T - np.exp(2j * np.pi * l / N) * xl).max() <= 1e-12


def test_fourier_circle_action_exact_finite_sum():
    rng = np.random.default_rng(5)
    labels = np.array([-1, 0, 2])
    Vk = lambda kap: np.diag(np.exp(2j * np.pi * kap * labels))
    x = rnd(rng, (3, 3))
    acc = np.zeros_like(x)
    for l in range(-3, 4):
        xl = fourier_component(x, Vk, l, label_bound=3)
        acc = acc + xl
        assert np.abs(Vk(0.23) @ xl @ Vk(0.23).conj().T
                      - np.exp(2j * np.pi * l * 0.23) * xl).max() < 1e-12
    assert np.abs(acc - x).max() < 1e-12


def test_graded_components_multiply_additively():
    N = 3
    V = np.diag(np.exp(2j * np.pi * np.array([0, 1, 2]) / N))
    rng = np.random.default_rng(6)
    x = rnd(rng, (3, 3))
    y = rnd(rng, (3, 3))
    for l1 in range(N):
        for l2 in range(N):
            prod = fourier_component(x, V, l1, N=N) @ fourier_component(y, V, l2, N=N)
            back = fourier_component(prod, V, (l1 + l2) % N, N=N)
            assert np.abs(back - prod).max() <= 1e-12


# ---------- tau_k ----------

def test_tau_zero_is_identity():
    rng = np.random.default_rng(7)
    V = np.diag([1.0, -1.0])
    xt = rnd(rng, (4, 4))
    assert np.abs(tau_k(xt, V, 2, 0) - xt).max() <= 1e-12


def test_tau_on_elementary_tensor_component():
    # x_l (x) y_m maps to x_l V^{km} (x) y_m
    N, k = 3, 2
    V = np.diag(np.exp(2j * np.pi * np.array([0, 1, 2]) / N))
    e01 = np.zeros((3, 3), dtype=complex); e01[0, 1] = 1.0   # grade -1 under Ad V
    e12 = np.zeros((3, 3), dtype=complex); e12[1, 2] = 1.0
    xt = np.kron(e01, e12)
    m = (0 - 1) - (1 - 2)  # both grade -1; m refers to the second factor: -1
    out = tau_k(xt, V, N, k)
    expect = np.kron(e01 @ np.linalg.matrix_power(V, (k * ((-1) % N)) % N), e12)
    assert np.abs(out - expect).max() <= 1e-12


def test_tau_bound_and_vector_action():
    from wedgelab.modular import tau_bound_report
    for N in (2, 3):
        rep = tau_bound_report(2, N, 1, n_draws=100, rng=np.random.default_rng(8))
        assert rep["bound_satisfied"], rep
        assert rep["vector_action_deviation"] <= 1e-12
        assert rep["inverse_deviation"] <= 1e-11


def test_double_fourier_reconstruction():
    rng = np.random.default_rng(9)
    N = 2
    V = np.diag([1.0, -1.0])
    xt = rnd(rng, (4, 4))
    comps = double_fourier(xt, V, N)
    assert np.abs(sum(comps.values()) - xt).max() <= 1e-12
    for (l, m), c in comps.items():
        U = np.kron(V, np.eye(2))
        assert np.abs(U @ c @ U.conj().T - np.exp(2j * np.pi * l / N) * c).max() <= 1e-12


# ---------- R-tilde ----------

def test_rtilde_trivial_function_is_identity():
    grid = make_grid(1.0, 3)
    space = FockSpace(grid, 2)
    rt = build_R_tilde(lambda z: np.ones_like(z, dtype=complex), space)
    for (na, nb) in rt.arena.sector_pairs():
        assert np.abs(rt.diag_block(na, nb) - 1.0).max() == 0


def test_rtilde_one_one_entry():
    from wedgelab.scatfunc import phi_blaschke
    phi = phi_blaschke((0.8,))
    grid = make_grid(1.2, 4, 1.3)
    space = FockSpace(grid, 2)
    rt = build_R_tilde(phi.evaluator, space)
    D = rt.diag_block(1, 1)
    for i in range(4):
        for j in range(4):
            expect = phi(np.exp(grid.theta[j] - grid.theta[i]))
            assert abs(D[i, j] - expect) < 1e-14


def test_rtilde_two_one_sector_against_kronecker_oracle():
    from wedgelab.scatfunc import phi_blaschke
    phi = phi_blaschke((0.8,))
    grid = make_grid(1.0, 3, 1.0)
    space = FockSpace(grid, 2)
    rt = build_R_tilde(phi.evaluator, space)
    D = rt.diag_block(2, 1)
    mom = grid.lightcone_momentum(+1)
    for ia, occ in enumerate(space.occupations[2]):
        qs = [mom[m] for m, c in enumerate(occ) for _ in range(c)]
        for ib in range(3):
            expect = phi(mom[ib] / qs[0]) * phi(mom[ib] / qs[1])
            assert abs(D[ia, ib] - expect) < 1e-14


def test_rtilde_disintegrations_agree():
    from wedgelab.scatfunc import phi_reciprocal_pair
    grid = make_grid(1.0, 3)
    space = FockSpace(grid, 2)
    rt = build_R_tilde(phi_reciprocal_pair((0.8,)).evaluator, space)
    assert rtilde_disintegration_check(rt) <= 1e-13


def test_rtilde_unitary_diagonal():
    from wedgelab.scatfunc import phi_blaschke
    grid = make_grid(1.0, 3)
    space = FockSpace(grid, 2)
    rt = build_R_tilde(phi_blaschke((0.8, 1.6)).evaluator, space)
    for (na, nb) in rt.arena.sector_pairs():
        assert np.abs(np.abs(rt.diag_block(na, nb)) - 1.0).max() < 1e-13
