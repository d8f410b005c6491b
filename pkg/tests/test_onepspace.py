import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import eval_hermite

from wedgelab import onepspace as ops


def test_make_grid_trapezoid_weights():
    g = ops.make_grid(1.0, 3, 1.0)
    assert np.allclose(g.theta, [-1.0, 0.0, 1.0])
    assert np.allclose(g.weights, [0.5, 1.0, 0.5])


@pytest.mark.parametrize("bad", [
    dict(theta_half_width=0.0, n_points=3),
    dict(theta_half_width=-1.0, n_points=3),
    dict(theta_half_width=1.0, n_points=1),
    dict(theta_half_width=1.0, n_points=8, mass=0.0),
])
def test_make_grid_rejects_degenerate(bad):
    with pytest.raises(ValueError):
        ops.make_grid(**bad)


def test_hermite_orthogonality_on_fine_grid():
    # quadrature of exactly orthonormal functions reproduces the identity matrix;
    # width 0.7 keeps the k <= 5 tails below the grid edge at theta = 4
    g = ops.make_grid(4.0, 64, 1.0)
    s = 0.7
    funcs = []
    for k in range(6):
        norm = np.sqrt(np.sqrt(np.pi) * 2.0 ** k * math.factorial(k) * s)
        funcs.append(eval_hermite(k, g.theta / s) * np.exp(-(g.theta / s) ** 2 / 2) / norm)
    gram = np.array([[g.inner(f1, f2) for f2 in funcs] for f1 in funcs])
    assert np.abs(gram - np.eye(6)).max() <= 1e-6


def test_quadrature_inner_product_hermitian_positive():
    rng = np.random.default_rng(0)
    g = ops.make_grid(2.0, 17, 1.3)
    for _ in range(20):
        u = rng.normal(size=17) + 1j * rng.normal(size=17)
        v = rng.normal(size=17) + 1j * rng.normal(size=17)
        assert abs(g.inner(u, v) - np.conj(g.inner(v, u))) < 1e-13
        assert g.inner(u, u).real > 0
        assert abs(g.inner(u, u).imag) < 1e-14


def test_pm_transform_zero_function():
    g = ops.make_grid(1.0, 5)
    f = ops.TestFunction(evaluator=lambda a0, a1: np.zeros_like(np.asarray(a0) * a1),
                         support=((-1, 1), (-1, 1)))
    fp, fm = ops.pm_transform(f, g, n_quad=40)
    assert np.abs(fp.values).max() == 0
    assert np.abs(fm.values).max() == 0


def test_pm_transform_real_function_conjugation():
    g = ops.make_grid(1.5, 9)
    f = ops.bump((0.3, 0.8), (0.5, 0.7))
    fp, fm = ops.pm_transform(f, g)
    assert np.abs(fm.values - np.conj(fp.values)).max() < 1e-14


def test_pm_transform_gaussian_against_adaptive_quadrature():
    g = ops.make_grid(0.5, 3, 1.0)
    f = ops.gaussian((0.0, 0.0), (0.4, 0.4))
    fp, _ = ops.pm_transform(f, g, n_quad=160)
    i0 = 1  # theta = 0
    p0, p1 = 1.0, 0.0
    (l0, u0), (l1, u1) = f.support
    re = integrate.dblquad(lambda a1, a0: (f(a0, a1) * np.cos(p0 * a0 - p1 * a1)).item(),
                           l0, u0, l1, u1, epsabs=1e-12)[0]
    im = integrate.dblquad(lambda a1, a0: (f(a0, a1) * np.sin(p0 * a0 - p1 * a1)).item(),
                           l0, u0, l1, u1, epsabs=1e-12)[0]
    oracle = (re + 1j * im) / (2 * np.pi)
    assert abs(fp.values[i0] - oracle) < 1e-8
    # closed form of the 2D Gaussian transform as a second, independent anchor
    sigma = 0.4
    closed = sigma ** 2 * np.exp(-sigma ** 2 * (p0 ** 2 + p1 ** 2) / 2)
    assert abs(fp.values[i0] - closed) < 1e-8


def test_pm_transform_reports_unresolved_oscillation():
    g = ops.make_grid(4.0, 9, 1.0)   # momenta up to ~27 on a wide box
    f = ops.bump((0.0, 0.0), (3.0, 3.0))
    with pytest.raises(ops.QuadratureError):
        ops.pm_transform(f, g, n_quad=6, tol=1e-12)


def test_poincare_identity():
    g = ops.make_grid(1.0, 5)
    U = ops.poincare_u1((0.0, 0.0), 0.0, g)
    assert np.abs(U.matrix - np.eye(5)).max() == 0
    assert not U.boundary_loss


def test_poincare_time_translation_phases():
    g = ops.make_grid(1.0, 5, 1.0)
    t = 0.7
    U = ops.poincare_u1((t, 0.0), 0.0, g)
    expect = np.diag(np.exp(1j * np.cosh(g.theta) * t))
    assert np.abs(U.matrix - expect).max() < 1e-14


def test_poincare_boost_shift_preserves_interior_norm():
    g = ops.make_grid(2.0, 9)
    h = g.spacing
    psi = np.zeros(9, dtype=complex)
    psi[3:6] = [1.0, 2.0 - 1j, 0.5]    # interior support
    U = ops.poincare_u1((0.0, 0.0), h, g)
    shifted = U.apply(ops.OneParticleVector(psi, g))
    assert U.boundary_loss
    assert abs(shifted.norm() - ops.OneParticleVector(psi, g).norm()) < 1e-14
    assert np.abs(shifted.values[4:7] - psi[3:6]).max() < 1e-15


def test_poincare_rejects_off_grid_boost():
    g = ops.make_grid(1.0, 5)
    with pytest.raises(ValueError):
        ops.poincare_u1((0.0, 0.0), 0.3 * g.spacing, g)


def test_lightray_generator_values():
    g = ops.make_grid(1.0, 3, 1.0)
    plus = ops.lightray_generator(g, +1)
    minus = ops.lightray_generator(g, -1)
    assert abs(plus.matrix[1, 1] - 1.0) < 1e-15          # theta = 0, m = 1
    prod = np.diag(plus.matrix) * np.diag(minus.matrix)
    assert np.abs(prod - g.mass ** 2).max() < 1e-14      # p_+ p_- = m^2
    assert np.all(np.diag(plus.matrix).real > 0)


def test_lightray_functional_calculus_matches_scalar_oracle():
    g = ops.make_grid(1.5, 7, 1.2)
    func = lambda z: z / (z + 1j)
    A = ops.lightray_function(g, func, +1)
    oracle = func(1.2 * np.exp(g.theta))
    assert np.abs(np.diag(A.matrix) - oracle).max() < 1e-15


def test_wedge_and_spacelike_predicates():
    f = ops.bump((0.25, 2.4), (0.7, 0.7))
    g = ops.bump((-0.15, -2.5), (0.7, 0.7))
    assert ops.box_in_right_wedge(f.support)
    assert ops.box_in_left_wedge(g.support)
    assert ops.boxes_spacelike(f.support, g.support)
    assert not ops.box_in_right_wedge(g.support)
    h = ops.bump((0.95, 2.4), (0.7, 0.7))   # timelike translate of f
    assert not ops.boxes_spacelike(f.support, h.support)


def test_support_declaration_checked_by_sampling():
    f = ops.bump((0.0, 0.0), (1.0, 1.0))
    assert f.check_support() == 0.0
    lying = ops.TestFunction(evaluator=lambda a0, a1: np.ones_like(np.asarray(a0) + a1),
                             support=((-1, 1), (-1, 1)))
    assert lying.check_support() > 0.5
