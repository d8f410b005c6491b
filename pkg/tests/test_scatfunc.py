import numpy as np
import pytest

from wedgelab import scatfunc as sf


def test_constant_functions_pass_identities_exactly():
    t = np.linspace(-3, 3, 11)
    for c in (1, -1):
        rep = sf.validate_s2(sf.s2_constant(c), t, tol=0.0)
        assert rep["pass"]


def test_blaschke_identities():
    rng = np.random.default_rng(0)
    s2 = sf.s2_blaschke((0.7,))
    rep = sf.validate_s2(s2, rng.normal(scale=2, size=200), tol=1e-12)
    assert rep["pass"], rep


def test_all_builtin_s2_pass_at_1000_samples():
    rng = np.random.default_rng(1)
    thetas = rng.normal(scale=2.0, size=1000)
    for s2 in sf.builtin_s2_functions():
        rep = sf.validate_s2(s2, thetas, tol=1e-10)
        assert rep["pass"], (s2.describe(), rep)


def test_builtin_phi_inner_property():
    rng = np.random.default_rng(2)
    for phi in sf.builtin_phi_functions():
        rep = sf.validate_inner(phi, n_samples=1000, tol=1e-10, rng=rng)
        assert rep["pass"], (phi.describe(), rep)


def test_conjugate_reciprocal_constant():
    phi = sf.phi_constant(-1)
    sharp = sf.conjugate_reciprocal(phi)
    z = np.array([0.5 + 0.3j, 2.0 + 1.0j])
    assert np.abs(sharp(z) - (-1)).max() < 1e-15


def test_conjugate_reciprocal_blaschke_closed_form():
    # algebraic oracle: the conjugate-reciprocal of (z - ia)/(z + ia) is -(z - i/a)/(z + i/a)
    a = 0.8
    phi = sf.phi_blaschke((a,))
    sharp = sf.conjugate_reciprocal(phi)
    oracle = sf.phi_blaschke((1.0 / a,))
    rng = np.random.default_rng(3)
    z = rng.normal(size=50) + 1j * np.abs(rng.normal(size=50))
    assert np.abs(sharp(z) + oracle(z)).max() < 1e-12


def test_conjugate_reciprocal_is_involution():
    phi = sf.phi_blaschke((0.8, 1.6))
    twice = sf.conjugate_reciprocal(sf.conjugate_reciprocal(phi))
    rng = np.random.default_rng(4)
    z = rng.normal(size=50) + 1j * np.abs(rng.normal(size=50))
    assert np.abs(twice(z) - phi(z)).max() < 1e-12


def test_conjugate_reciprocal_flags_origin():
    sharp = sf.conjugate_reciprocal(sf.phi_blaschke((1.0,)))
    with pytest.raises(ZeroDivisionError):
        sharp(np.array([0.0 + 0j]))


def test_rapidity_form_constant():
    main, crossed = sf.rapidity_form(sf.phi_constant(1))
    t = np.linspace(-2, 2, 7)
    assert np.abs(main(t) - 1).max() == 0
    assert np.abs(crossed(t) - 1).max() == 0


def test_rapidity_form_unimodular_on_real_line():
    main, crossed = sf.rapidity_form(sf.phi_blaschke((0.8, 1.6)))
    rng = np.random.default_rng(5)
    t = rng.normal(scale=2, size=100)
    assert np.abs(np.abs(main(t)) - 1).max() < 1e-10
    assert np.abs(np.abs(crossed(t)) - 1).max() < 1e-10


def test_rapidity_form_crossing_partner_value():
    phi = sf.phi_blaschke((0.8,))
    main, crossed = sf.rapidity_form(phi)
    t = 0.4
    assert abs(crossed(t) - phi(-np.exp(-t))) < 1e-15
    assert abs(main(t) - phi(np.exp(t))) < 1e-15


def test_reciprocal_pair_symmetry():
    phi = sf.phi_reciprocal_pair((0.8, 1.7))
    ok, dev = sf.is_reciprocal_symmetric(phi)
    assert ok and dev < 1e-12
    ok, dev = sf.is_reflection_symmetric(phi)
    assert ok and dev < 1e-12
    # a single factor is NOT a fixed point of the conjugate-reciprocal map
    ok, _ = sf.is_reciprocal_symmetric(sf.phi_blaschke((0.8,)))
    assert not ok


def test_rapidity_form_of_reciprocal_pair_is_valid_exchange_function():
    # transported to the strip, the symmetric inner built-ins satisfy all four identities
    main, _ = sf.rapidity_form(sf.phi_reciprocal_pair((0.8,)))
    rng = np.random.default_rng(6)
    rep = sf.validate_s2(main, rng.normal(scale=2, size=300), tol=1e-10)
    assert rep["pass"], rep


def test_registry_lookup():
    phi = sf.from_registry("phi.reciprocal_pair", a=[0.5])
    assert phi.family == "phi.reciprocal_pair"
    with pytest.raises(ValueError):
        sf.from_registry("phi.unknown")
