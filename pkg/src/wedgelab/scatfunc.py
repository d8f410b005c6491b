"""Scattering functions S2 on the strip and inner symmetric functions phi on the half-plane.

S2 lives on the strip 0 <= Im z <= pi and obeys S2(t)^{-1} = conj(S2(t)) = S2(-t) = S2(t+i pi)
for real t. Inner symmetric phi lives on the closed upper half-plane, |phi| = 1 on the real
line; theta -> phi(e^theta) transports it to the strip.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class ScatteringFunction:
    """Evaluator with family metadata; domain is 'strip' (S2-type) or 'half-plane' (phi-type)."""
    evaluator: Callable
    family: str
    params: dict = field(default_factory=dict)
    domain: str = "strip"
    bound: float = 1.0

    def __call__(self, z):
        return self.evaluator(np.asarray(z, dtype=complex))

    def describe(self):
        pieces = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.family}({pieces})" if pieces else self.family


# ---------- built-in families ----------

def s2_constant(c):
    if c not in (1, -1):
        raise ValueError("constant scattering function must be +1 or -1")
    return ScatteringFunction(lambda z: np.full_like(z, c, dtype=complex),
                              family="s2.constant", params={"c": c}, domain="strip")


def s2_blaschke(b_values):
    """Product of strip factors (sinh t - i sin b)/(sinh t + i sin b), 0 < b < pi."""
    bs = tuple(float(b) for b in np.atleast_1d(b_values))
    for b in bs:
        if not 0 < b < np.pi:
            raise ValueError("strip Blaschke parameter must lie in (0, pi)")

    def ev(z):
        out = np.ones_like(z, dtype=complex)
        s = np.sinh(z)
        for b in bs:
            out = out * (s - 1j * np.sin(b)) / (s + 1j * np.sin(b))
        return out

    return ScatteringFunction(ev, family="s2.blaschke", params={"b": bs}, domain="strip")


def phi_constant(c):
    if c not in (1, -1):
        raise ValueError("constant inner function must be +1 or -1")
    return ScatteringFunction(lambda z: np.full_like(z, c, dtype=complex),
                              family="phi.constant", params={"c": c}, domain="half-plane")


def phi_blaschke(a_values):
    """Product of half-plane factors (z - i a)/(z + i conj(a)), Re a > 0."""
    avals = tuple(complex(a) for a in np.atleast_1d(a_values))
    for a in avals:
        if a.real <= 0:
            raise ValueError("half-plane Blaschke parameter needs positive real part")

    def ev(z):
        out = np.ones_like(z, dtype=complex)
        for a in avals:
            out = out * (z - 1j * a) / (z + 1j * np.conj(a))
        return out

    return ScatteringFunction(ev, family="phi.blaschke", params={"a": avals}, domain="half-plane")


def phi_reciprocal_pair(a_values):
    """Blaschke product over {a, 1/a} pairs (a real > 0): satisfies conj(phi(x)) = phi(1/x).

    This reciprocal symmetry is what makes the twisted exchange factor of the
    coupled-field relation come out as phi(e^{theta-theta'}) exactly.
    """
    avals = tuple(float(a) for a in np.atleast_1d(a_values))
    full = []
    for a in avals:
        if a <= 0:
            raise ValueError("parameter must be real positive")
        full += [a, 1.0 / a]
    phi = phi_blaschke(full)
    return ScatteringFunction(phi.evaluator, family="phi.reciprocal_pair",
                              params={"a": avals}, domain="half-plane")


REGISTRY = {
    "s2.one": lambda **kw: s2_constant(1),
    "s2.minus_one": lambda **kw: s2_constant(-1),
    "s2.blaschke": lambda b=(0.7,), **kw: s2_blaschke(b),
    "phi.one": lambda **kw: phi_constant(1),
    "phi.minus_one": lambda **kw: phi_constant(-1),
    "phi.blaschke": lambda a=(0.8,), **kw: phi_blaschke(a),
    "phi.reciprocal_pair": lambda a=(0.8,), **kw: phi_reciprocal_pair(a),
}


def from_registry(name, **params):
    if name not in REGISTRY:
        raise ValueError(f"unknown scattering function {name!r}; known: {sorted(REGISTRY)}")
    return REGISTRY[name](**params)


def builtin_s2_functions():
    return [s2_constant(1), s2_constant(-1), s2_blaschke((0.7,)), s2_blaschke((0.4, 1.1))]


def builtin_phi_functions():
    return [phi_constant(1), phi_constant(-1), phi_blaschke((0.8,)),
            phi_blaschke((0.8, 1.6)), phi_reciprocal_pair((0.8,)), phi_reciprocal_pair((0.8, 1.7))]


# ---------- validators ----------

def validate_s2(s2, samples, tol=1e-10):
    """Check the four exchange-function identities at real samples; returns a report dict."""
    t = np.asarray(samples, dtype=float)
    v = s2(t)
    devs = {
        "inverse_conjugate": float(np.abs(1.0 / v - np.conj(v)).max()),
        "conjugate_reflection": float(np.abs(np.conj(v) - s2(-t)).max()),
        "reflection_shift": float(np.abs(s2(-t) - s2(t + 1j * np.pi)).max()),
        "unimodular": float(np.abs(np.abs(v) - 1.0).max()),
    }
    return {"identity_deviations": devs,
            "max_deviation": max(devs.values()),
            "pass": max(devs.values()) <= tol,
            "tol": tol,
            "n_samples": len(t)}


def validate_inner(phi, n_samples=1000, tol=1e-10, rng=None):
    """|phi| <= 1 on half-plane samples, |phi| = 1 on the real boundary."""
    rng = rng or np.random.default_rng(0)
    x = rng.normal(scale=2.0, size=n_samples)
    y = np.abs(rng.normal(scale=1.0, size=n_samples)) + 1e-6
    interior = float((np.abs(phi(x + 1j * y)) - 1.0).max())
    boundary = float(np.abs(np.abs(phi(np.sign(x) * np.exp(x))) - 1.0).max())
    return {"interior_excess": max(0.0, interior),
            "boundary_deviation": boundary,
            "max_deviation": max(max(0.0, interior), boundary),
            "pass": interior <= tol and boundary <= tol,
            "tol": tol}


def is_reciprocal_symmetric(phi, n_samples=200, tol=1e-10, rng=None):
    """conj(phi(x)) == phi(1/x) on x > 0 (fixed point of the conjugate-reciprocal map)."""
    rng = rng or np.random.default_rng(1)
    x = np.exp(rng.normal(size=n_samples))
    dev = float(np.abs(np.conj(phi(x)) - phi(1.0 / x)).max())
    return dev <= tol, dev


def is_reflection_symmetric(phi, n_samples=200, tol=1e-10, rng=None):
    """conj(phi(x)) == phi(-x) on real x."""
    rng = rng or np.random.default_rng(2)
    x = rng.normal(scale=2.0, size=n_samples)
    dev = float(np.abs(np.conj(phi(x)) - phi(-x)).max())
    return dev <= tol, dev


# ---------- transforms ----------

def conjugate_reciprocal(phi, eps=1e-12):
    """z -> conj(phi(1/conj(z))); maps inner symmetric functions to inner symmetric functions."""
    if phi.domain != "half-plane":
        raise ValueError("conjugate_reciprocal acts on half-plane functions")

    def ev(z):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) < eps):
            raise ZeroDivisionError("conjugate-reciprocal evaluator is singular at z = 0")
        return np.conj(phi.evaluator(1.0 / np.conj(z)))

    return ScatteringFunction(ev, family=phi.family + "#", params=dict(phi.params),
                              domain="half-plane")


def rapidity_form(phi):
    """theta -> phi(e^theta) on the strip, plus the crossing partner theta -> phi(-e^{-theta})."""
    if phi.domain != "half-plane":
        raise ValueError("rapidity_form acts on half-plane functions")
    main = ScatteringFunction(lambda z: phi.evaluator(np.exp(z)),
                              family=phi.family + ".rapidity", params=dict(phi.params),
                              domain="strip")
    crossed = ScatteringFunction(lambda z: phi.evaluator(-np.exp(-z)),
                                 family=phi.family + ".crossed", params=dict(phi.params),
                                 domain="strip")
    return main, crossed
