"""Explicit two-particle S-matrices of the coupled models and their axioms."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class TwoParticleSMatrix:
    """theta -> d^2 x d^2 matrix mapping e_u (x) e_v to a phase times e_v (x) e_u."""
    dim: int
    evaluator: Callable
    labels: tuple
    constant: bool = False
    name: str = ""

    def __call__(self, theta=0.0):
        return self.evaluator(float(theta))

    def index(self, u, v):
        return self.labels.index(u) * self.dim + self.labels.index(v)


def _flip_matrix(dim, weight):
    """S = sum_{u,v} w(u,v) |v (x) u><u (x) v|."""
    S = np.zeros((dim * dim, dim * dim), dtype=complex)
    for a in range(dim):
        for b in range(dim):
            S[b * dim + a, a * dim + b] = weight(a, b)
    return S


def federbush_smatrix(kappa):
    """Constant 16x16 S-matrix of the coupled complex free fields.

    Basis order {e_{1,+}, e_{1,-}, e_{2,+}, e_{2,-}}; same-field exchange is free
    (entry 1), cross-field exchange carries e^{+-i 2 pi kappa s s'} depending on the
    charge signs and on which field stands first.
    """
    labels = ((1, +1), (1, -1), (2, +1), (2, -1))

    def weight(a, b):
        # phase acquired moving the species-a creator from the left of the species-b
        # creator to the right: field 1 past field 2 gives exp(-i 2 pi kappa s s')
        fa, sa = labels[a]
        fb, sb = labels[b]
        if fa == fb:
            return 1.0 + 0j
        sign = -1 if fa == 1 else +1
        return np.exp(sign * 2j * np.pi * kappa * sa * sb)

    S = _flip_matrix(4, weight)
    return TwoParticleSMatrix(dim=4, evaluator=lambda theta: S, labels=labels,
                              constant=True, name=f"federbush(kappa={kappa})")


def longo_witten_smatrix(phi):
    """Diagonal 4x4 S-matrix on {e1(x)e1, e1(x)e2, e2(x)e1, e2(x)e2}:
    entries 1, phi(e^theta), phi(-e^{-theta}), 1."""
    labels = (1, 2)

    def ev(theta):
        S = np.zeros((4, 4), dtype=complex)
        S[0, 0] = 1.0
        S[1, 2] = phi(np.exp(theta))
        S[2, 1] = phi(-np.exp(-theta))
        S[3, 3] = 1.0
        return S

    return TwoParticleSMatrix(dim=2, evaluator=ev, labels=labels, constant=False,
                              name=f"longo-witten({phi.describe()})")


def identity_smatrix(dim=2):
    labels = tuple(range(1, dim + 1))
    S = _flip_matrix(dim, lambda a, b: 1.0 + 0j)
    return TwoParticleSMatrix(dim=dim, evaluator=lambda theta: S, labels=labels,
                              constant=True, name="identity")


# ---------- axioms ----------

def check_axioms(smatrix, thetas, tol=1e-12):
    """Unitarity, hermitian analyticity S(t)* = S(-t), and the braided Yang-Baxter
    equation with rapidity-difference arguments. Failures are reported, not raised."""
    d2 = smatrix.dim ** 2
    eye = np.eye(d2)
    unit = 0.0
    herm = 0.0
    for t in thetas:
        S = smatrix(t)
        unit = max(unit, float(np.abs(S.conj().T @ S - eye).max()))
        herm = max(herm, float(np.abs(S.conj().T - smatrix(-t)).max()))

    d = smatrix.dim
    yb = 0.0
    triples = [(thetas[i % len(thetas)], thetas[(i + 1) % len(thetas)],
                thetas[(i + 2) % len(thetas)]) for i in range(len(thetas))]
    for (t1, t2, t3) in triples:
        u, v = t1 - t2, t2 - t3
        S1 = lambda t: np.kron(smatrix(t), np.eye(d))
        S2 = lambda t: np.kron(np.eye(d), smatrix(t))
        lhs = S1(u) @ S2(u + v) @ S1(v)
        rhs = S2(v) @ S1(u + v) @ S2(u)
        yb = max(yb, float(np.abs(lhs - rhs).max()))

    devs = {"unitarity": unit, "hermitian_analyticity": herm, "yang_baxter": yb}
    return {"axiom_deviations": devs,
            "max_deviation": max(devs.values()),
            "pass": max(devs.values()) <= tol,
            "tol": tol,
            "n_thetas": len(thetas)}


def sparsity_pattern(smatrix, theta=0.3):
    """Set of (row, col) positions with nonzero entries."""
    S = smatrix(theta)
    return {(r, c) for r, c in zip(*np.nonzero(np.abs(S) > 1e-14))}


def flip_pattern(dim):
    """Expected sparsity of a diagonal-in-the-flip-sense S-matrix."""
    return {(b * dim + a, a * dim + b) for a in range(dim) for b in range(dim)}


# ---------- export ----------

def _fmt_complex(z):
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def smatrix_to_csv(smatrix, theta, path):
    """Dense CSV with complex entries formatted as a+bi."""
    S = smatrix(theta)
    with open(path, "w") as fh:
        fh.write(f"# {smatrix.name} at theta={theta!r}\n")
        for row in S:
            fh.write(",".join(_fmt_complex(z) for z in row) + "\n")
