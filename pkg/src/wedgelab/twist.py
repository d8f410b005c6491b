"""Charge gradings, twist unitaries exp(i 2 pi kappa Q (x) Q), discrete Fourier components,
the sector-twisting map tau_k, and the R-tilde builder."""

from dataclasses import dataclass

import numpy as np

from .blocked import RTilde, TensorArena


@dataclass(frozen=True)
class ChargeGrading:
    """Integer charge per basis vector; group is ('circle',) or ('cyclic', N)."""
    labels: np.ndarray
    group: tuple

    def __post_init__(self):
        if self.group[0] == "cyclic":
            N = self.group[1]
            if np.any((self.labels < 0) | (self.labels >= N)):
                raise ValueError("cyclic labels must lie in 0..N-1")

    @property
    def dim(self):
        return len(self.labels)


def grading_from_unitary(V, N, omega=None, tol=1e-9):
    """Spectral charge from a unitary of order N: Vhat(j) = (1/N) sum_k w^{-jk} V^k, Q = sum j Vhat(j).

    Requires V^N = 1 (and V Omega = Omega when a vacuum is supplied); the returned
    labels are per basis vector, so V must be diagonal in the working basis.
    """
    V = np.asarray(V, dtype=complex)
    dim = V.shape[0]
    powers = [np.eye(dim, dtype=complex)]
    for _ in range(N):
        powers.append(powers[-1] @ V)
    if np.abs(powers[N] - np.eye(dim)).max() > tol:
        raise ValueError(f"unitary is not of order {N}")
    if omega is not None and np.abs(V @ omega - omega).max() > tol:
        raise ValueError("unitary does not fix the vacuum vector")
    w = np.exp(-2j * np.pi / N)
    projections = []
    for j in range(N):
        P = sum(w ** (j * k) * powers[k] for k in range(N)) / N
        projections.append(P)
    # validate: Hermitian idempotents, mutually orthogonal, resolution of identity
    dev = 0.0
    for j, P in enumerate(projections):
        dev = max(dev, np.abs(P - P.conj().T).max(), np.abs(P @ P - P).max())
        for P2 in projections[j + 1:]:
            dev = max(dev, np.abs(P @ P2).max())
    dev = max(dev, np.abs(sum(projections) - np.eye(dim)).max())
    if dev > tol:
        raise ValueError(f"spectral projections invalid (dev {dev:.3e})")
    Q = sum(j * P for j, P in enumerate(projections))
    if np.abs(Q - np.diag(np.diag(Q))).max() > tol:
        raise ValueError("unitary is not diagonal in this basis; labels are not defined")
    labels = np.rint(np.diag(Q).real).astype(int)
    if np.abs(np.diag(Q) - labels).max() > tol:
        raise ValueError("charge spectrum is not integral")
    grading = ChargeGrading(labels=labels, group=("cyclic", N))
    return grading, projections


@dataclass(frozen=True)
class TwistUnitary:
    """Diagonal phases exp(i 2 pi kappa l m) on the graded tensor-product basis."""
    grading_a: ChargeGrading
    grading_b: ChargeGrading
    kappa: float

    @property
    def diag(self):
        return np.exp(2j * np.pi * self.kappa *
                      np.outer(self.grading_a.labels, self.grading_b.labels)).reshape(-1)

    def matrix(self):
        return np.diag(self.diag)

    def ad(self, x):
        d = self.diag
        return (d[:, None] * np.asarray(x)) * np.conj(d)[None, :]


def twist_unitary(grading_a, grading_b, kappa=None, k=None, N=None):
    """Circle twist at real kappa, or cyclic twist at kappa = k/N."""
    if kappa is None:
        if k is None or N is None:
            raise ValueError("give kappa, or k and N")
        kappa = k / N
    return TwistUnitary(grading_a, grading_b, float(kappa))


# ---------- discrete Fourier decomposition of operators under Ad V ----------

def _ad(U, x):
    return U @ x @ U.conj().T


def fourier_component(x, V, l, N=None, label_bound=None):
    """x_l with Ad V(kappa)(x_l) = e^{i 2 pi l kappa} x_l.

    Cyclic case (N given): exact sum (1/N) sum_j w^{-jl} Ad(V^j)(x) with V the order-N
    unitary. Circle case: V is a callable kappa -> unitary; the integral over kappa is
    replaced by an exact finite sum, valid because labels are bounded by label_bound.
    """
    x = np.asarray(x, dtype=complex)
    if N is not None:
        acc = np.zeros_like(x)
        U = np.eye(x.shape[0], dtype=complex)
        for j in range(N):
            acc += np.exp(-2j * np.pi * j * l / N) * _ad(U, x)
            U = U @ V
        return acc / N
    if label_bound is None:
        raise ValueError("circle actions need label_bound for the exact finite sum")
    L = 2 * int(label_bound) + 1
    acc = np.zeros_like(x)
    for j in range(L):
        kap = j / L
        acc += np.exp(-2j * np.pi * l * kap) * _ad(V(kap), x)
    return acc / L


def double_fourier(xt, V, N):
    """Bigraded components of an operator on H (x) H under Ad(V^{j1} (x) V^{j2}).

    Returns {(l, m): x_{l,m}} with l, m in 0..N-1 (labels mod N).
    """
    xt = np.asarray(xt, dtype=complex)
    dim = V.shape[0]
    powers = [np.eye(dim, dtype=complex)]
    for _ in range(N - 1):
        powers.append(powers[-1] @ V)
    comps = {}
    for l in range(N):
        for m in range(N):
            acc = np.zeros_like(xt)
            for j1 in range(N):
                for j2 in range(N):
                    U = np.kron(powers[j1], powers[j2])
                    acc += np.exp(-2j * np.pi * (j1 * l + j2 * m) / N) * _ad(U, xt)
            comps[(l, m)] = acc / N ** 2
    return comps


def tau_k(xt, V, N, k):
    """tau_k(x~) = sum_{l,m} x~_{l,m} (V^{km} (x) 1); invertible with ||x~|| <= N^2 ||tau_k(x~)||."""
    dim = V.shape[0]
    comps = double_fourier(xt, V, N)
    out = np.zeros_like(np.asarray(xt, dtype=complex))
    for (l, m), c in comps.items():
        out += c @ np.kron(np.linalg.matrix_power(V, (k * m) % N), np.eye(dim))
    return out


def tau_k_inverse(yt, V, N, k):
    """Inverse of tau_k: components are multiplied back by V^{-km} (x) 1."""
    dim = V.shape[0]
    comps = double_fourier(yt, V, N)
    out = np.zeros_like(np.asarray(yt, dtype=complex))
    Vinv = np.conj(V).T
    for (l, m), c in comps.items():
        out += c @ np.kron(np.linalg.matrix_power(Vinv, (k * m) % N), np.eye(dim))
    return out


# ---------- R-tilde ----------

def build_R_tilde(phi, space_a, space_b=None):
    """Diagonal twist with entries prod_{j,k} phi(p'_k / p_j) on the product rapidity basis.

    phi must be evaluable on positive reals (the momentum-ratio spectrum). The operator
    restricts to the symmetrized factors automatically since it is diagonal in momenta.
    """
    arena = TensorArena(space_a, space_b if space_b is not None else space_a)
    return RTilde(arena, phi)


def rtilde_disintegration_check(rt, max_a=None, max_b=None):
    """Both one-sided disintegrations reproduce the joint diagonal; returns max deviation."""
    arena = rt.arena
    worst = 0.0
    pa = [RTilde._momenta(arena.a, n) for n in range(arena.a.n_max + 1)]
    pb = [RTilde._momenta(arena.b, n) for n in range(arena.b.n_max + 1)]
    for (na, nb) in arena.sector_pairs(max_a, max_b):
        D = rt.diag_block(na, nb)
        left = np.ones_like(D)
        right = np.ones_like(D)
        # left disintegration: right config fixed, left slot j gets phi(p_k / q_j)
        for ib, ps in enumerate(pb[nb]):
            for ia, qs in enumerate(pa[na]):
                val = 1.0 + 0j
                for pk in ps:
                    val *= np.prod(rt.phi(pk / qs)) if len(qs) else 1.0
                left[ia, ib] = val
        for ia, qs in enumerate(pa[na]):
            for ib, ps in enumerate(pb[nb]):
                val = 1.0 + 0j
                for qj in qs:
                    val *= np.prod(rt.phi(ps / qj)) if len(ps) else 1.0
                right[ia, ib] = val
        worst = max(worst, float(np.abs(D - left).max()), float(np.abs(D - right).max()))
    return worst
