"""Truncated Fock spaces (bosonic and S2-twisted), ladder operators, fields, second quantization.

Normalization: (a^dag(psi) Psi)_n = sqrt(n) Q_n(psi (x) Psi_{n-1}), so the canonical
commutation relation [a(psi2), a^dag(psi1)] = <psi2, psi1> 1 holds below the cutoff.
Creation out of the top sector maps to zero; algebraic identities are asserted only
strictly below the cutoff.

Internal coordinates are orthonormal (quadrature weights absorbed); function-valued
inputs are converted on entry via the grid.
"""

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .onepspace import OneParticleOperator, OneParticleVector, RapidityGrid


# ----------------------------------------------------------------------
# S2-permutation representation on unsymmetrized sectors
# ----------------------------------------------------------------------

def s2_permutation(s2, n, j, grid, n_species=1):
    """D_{S2,n}(tau_j) on the n-fold tensor power of the (species x grid) one-particle space.

    Acts on basis vectors by swapping slots j, j+1 (1-based) with the phase
    S2(theta_left - theta_right) of the rapidities being exchanged.
    """
    if not 1 <= j <= n - 1:
        raise ValueError(f"transposition index {j} out of range for {n} slots")
    d = grid.size
    D = n_species * d
    dim = D ** n
    theta_of_mode = np.tile(grid.theta, n_species)
    M = np.zeros((dim, dim), dtype=complex)
    for idx in itertools.product(range(D), repeat=n):
        src = np.ravel_multi_index(idx, (D,) * n)
        tgt_idx = list(idx)
        tgt_idx[j - 1], tgt_idx[j] = tgt_idx[j], tgt_idx[j - 1]
        tgt = np.ravel_multi_index(tuple(tgt_idx), (D,) * n)
        M[tgt, src] = s2(theta_of_mode[idx[j - 1]] - theta_of_mode[idx[j]])
    return M


def _perm_word(perm):
    """Adjacent-transposition word sorting `perm` (bubble sort); apply reversed for D(perm)."""
    arr = list(perm)
    word = []
    for _ in range(len(arr)):
        for k in range(len(arr) - 1):
            if arr[k] > arr[k + 1]:
                arr[k], arr[k + 1] = arr[k + 1], arr[k]
                word.append(k + 1)
    return word


def sector_projection(s2, n, grid, n_species=1, rep_tol=1e-9, rng=None):
    """Q_{S2,n}: group average over S_n of the unitary word representation.

    The representation property D(s1)D(s2) = D(s1 s2) is validated on random pairs;
    a violation signals an invalid exchange function.
    """
    d = grid.size
    D = n_species * d
    dim = D ** n
    if n == 0:
        return np.ones((1, 1), dtype=complex)
    if n == 1:
        return np.eye(D, dtype=complex)
    taus = [s2_permutation(s2, n, j, grid, n_species) for j in range(1, n)]

    def rep(perm):
        M = np.eye(dim, dtype=complex)
        for k in reversed(_perm_word(perm)):
            M = taus[k - 1] @ M
        return M

    perms = list(itertools.permutations(range(n)))
    mats = {p: rep(p) for p in perms}
    rng = rng or np.random.default_rng(0)
    for _ in range(min(6, len(perms))):
        p1, p2 = (perms[rng.integers(len(perms))] for _ in range(2))
        comp = tuple(p2[i] for i in p1)   # rep(p1) rep(p2) = rep(p2 o p1) for this word convention
        dev = np.abs(mats[p1] @ mats[p2] - mats[comp]).max()
        if dev > rep_tol:
            raise ValueError(f"S_n representation property violated (dev {dev:.3e}); "
                             "the exchange function is invalid")
    Q = sum(mats.values()) / len(perms)
    return Q


def range_isometry(Q, tol=1e-8):
    """Orthonormal basis of the range of a Hermitian idempotent."""
    w, v = np.linalg.eigh((Q + Q.conj().T) / 2)
    keep = w > 0.5
    if np.any((w > tol) & (w < 1 - tol)):
        raise ValueError("projection has eigenvalues away from {0,1}")
    return v[:, keep]


# ----------------------------------------------------------------------
# spaces
# ----------------------------------------------------------------------

def _occupations(D, n):
    out = []
    for idx in itertools.combinations_with_replacement(range(D), n):
        occ = [0] * D
        for m in idx:
            occ[m] += 1
        out.append(tuple(occ))
    return out


class FockSpace:
    """Direct sum of (anti)symmetrized n-particle sectors, n = 0..n_max.

    Modes are ordered lexicographically by (species, grid index). Bosonic spaces use
    the occupation-number basis; S2-twisted spaces carry each sector as the range of
    the group-averaged projection inside the unsymmetrized tensor power.
    """

    def __init__(self, grid, n_max, n_species=1, s2=None):
        if n_max < 0:
            raise ValueError("n_max must be nonnegative")
        if n_species < 1:
            raise ValueError("need at least one species")
        self.grid = grid
        self.n_max = int(n_max)
        self.n_species = int(n_species)
        self.s2 = s2
        self.n_modes = n_species * grid.size
        if s2 is None:
            self.occupations = [_occupations(self.n_modes, n) for n in range(n_max + 1)]
            self._occ_index = [{occ: i for i, occ in enumerate(sec)} for sec in self.occupations]
            self.sector_dims = [len(sec) for sec in self.occupations]
        else:
            self.isometries = []
            for n in range(n_max + 1):
                Q = sector_projection(s2, n, grid, n_species)
                self.isometries.append(range_isometry(Q))
            self.sector_dims = [iso.shape[1] for iso in self.isometries]
        if self.sector_dims[0] != 1:
            raise AssertionError("vacuum sector must be one-dimensional")

    @property
    def symmetrization(self):
        return "bosonic" if self.s2 is None else "s2-twisted"

    @property
    def total_dim(self):
        return sum(self.sector_dims)

    def mode(self, species, grid_index):
        return species * self.grid.size + grid_index

    def mode_values_to_ortho(self, values, species=0):
        """Embed grid function values into the mode vector (orthonormal coordinates)."""
        if isinstance(values, OneParticleVector):
            values = values.values
        coeff = self.grid.to_ortho(values)
        full = np.zeros(self.n_modes, dtype=complex)
        full[species * self.grid.size:(species + 1) * self.grid.size] = coeff
        return full

    def sector_thetas(self, n):
        """Per-basis-state lists of occupied rapidities (bosonic spaces)."""
        if self.s2 is not None:
            raise ValueError("occupation data only available for bosonic spaces")
        theta_of_mode = np.tile(self.grid.theta, self.n_species)
        out = []
        for occ in self.occupations[n]:
            out.append([theta_of_mode[m] for m, c in enumerate(occ) for _ in range(c)])
        return out


@dataclass
class FockVector:
    space: FockSpace
    components: dict

    def norm(self):
        return math.sqrt(sum(float(np.vdot(c, c).real) for c in self.components.values()))

    def inner(self, other):
        acc = 0j
        for n, c in self.components.items():
            if n in other.components:
                acc += np.vdot(c, other.components[n])
        return acc

    def __add__(self, other):
        out = {n: c.copy() for n, c in self.components.items()}
        for n, c in other.components.items():
            out[n] = out.get(n, 0) + c
        return FockVector(self.space, out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, z):
        return FockVector(self.space, {n: z * c for n, c in self.components.items()})


def vacuum(space):
    return FockVector(space, {0: np.ones(1, dtype=complex)})


def basis_vector(space, n, index):
    c = np.zeros(space.sector_dims[n], dtype=complex)
    c[index] = 1.0
    return FockVector(space, {n: c})


def random_vector(space, rng, sectors=None, normalize=True):
    sectors = range(space.n_max + 1) if sectors is None else sectors
    comp = {}
    for n in sectors:
        d = space.sector_dims[n]
        comp[n] = rng.normal(size=d) + 1j * rng.normal(size=d)
    v = FockVector(space, comp)
    if normalize:
        v = (1.0 / v.norm()) * v
    return v


class FockOperator:
    """Sector-blocked operator: blocks[(to, from)] are dense complex matrices."""

    def __init__(self, space, blocks):
        self.space = space
        self.blocks = {}
        for (t, f), B in blocks.items():
            B = np.asarray(B, dtype=complex)
            expect = (space.sector_dims[t], space.sector_dims[f])
            if B.shape != expect:
                raise ValueError(f"block {(t, f)} has shape {B.shape}, expected {expect}")
            self.blocks[(t, f)] = B

    @classmethod
    def identity(cls, space):
        return cls(space, {(n, n): np.eye(d) for n, d in enumerate(space.sector_dims)})

    @classmethod
    def zero(cls, space):
        return cls(space, {})

    def apply(self, vec):
        out = {}
        for (t, f), B in self.blocks.items():
            if f in vec.components:
                out[t] = out.get(t, 0) + B @ vec.components[f]
        return FockVector(self.space, out)

    def dagger(self):
        return FockOperator(self.space,
                            {(f, t): B.conj().T for (t, f), B in self.blocks.items()})

    def __matmul__(self, other):
        out = {}
        for (t1, f1), A in self.blocks.items():
            for (t2, f2), B in other.blocks.items():
                if f1 == t2:
                    key = (t1, f2)
                    out[key] = out.get(key, 0) + A @ B
        return FockOperator(self.space, out)

    def __add__(self, other):
        out = {k: v.copy() for k, v in self.blocks.items()}
        for k, v in other.blocks.items():
            out[k] = out.get(k, 0) + v
        return FockOperator(self.space, out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, z):
        return FockOperator(self.space, {k: z * v for k, v in self.blocks.items()})

    def dense(self):
        dims = self.space.sector_dims
        offs = np.concatenate([[0], np.cumsum(dims)])
        A = np.zeros((offs[-1], offs[-1]), dtype=complex)
        for (t, f), B in self.blocks.items():
            A[offs[t]:offs[t + 1], offs[f]:offs[f + 1]] = B
        return A

    def norm(self, max_sector=None):
        """Operator 2-norm, optionally restricted to source/target sectors <= max_sector."""
        if max_sector is None:
            return float(np.linalg.norm(self.dense(), 2))
        keep = {k: v for k, v in self.blocks.items()
                if k[0] <= max_sector and k[1] <= max_sector}
        if not keep:
            return 0.0
        return float(np.linalg.norm(FockOperator(self.space, keep).dense(), 2))


# ----------------------------------------------------------------------
# ladder operators and fields
# ----------------------------------------------------------------------

def _create_bosonic(space, modes, max_source=None):
    top = space.n_max if max_source is None else min(space.n_max, max_source + 1)
    blocks = {}
    for n in range(top):
        src = space.occupations[n]
        index = space._occ_index[n + 1]
        B = np.zeros((space.sector_dims[n + 1], space.sector_dims[n]), dtype=complex)
        for j, occ in enumerate(src):
            for mu in range(space.n_modes):
                if modes[mu] == 0:
                    continue
                t = list(occ)
                t[mu] += 1
                B[index[tuple(t)], j] += modes[mu] * math.sqrt(t[mu])
            # top sector: creation maps to zero (handled by absence of an (n_max+1) block)
        blocks[(n + 1, n)] = B
    return FockOperator(space, blocks)


def _create_s2(space, modes, max_source=None):
    top = space.n_max if max_source is None else min(space.n_max, max_source + 1)
    blocks = {}
    for n in range(top):
        iso_lo = space.isometries[n]
        iso_hi = space.isometries[n + 1]
        embed = np.kron(modes.reshape(-1, 1), iso_lo) if n > 0 else modes.reshape(-1, 1)
        blocks[(n + 1, n)] = math.sqrt(n + 1) * (iso_hi.conj().T @ embed)
    return FockOperator(space, blocks)


def create(space, psi, species=0, max_source=None):
    """Creation operator a^dag(psi) (z^dag for S2-twisted spaces); linear in psi.

    max_source limits the built blocks to source sectors <= max_source (pure
    optimization for identities asserted strictly below the cutoff).
    """
    if species >= space.n_species:
        raise ValueError(f"species {species} out of range")
    modes = space.mode_values_to_ortho(psi, species)
    if space.s2 is None:
        return _create_bosonic(space, modes, max_source)
    return _create_s2(space, modes, max_source)


def annihilate(space, psi, species=0):
    """a(psi) = a^dag(psi)^*; antilinear in psi."""
    return create(space, psi, species).dagger()


def field_from_pm(space, f_plus, f_minus, species=0):
    """phi(f) = a^dag(f+) + a(J1 f-), J1 = pointwise conjugation."""
    fp = f_plus.values if isinstance(f_plus, OneParticleVector) else np.asarray(f_plus)
    fm = f_minus.values if isinstance(f_minus, OneParticleVector) else np.asarray(f_minus)
    return create(space, fp, species) + annihilate(space, np.conj(fm), species)


def field(space, f, species=0, n_quad=200):
    from .onepspace import pm_transform
    fp, fm = pm_transform(f, space.grid, n_quad=n_quad)
    return field_from_pm(space, fp, fm, species)


# ----------------------------------------------------------------------
# second quantization
# ----------------------------------------------------------------------

def lift_one_particle(space, op):
    """Block-diagonal mode matrix (orthonormal coordinates) acting identically per species."""
    m = op.ortho_matrix() if isinstance(op, OneParticleOperator) else np.asarray(op, dtype=complex)
    out = np.zeros((space.n_modes, space.n_modes), dtype=complex)
    d = space.grid.size
    for s in range(space.n_species):
        out[s * d:(s + 1) * d, s * d:(s + 1) * d] = m
    return out


def _permanent(M):
    n = M.shape[0]
    if n == 0:
        return 1.0 + 0j
    total = 0j
    for p in itertools.permutations(range(n)):
        v = 1.0 + 0j
        for i, j in enumerate(p):
            v *= M[i, j]
        total += v
    return total


def second_quantize(space, mode_op, dense_limit=400):
    """Gamma(V): acts as V^(x)n on sector n (restricted by the sector projection); Gamma(V)Omega = Omega.

    `mode_op` is a matrix on modes in orthonormal coordinates, or a OneParticleOperator
    lifted identically to every species. Diagonal operators use the fast product path;
    general bosonic matrices use the permanent formula (small sectors only).
    """
    if isinstance(mode_op, OneParticleOperator):
        mode_op = lift_one_particle(space, mode_op)
    V = np.asarray(mode_op, dtype=complex)
    if V.shape != (space.n_modes, space.n_modes):
        raise ValueError("mode operator has wrong shape")

    if space.s2 is not None:
        blocks = {(0, 0): np.ones((1, 1), dtype=complex)}
        for n in range(1, space.n_max + 1):
            Vn = V
            for _ in range(n - 1):
                Vn = np.kron(Vn, V)
            iso = space.isometries[n]
            block = iso.conj().T @ Vn @ iso
            leak = np.abs(Vn @ iso - iso @ block).max()
            if leak > 1e-8:
                raise ValueError(f"operator does not preserve the S2 sector (leak {leak:.3e})")
            blocks[(n, n)] = block
        return FockOperator(space, blocks)

    offdiag = np.abs(V - np.diag(np.diag(V))).max() if V.size else 0.0
    blocks = {(0, 0): np.ones((1, 1), dtype=complex)}
    if offdiag < 1e-14:
        dv = np.diag(V)
        for n in range(1, space.n_max + 1):
            vals = np.array([np.prod(dv ** np.array(occ)) for occ in space.occupations[n]])
            blocks[(n, n)] = np.diag(vals)
        return FockOperator(space, blocks)

    for n in range(1, space.n_max + 1):
        dim = space.sector_dims[n]
        if dim > dense_limit:
            raise ValueError(f"sector {n} too large ({dim}) for the permanent path")
        sec = space.occupations[n]
        B = np.zeros((dim, dim), dtype=complex)
        norms = [math.prod(math.factorial(c) for c in occ) for occ in sec]
        rows = [[i for i, c in enumerate(occ) for _ in range(c)] for occ in sec]
        for a in range(dim):
            for b in range(dim):
                B[a, b] = _permanent(V[np.ix_(rows[a], rows[b])]) / math.sqrt(norms[a] * norms[b])
        blocks[(n, n)] = B
    return FockOperator(space, blocks)


def charge_labels(space, species_charges):
    """Integer charge per basis vector, per sector: sum of occupations times species charge."""
    if space.s2 is not None:
        raise ValueError("charge labels require the occupation basis")
    if len(species_charges) != space.n_species:
        raise ValueError("one charge per species required")
    d = space.grid.size
    mode_charge = np.repeat(np.asarray(species_charges, dtype=int), d)
    out = {}
    for n in range(space.n_max + 1):
        occ = np.array(space.occupations[n], dtype=int).reshape(space.sector_dims[n], -1)
        out[n] = occ @ mode_charge
    return out


# ----------------------------------------------------------------------
# export
# ----------------------------------------------------------------------

def save_operator_npz(op, path):
    """Sector-blocked dump: block_{to}_{from} arrays plus a JSON metadata string."""
    meta = {
        "sector_dims": list(op.space.sector_dims),
        "n_species": op.space.n_species,
        "n_max": op.space.n_max,
        "symmetrization": op.space.symmetrization,
        "grid_theta": list(map(float, op.space.grid.theta)),
        "mass": op.space.grid.mass,
    }
    arrays = {f"block_{t}_{f}": B for (t, f), B in op.blocks.items()}
    np.savez(path, meta=json.dumps(meta, sort_keys=True), **arrays)


def save_operator_csv(op, path):
    """CSV dump: one row per entry, columns to,from,row,col,re,im."""
    with open(path, "w") as fh:
        fh.write("to_sector,from_sector,row,col,re,im\n")
        for (t, f) in sorted(op.blocks):
            B = op.blocks[(t, f)]
            for r in range(B.shape[0]):
                for c in range(B.shape[1]):
                    z = B[r, c]
                    if z != 0:
                        fh.write(f"{t},{f},{r},{c},{z.real!r},{z.imag!r}\n")
