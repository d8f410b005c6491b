"""Tensor products of two truncated Fock spaces without materializing the product space.

Vectors are dicts over sector pairs (na, nb) holding (dim_a x dim_b) arrays; operators
on either factor act by matrix multiplication on the corresponding index. Twist
unitaries (graded phases, R-tilde) act diagonally per sector pair.
"""

import math

import numpy as np


class TensorArena:
    def __init__(self, space_a, space_b):
        self.a = space_a
        self.b = space_b

    def sector_pairs(self, max_a=None, max_b=None):
        ma = self.a.n_max if max_a is None else max_a
        mb = self.b.n_max if max_b is None else max_b
        return [(na, nb) for na in range(ma + 1) for nb in range(mb + 1)]


class BlockedVector:
    def __init__(self, arena, components):
        self.arena = arena
        self.components = components

    def norm(self):
        return math.sqrt(sum(float(np.vdot(c, c).real) for c in self.components.values()))

    def inner(self, other):
        acc = 0j
        for k, c in self.components.items():
            if k in other.components:
                acc += np.vdot(c, other.components[k])
        return acc

    def __add__(self, other):
        out = {k: c.copy() for k, c in self.components.items()}
        for k, c in other.components.items():
            out[k] = out.get(k, 0) + c
        return BlockedVector(self.arena, out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, z):
        return BlockedVector(self.arena, {k: z * c for k, c in self.components.items()})


def vacuum2(arena):
    return BlockedVector(arena, {(0, 0): np.ones((1, 1), dtype=complex)})


def product_vector(arena, va, vb):
    """Elementary tensor of two FockVectors."""
    comp = {}
    for na, ca in va.components.items():
        for nb, cb in vb.components.items():
            comp[(na, nb)] = np.outer(ca, cb)
    return BlockedVector(arena, comp)


def random_blocked(arena, rng, max_a, max_b, normalize=True):
    comp = {}
    for na in range(max_a + 1):
        for nb in range(max_b + 1):
            da, db = arena.a.sector_dims[na], arena.b.sector_dims[nb]
            comp[(na, nb)] = rng.normal(size=(da, db)) + 1j * rng.normal(size=(da, db))
    v = BlockedVector(arena, comp)
    if normalize:
        v = (1.0 / v.norm()) * v
    return v


def apply_left(op, v):
    """(op (x) 1) v for a FockOperator on the first factor."""
    out = {}
    for (na, nb), c in v.components.items():
        for (t, f), B in op.blocks.items():
            if f == na:
                key = (t, nb)
                out[key] = out.get(key, 0) + B @ c
    return BlockedVector(v.arena, out)


def apply_right(op, v):
    """(1 (x) op) v for a FockOperator on the second factor."""
    out = {}
    for (na, nb), c in v.components.items():
        for (t, f), B in op.blocks.items():
            if f == nb:
                key = (na, t)
                out[key] = out.get(key, 0) + c @ B.T
    return BlockedVector(v.arena, out)


class GradedTwist:
    """exp(i 2 pi kappa Q (x) Q) for integer charge gradings of both factors."""

    def __init__(self, arena, labels_a, labels_b, kappa):
        self.arena = arena
        self.labels_a = labels_a
        self.labels_b = labels_b
        self.kappa = float(kappa)

    def apply(self, v, sign=+1):
        out = {}
        for (na, nb), c in v.components.items():
            la = self.labels_a[na]
            lb = self.labels_b[nb]
            phase = np.exp(sign * 2j * np.pi * self.kappa * np.outer(la, lb))
            out[(na, nb)] = phase * c
        return BlockedVector(v.arena, out)


class RTilde:
    """Diagonal twist with entry prod_{j,k} phi(p'_k / p_j), p = m e^theta.

    j runs over particles of the first factor, k over the second; phi is evaluated on
    positive momentum ratios. Acts per sector pair; momenta read off occupation bases.
    """

    def __init__(self, arena, phi):
        if arena.a.s2 is not None or arena.b.s2 is not None:
            raise ValueError("R-tilde needs occupation (bosonic) factors")
        self.arena = arena
        self.phi = phi
        self._moma = [self._momenta(arena.a, n) for n in range(arena.a.n_max + 1)]
        self._momb = [self._momenta(arena.b, n) for n in range(arena.b.n_max + 1)]
        self._diag = {}

    @staticmethod
    def _momenta(space, n):
        mom_of_mode = np.tile(space.grid.lightcone_momentum(+1), space.n_species)
        out = []
        for occ in space.occupations[n]:
            out.append(np.array([mom_of_mode[m] for m, c in enumerate(occ) for _ in range(c)]))
        return out

    def diag_block(self, na, nb):
        """(dim_a x dim_b) array of diagonal entries for the sector pair."""
        key = (na, nb)
        if key not in self._diag:
            qa = self._moma[na]
            pb = self._momb[nb]
            D = np.ones((len(qa), len(pb)), dtype=complex)
            if na > 0 and nb > 0:
                for ia, qs in enumerate(qa):
                    for ib, ps in enumerate(pb):
                        ratios = ps[None, :] / qs[:, None]
                        D[ia, ib] = np.prod(self.phi(ratios))
            self._diag[key] = D
        return self._diag[key]

    def apply(self, v, sign=+1):
        out = {}
        for (na, nb), c in v.components.items():
            D = self.diag_block(na, nb)
            out[(na, nb)] = (D if sign > 0 else np.conj(D)) * c
        return BlockedVector(v.arena, out)

    def left_multiplier(self, right_momenta):
        """phi-product multiplier on the left one-particle variable for a fixed right config.

        Returns the grid function theta -> prod_k phi(p_k / (m e^theta)); this is the
        disintegration of the twist over the spectator (right) factor.
        """
        p = self.arena.a.grid.lightcone_momentum(+1)
        u = np.ones_like(p, dtype=complex)
        for pk in right_momenta:
            u = u * self.phi(pk / p)
        return u

    def right_multiplier(self, left_momenta):
        """theta' -> prod_j phi((m e^theta') / q_j) on the right one-particle variable."""
        p = self.arena.b.grid.lightcone_momentum(+1)
        u = np.ones_like(p, dtype=complex)
        for qj in left_momenta:
            u = u * self.phi(p / qj)
        return u


def ad_right(twist, op, v):
    """Ad(twist)(1 (x) op) applied to v: twist . (1 (x) op) . twist^{-1}."""
    return twist.apply(apply_right(op, twist.apply(v, -1)), +1)


def ad_left(twist, op, v):
    """Ad(twist)(op (x) 1) applied to v."""
    return twist.apply(apply_left(op, twist.apply(v, -1)), +1)
