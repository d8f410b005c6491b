"""End-to-end verification: twisted ZF relations, wedge commutativity with refinement,
spectrum condition, cyclicity ranks, and the negative controls."""

import json
from dataclasses import dataclass, field

import numpy as np

from . import blocked, fock, onepspace, scatfunc, smatrix
from .blocked import (BlockedVector, GradedTwist, TensorArena, ad_left, ad_right,
                      apply_left, apply_right, product_vector, random_blocked, vacuum2)
from .fock import FockOperator, FockSpace, annihilate, charge_labels, create, field_from_pm
from .onepspace import (box_in_left_wedge, box_in_right_wedge, boxes_spacelike, make_grid,
                        pm_transform)
from .twist import build_R_tilde


def grid_delta(grid, i):
    """Function values of the i-th orthonormal grid mode (unit quadrature norm)."""
    v = np.zeros(grid.size, dtype=complex)
    v[i] = 1.0 / np.sqrt(grid.weights[i])
    return v


# ----------------------------------------------------------------------
# Federbush-type twisted relations (coupled complex free fields)
# ----------------------------------------------------------------------

# charged species: index 0 carries charge +1, index 1 carries charge -1
CHARGES = (+1, -1)


def charged_create(space, psi, sign):
    """a^dag_sign(psi): creation of a charge +-1 particle (charged-basis species)."""
    return create(space, psi, species=0 if sign > 0 else 1)


def charged_annihilate(space, psi, sign):
    return charged_create(space, psi, sign).dagger()


def _grade(kind, sign):
    # creators carry their charge, annihilators the opposite
    return sign if kind == "dag" else -sign


def zf_relations_federbush(kappa, grid_size=8, n_max=4, theta_half_width=2.0,
                           n_draws=20, tol=1e-10, seed=0, mass=1.0):
    """All sixteen twisted exchange relations of the coupled complex free fields.

    The twisted operator on the second factor is computed honestly as Vt (1 (x) Y) Vt*;
    each relation X (x) 1 . Ad(Vt)(1 (x) Y) = c . Ad(Vt)(1 (x) Y) . X (x) 1 is tested on
    random vectors supported on sectors <= n_max - 2, the measured phase c is fitted,
    and the creator-creator phases are compared entrywise with the 16 x 16 S-matrix.
    """
    rng = np.random.default_rng(seed)
    grid = make_grid(theta_half_width, grid_size, mass)
    space = FockSpace(grid, n_max, n_species=2)
    labels = charge_labels(space, CHARGES)
    arena = TensorArena(space, space)
    twist = GradedTwist(arena, labels, labels, kappa)
    smat = smatrix.federbush_smatrix(kappa)

    max_resid = 0.0
    max_phase_dev = 0.0
    relations = []
    entry_dev = 0.0
    for draw in range(n_draws):
        psi1 = rng.normal(size=grid_size) + 1j * rng.normal(size=grid_size)
        psi2 = rng.normal(size=grid_size) + 1j * rng.normal(size=grid_size)
        v = random_blocked(arena, rng, n_max - 2, n_max - 2)
        # relations are asserted on sectors <= n_max - 2, so top blocks are not needed
        ops1 = {s: create(space, psi1, species=0 if s > 0 else 1, max_source=n_max - 2)
                for s in (+1, -1)}
        ops2 = {s: create(space, psi2, species=0 if s > 0 else 1, max_source=n_max - 2)
                for s in (+1, -1)}
        for s1 in (+1, -1):
            for s2 in (+1, -1):
                for t1 in ("dag", "ann"):
                    for t2 in ("dag", "ann"):
                        X = ops1[s1] if t1 == "dag" else ops1[s1].dagger()
                        Y = ops2[s2] if t2 == "dag" else ops2[s2].dagger()
                        lhs = apply_left(X, ad_right(twist, Y, v))
                        rhs = ad_right(twist, Y, apply_left(X, v))
                        l, m = _grade(t1, s1), _grade(t2, s2)
                        c_theory = np.exp(-2j * np.pi * kappa * l * m)
                        scale = max(lhs.norm(), rhs.norm(), 1e-30)
                        resid = (lhs - c_theory * rhs).norm() / scale
                        c_fit = lhs.inner(rhs)
                        c_fit = np.conj(c_fit / abs(c_fit)) if abs(c_fit) > 0 else 0j
                        # lhs ~ c rhs => <lhs, rhs> = conj(c) |rhs|^2
                        phase_dev = abs(c_fit - c_theory)
                        max_resid = max(max_resid, resid)
                        max_phase_dev = max(max_phase_dev, phase_dev)
                        if draw == 0:
                            relations.append({
                                "ops": (t1, s1, t2, s2),
                                "theory_phase": [c_theory.real, c_theory.imag],
                                "residual": resid,
                                "phase_deviation": phase_dev,
                            })
                        # creator-creator phases against the S-matrix entries
                        if t1 == "dag" and t2 == "dag":
                            u_lab, v_lab = (1, s1), (2, s2)
                            entry = smat()[smat.index(v_lab, u_lab), smat.index(u_lab, v_lab)]
                            entry_dev = max(entry_dev, abs(c_theory - entry),
                                            abs(c_fit - entry))

    # same-field exchanges are untwisted: phase 1 entries of the matrix
    for sa in (+1, -1):
        for sb in (+1, -1):
            for f_lab in (1, 2):
                entry = smat()[smat.index((f_lab, sb), (f_lab, sa)),
                               smat.index((f_lab, sa), (f_lab, sb))]
                entry_dev = max(entry_dev, abs(entry - 1.0))

    ccr = _untwisted_ccr_deviation(space, rng, n_max)
    result = {
        "check": "zf-federbush",
        "kappa": kappa,
        "dims": {"grid": grid_size, "n_max": n_max, "sector_dims": space.sector_dims},
        "n_draws": n_draws,
        "max_residual": max_resid,
        "max_phase_deviation": max_phase_dev,
        "smatrix_entry_deviation": entry_dev,
        "untwisted_ccr_deviation": ccr,
        "relations": relations,
        "max_deviation": max(max_resid, max_phase_dev, entry_dev, ccr),
        "pass": max(max_resid, max_phase_dev, entry_dev, ccr) <= tol,
        "tol": tol,
    }
    return result


def _untwisted_ccr_deviation(space, rng, n_max):
    """Same-factor relations: [a_s(psi1), a^dag_s'(psi2)] = delta_ss' <psi1, psi2> and
    creator pairs commute; asserted below the cutoff."""
    g = space.grid
    psi1 = rng.normal(size=g.size) + 1j * rng.normal(size=g.size)
    psi2 = rng.normal(size=g.size) + 1j * rng.normal(size=g.size)
    dev = 0.0
    eye = FockOperator.identity(space)
    for s1 in (+1, -1):
        for s2 in (+1, -1):
            adag1 = charged_create(space, psi1, s1)
            adag2 = charged_create(space, psi2, s2)
            a1 = adag1.dagger()
            comm = a1 @ adag2 - adag2 @ a1
            ip = g.inner(psi1, psi2) if s1 == s2 else 0.0
            dev = max(dev, (comm - ip * eye).norm(max_sector=n_max - 1))
            dev = max(dev, (adag1 @ adag2 - adag2 @ adag1).norm(max_sector=n_max - 2))
    return dev


# ----------------------------------------------------------------------
# Longo-Witten-type relation (R-tilde twisted lightray models)
# ----------------------------------------------------------------------

def zf_relation_longo_witten(phi, grid_size=6, n_max=2, theta_half_width=1.5,
                             tol=1e-12, mass=1.0, seed=0, smear=None):
    """Exchange relation with factor phi(e^{theta - theta'}), tested per grid pair.

    Exact (diagonal phases) for inner functions with the reciprocal symmetry
    conj(phi(x)) = phi(1/x); the report records whether phi has it. With `smear`
    = (f, g), the smeared relation is compared against the pointwise relation
    integrated by quadrature.
    """
    rng = np.random.default_rng(seed)
    grid = make_grid(theta_half_width, grid_size, mass)
    space_a = FockSpace(grid, n_max)
    space_b = FockSpace(grid, n_max)
    arena = TensorArena(space_a, space_b)
    rt = build_R_tilde(phi, space_a, space_b)
    recip_ok, recip_dev = scatfunc.is_reciprocal_symmetric(phi)

    vecs = [vacuum2(arena), random_blocked(arena, rng, n_max - 1, n_max - 1)]
    worst = 0.0
    pairs = []
    for i in range(grid_size):
        for j in range(grid_size):
            A = create(space_a, grid_delta(grid, i))
            B = create(space_b, grid_delta(grid, j))
            factor = complex(phi(np.exp(grid.theta[i] - grid.theta[j])))
            for v in vecs:
                lhs = apply_left(A, ad_right(rt, B, v))
                rhs = ad_right(rt, B, apply_left(A, v))
                resid = (lhs - factor * rhs).norm() / max(rhs.norm(), 1e-30)
                worst = max(worst, resid)
            pairs.append({"theta": grid.theta[i], "theta_prime": grid.theta[j],
                          "factor": [factor.real, factor.imag]})

    smear_dev = None
    if smear is not None:
        f, g = smear
        fp, _ = pm_transform(f, grid)
        gp, _ = pm_transform(g, grid)
        cf = grid.to_ortho(fp.values)
        cg = grid.to_ortho(gp.values)
        v = random_blocked(arena, rng, n_max - 1, n_max - 1)
        A = create(space_a, fp.values)
        B = create(space_b, gp.values)
        lhs = apply_left(A, ad_right(rt, B, v))
        acc = None
        for i in range(grid_size):
            for j in range(grid_size):
                Ai = create(space_a, grid_delta(grid, i))
                Bj = create(space_b, grid_delta(grid, j))
                factor = complex(phi(np.exp(grid.theta[i] - grid.theta[j])))
                term = cf[i] * cg[j] * factor * ad_right(rt, Bj, apply_left(Ai, v))
                acc = term if acc is None else acc + term
        smear_dev = (lhs - acc).norm() / max(lhs.norm(), 1e-30)
        worst = max(worst, smear_dev)

    return {
        "check": "zf-longo-witten",
        "phi": phi.describe(),
        "reciprocal_symmetric": recip_ok,
        "reciprocal_deviation": recip_dev,
        "dims": {"grid": grid_size, "n_max": n_max},
        "max_residual": worst,
        "smeared_residual": smear_dev,
        "n_pairs": len(pairs),
        "max_deviation": worst,
        "pass": worst <= tol and recip_ok,
        "tol": tol,
    }


# ----------------------------------------------------------------------
# wedge commutativity with grid refinement
# ----------------------------------------------------------------------

@dataclass
class LocalityReport:
    pairs: list
    refinement: list          # [(grid_size, value)] in increasing resolution order
    tolerances: dict
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self, path=None):
        payload = {"pairs": self.pairs, "refinement": self.refinement,
                   "tolerances": self.tolerances, "passed": bool(self.passed),
                   "details": self.details}
        text = json.dumps(payload, sort_keys=True, indent=2, default=float)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def refinement_to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("grid_size,value\n")
            for n, v in self.refinement:
                fh.write(f"{n},{v!r}\n")


def _contraction_scalar(grid, fp, fm, gp, gm, u=None):
    """[Ad Gamma(u) phi(f), phi(g)] scalar: sum of w (conj(u) f- g+ - u f+ g-)."""
    u = np.ones(grid.size, dtype=complex) if u is None else u
    return complex(np.sum(grid.weights * (np.conj(u) * fm.values * gp.values
                                          - u * fp.values * gm.values)))


def _dressed_field(space, fp, fm, u):
    """Ad Gamma(u)(phi(f)) = a^dag(u f+) + a(u conj(f-)) for a unitary grid multiplier."""
    return (create(space, u * fp.values)
            + annihilate(space, u * np.conj(fm.values)))


def _commutator_vs_scalar(space, op_a, op_b, scalar, max_sector):
    comm = op_a @ op_b - op_b @ op_a
    eye = FockOperator.identity(space)
    return (comm - scalar * eye).norm(max_sector=max_sector)


def wedge_commutativity(f, g, grids=(16, 32, 64), twist=None, theta_half_width=2.2,
                        mass=1.5, n_max=2, right_n_max=2, tol_identity=1e-10,
                        tol_norm=1e-6, require_monotone=True, spacelike_margin=0.0,
                        n_quad=200, deep_check_grid=None):
    """Locality of smeared fields for spacelike-separated wedge supports.

    twist=None: the free commutator equals the contraction scalar on sectors below the
    cutoff, and the scalar decreases under grid refinement.

    twist=("rtilde", phi): the twisted commutator [Ad R~(phi(f) (x) 1), phi(g) (x) 1]
    block-diagonalizes over the spectator factor; per right configuration the left
    commutator is checked against the dressed contraction scalar, and the norm (the
    worst scalar over all right configurations) must fall below tol_norm and decrease.

    twist=("vtilde", kappa): same reduction over the spectator charge label for the
    coupled complex fields.
    """
    if not box_in_right_wedge(f.support, spacelike_margin):
        raise ValueError("first test function must be supported in the right wedge")
    if not box_in_left_wedge(g.support, spacelike_margin):
        raise ValueError("second test function must be supported in the left wedge")
    if not boxes_spacelike(f.support, g.support, spacelike_margin):
        raise ValueError("supports are not spacelike separated")

    series = []
    pairs = []
    identity_dev = 0.0
    for ng in grids:
        grid = make_grid(theta_half_width, ng, mass)
        fp, fm = pm_transform(f, grid, n_quad=n_quad)
        gp, gm = pm_transform(g, grid, n_quad=n_quad)

        if twist is None:
            space = FockSpace(grid, n_max)
            K = _contraction_scalar(grid, fp, fm, gp, gm)
            dev = _commutator_vs_scalar(
                space, field_from_pm(space, fp, fm), field_from_pm(space, gp, gm),
                K, n_max - 1)
            identity_dev = max(identity_dev, dev)
            series.append((ng, abs(K)))
            pairs.append({"grid": ng, "scalar": [K.real, K.imag], "identity_dev": dev})

        elif twist[0] == "rtilde":
            phi = twist[1]
            space = FockSpace(grid, n_max)
            right = FockSpace(grid, right_n_max)
            rt = build_R_tilde(phi, space, right)
            # worst dressed scalar over every spectator configuration
            worst = 0.0
            for n in range(right_n_max + 1):
                for mom in rt._momb[n]:
                    u = rt.left_multiplier(mom)
                    worst = max(worst, abs(_contraction_scalar(grid, fp, fm, gp, gm, u)))
            # operator check on sampled spectator configurations
            samples = [rt._momb[n][idx] for n in range(right_n_max + 1)
                       for idx in ([0, len(rt._momb[n]) // 2] if len(rt._momb[n]) > 1 else [0])]
            for mom in samples:
                u = rt.left_multiplier(mom)
                K = _contraction_scalar(grid, fp, fm, gp, gm, u)
                dev = _commutator_vs_scalar(
                    space, _dressed_field(space, fp, fm, u),
                    field_from_pm(space, gp, gm), K, n_max - 1)
                identity_dev = max(identity_dev, dev)
            series.append((ng, worst))
            pairs.append({"grid": ng, "worst_scalar": worst, "identity_dev": identity_dev})

        elif twist[0] == "vtilde":
            kappa = twist[1]
            space = FockSpace(grid, n_max, n_species=2)
            # spectator labels for a coupled factor truncated at the same cutoff
            label_range = range(-right_n_max, right_n_max + 1)
            worst = 0.0
            for m in label_range:
                u = np.full(grid.size, np.exp(2j * np.pi * kappa * m), dtype=complex)
                # charged field: + species dressed by the phase, - species by its conjugate
                K = 0.0
                for sign, uu in ((+1, u), (-1, np.conj(u))):
                    K += _contraction_scalar(grid, fp, fm, gp, gm, uu) / 2
                worst = max(worst, abs(K))
            series.append((ng, worst))
            pairs.append({"grid": ng, "worst_scalar": worst})
        else:
            raise ValueError(f"unknown twist {twist[0]!r}")

    values = [v for _, v in series]
    monotone = all(values[i + 1] < values[i] for i in range(len(values) - 1))
    passed = identity_dev <= tol_identity
    if require_monotone:
        passed = passed and monotone
    if twist is not None and len(grids) >= 2:
        passed = passed and values[1] <= tol_norm
    return LocalityReport(
        pairs=pairs,
        refinement=series,
        tolerances={"identity": tol_identity, "norm": tol_norm},
        passed=passed,
        details={"monotone": monotone, "identity_dev": identity_dev,
                 "twist": "none" if twist is None else twist[0]},
    )


# ----------------------------------------------------------------------
# spectrum condition and cyclicity
# ----------------------------------------------------------------------

def _sector_momenta(space):
    """(p0, p1) totals per basis vector, all sectors."""
    if space.s2 is not None:
        raise ValueError("joint spectrum enumeration needs the occupation basis")
    p0s, p1s = [], []
    p0, p1 = space.grid.momentum()
    p0m = np.tile(p0, space.n_species)
    p1m = np.tile(p1, space.n_species)
    for n in range(space.n_max + 1):
        occ = np.array(space.occupations[n], dtype=float).reshape(space.sector_dims[n], -1)
        p0s.append(occ @ p0m)
        p1s.append(occ @ p1m)
    return np.concatenate(p0s), np.concatenate(p1s)


def spectrum_condition(space, space_b=None, chunk=1 << 20):
    """Every joint translation eigenvalue lies in the closed forward cone, exactly."""
    p0a, p1a = _sector_momenta(space)
    viol = int(np.sum(p0a < np.abs(p1a)))
    worst = float((np.abs(p1a) - p0a).max())
    total = len(p0a)
    if space_b is not None:
        p0b, p1b = _sector_momenta(space_b)
        total = len(p0a) * len(p0b)
        step = max(1, chunk // max(1, len(p0b)))
        for lo in range(0, len(p0a), step):
            P0 = p0a[lo:lo + step, None] + p0b[None, :]
            P1 = np.abs(p1a[lo:lo + step, None] + p1b[None, :])
            viol += int(np.sum(P0 < P1))
            worst = max(worst, float((P1 - P0).max()))
    return {
        "check": "spectrum-condition",
        "n_eigenvalues": int(total),
        "violations": viol,
        "worst_margin": worst,   # max of |p1| - p0; negative means strictly inside
        "pass": viol == 0,
        "max_deviation": max(0.0, worst),
    }


def cyclicity_rank(space, generators, omega=None, degree=None, tol=1e-8):
    """Rank of span{ words(generators) Omega } up to the degree bound, versus dim.

    Also reports injectivity of x -> x Omega on the degree-bounded word span
    (the separating side of the cyclic/separating pair).
    """
    omega = fock.vacuum(space) if omega is None else omega
    degree = space.n_max + 1 if degree is None else degree
    dims = space.sector_dims
    offs = np.concatenate([[0], np.cumsum(dims)])

    def flatten(v):
        out = np.zeros(offs[-1], dtype=complex)
        for n, c in v.components.items():
            out[offs[n]:offs[n + 1]] = c
        return out

    vectors = [flatten(omega)]
    words = [FockOperator.identity(space)]
    frontier = [FockOperator.identity(space)]
    per_degree = []
    for deg in range(1, degree + 1):
        new_frontier = []
        for w in frontier:
            for gen in generators:
                nw = gen @ w
                new_frontier.append(nw)
                vectors.append(flatten(nw.apply(omega)))
                words.append(nw)
        frontier = new_frontier
        # injectivity of x -> x Omega on the word span up to this degree: only
        # meaningful while the span fits inside the space
        W = np.column_stack([w.dense().reshape(-1) for w in words])
        sw = np.linalg.svd(W, compute_uv=False)
        word_rank = int(np.sum(sw > tol * sw[0]))
        V = np.column_stack(vectors)
        sv = np.linalg.svd(V, compute_uv=False)
        img_rank = int(np.sum(sv > tol * sv[0]))
        per_degree.append({"degree": deg, "word_span_dim": word_rank,
                           "image_rank": img_rank,
                           "injective": word_rank == img_rank})
    rank = per_degree[-1]["image_rank"]
    injective_degrees = [row for row in per_degree
                         if row["word_span_dim"] <= offs[-1]]
    separating = all(row["injective"] for row in injective_degrees) if injective_degrees \
        else True
    return {
        "check": "cyclicity",
        "rank": rank,
        "space_dim": int(offs[-1]),
        "deficiency": int(offs[-1]) - rank,
        "full_rank": rank == offs[-1],
        "per_degree": per_degree,
        "separating_on_words": separating,
        "n_words": len(words),
    }


def twisted_cyclicity_match(kappa, grid_size=3, n_max=2, theta_half_width=1.0,
                            n_funcs=4, seed=0, tol=1e-8):
    """Twisted generators {x (x) 1, Ad(Vt)(1 (x) y)} span the same rank from the vacuum
    as the untwisted pairs (the twist acts trivially on vacuum vectors)."""
    rng = np.random.default_rng(seed)
    grid = make_grid(theta_half_width, grid_size, mass=1.0)
    space = FockSpace(grid, n_max, n_species=2)
    labels = charge_labels(space, CHARGES)
    arena = TensorArena(space, space)
    twist = GradedTwist(arena, labels, labels, kappa)

    gens = []
    for _ in range(n_funcs):
        psi = rng.normal(size=grid_size) + 1j * rng.normal(size=grid_size)
        sign = +1 if rng.random() < 0.5 else -1
        gens.append((charged_create(space, psi, sign)
                     + charged_annihilate(space, psi, sign), sign))

    om = vacuum2(arena)

    def span_rank(twisted):
        vecs = [om]
        frontier = [om]
        for _ in range(2 * n_max):
            nxt = []
            for v in frontier:
                for op, _ in gens:
                    nxt.append(apply_left(op, v))
                    nxt.append(ad_right(twist, op, v) if twisted else apply_right(op, v))
            vecs += nxt
            frontier = nxt
        flat = []
        for v in vecs:
            comp = []
            for key in sorted(arena.sector_pairs()):
                if key in v.components:
                    comp.append(v.components[key].reshape(-1))
                else:
                    da, db = arena.a.sector_dims[key[0]], arena.b.sector_dims[key[1]]
                    comp.append(np.zeros(da * db, dtype=complex))
            flat.append(np.concatenate(comp))
        sv = np.linalg.svd(np.column_stack(flat), compute_uv=False)
        return int(np.sum(sv > tol * sv[0]))

    r_plain = span_rank(False)
    r_twist = span_rank(True)
    return {
        "check": "twisted-cyclicity",
        "rank_untwisted": r_plain,
        "rank_twisted": r_twist,
        "pass": r_plain == r_twist,
    }


# ----------------------------------------------------------------------
# negative controls: these checks must FAIL
# ----------------------------------------------------------------------

def control_overlapping_supports(threshold=1e-4, grid_size=32, theta_half_width=2.2,
                                 mass=1.5):
    """Timelike-separated supports must yield a visibly nonzero commutator scalar."""
    f = onepspace.bump((0.25, 2.4), (0.7, 0.7))
    g = onepspace.bump((0.95, 2.4), (0.7, 0.7))   # inside f's lightcone
    grid = make_grid(theta_half_width, grid_size, mass)
    fp, fm = pm_transform(f, grid)
    gp, gm = pm_transform(g, grid)
    K = _contraction_scalar(grid, fp, fm, gp, gm)
    spacelike = boxes_spacelike(f.support, g.support)
    return {
        "check": "control-overlap",
        "expected_failure": True,
        "scalar": abs(K),
        "threshold": threshold,
        "locality_holds": abs(K) <= threshold,
        "failed_as_required": (abs(K) > threshold) and not spacelike,
        "pass": (abs(K) > threshold) and not spacelike,
    }


def control_single_generator(grid_size=4, n_max=2, theta_half_width=1.5):
    """A single smeared field cannot generate the truncated space from the vacuum."""
    grid = make_grid(theta_half_width, grid_size, mass=1.0)
    space = FockSpace(grid, n_max)
    f = onepspace.bump((0.0, 2.0), (0.6, 0.6))
    rep = cyclicity_rank(space, [fock.field(space, f)], degree=2 * n_max)
    return {
        "check": "control-cyclicity",
        "expected_failure": True,
        "rank": rep["rank"],
        "space_dim": rep["space_dim"],
        "failed_as_required": rep["deficiency"] > 0,
        "pass": rep["deficiency"] > 0,
    }
