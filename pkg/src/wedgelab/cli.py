"""Command-line front end: TOML experiment configs, batch check runs, JSON/CSV reports.

Exit codes: 0 all checks as required (positive checks pass, negative controls fail),
1 check failures, 2 configuration errors.
"""

import argparse
import concurrent.futures
import json
import sys
import zlib
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import modular, onepspace, scatfunc, smatrix, verify
from .fock import FockSpace, charge_labels, create, vacuum
from .onepspace import make_grid
from .verify import CHARGES


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    model: str = "free"
    model_params: dict = dc_field(default_factory=dict)
    theta_half_width: float = 2.2
    n_points: int = 16
    mass: float = 1.5
    n_max: int = 2
    checks: list = dc_field(default_factory=list)
    tolerances: dict = dc_field(default_factory=dict)
    seed: int = 0

    KNOWN_MODELS = ("free", "lechner", "federbush", "longo-witten", "modular-toy")

    def validate(self):
        if self.model not in self.KNOWN_MODELS:
            raise ConfigError(f"unknown model {self.model!r}; known: {self.KNOWN_MODELS}")
        if self.theta_half_width <= 0 or self.n_points < 2 or self.mass <= 0:
            raise ConfigError("grid parameters out of range")
        if not 0 <= self.n_max <= 6:
            raise ConfigError("cutoff n_max out of documented range 0..6")
        for name in self.checks:
            if name not in CHECKS:
                raise ConfigError(f"unknown check {name!r}; see --list")
        return self

    def tol(self, name, default):
        return float(self.tolerances.get(name, default))

    def phi(self):
        spec = self.model_params.get("phi", {"name": "phi.reciprocal_pair", "a": [0.8]})
        params = {k: v for k, v in spec.items() if k != "name"}
        return scatfunc.from_registry(spec.get("name", "phi.reciprocal_pair"), **params)

    def s2(self):
        spec = self.model_params.get("s2", {"name": "s2.blaschke", "b": [0.7]})
        params = {k: v for k, v in spec.items() if k != "name"}
        return scatfunc.from_registry(spec.get("name", "s2.blaschke"), **params)


def load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    cfg = ExperimentConfig()
    model = raw.get("model", {})
    if isinstance(model, dict):
        cfg.model = model.get("name", cfg.model)
        cfg.model_params = {k: v for k, v in model.items() if k != "name"}
    else:
        cfg.model = str(model)
    grid = raw.get("grid", {})
    cfg.theta_half_width = float(grid.get("theta_half_width", cfg.theta_half_width))
    cfg.n_points = int(grid.get("n_points", cfg.n_points))
    cfg.mass = float(grid.get("mass", cfg.mass))
    cfg.n_max = int(raw.get("cutoff", {}).get("n_max", cfg.n_max))
    cfg.checks = list(raw.get("checks", {}).get("names", []))
    cfg.tolerances = dict(raw.get("tolerances", {}))
    cfg.seed = int(raw.get("seed", 0))
    return cfg.validate()


def _rng_for(cfg, name):
    return np.random.default_rng([cfg.seed, zlib.crc32(name.encode())])


# ----------------------------------------------------------------------
# checks
# ----------------------------------------------------------------------

def check_s2_axioms(cfg, rng):
    tol = cfg.tol("s2_axioms", 1e-10)
    thetas = rng.normal(scale=2.0, size=1000)
    worst = 0.0
    per = {}
    funcs = scatfunc.builtin_s2_functions() + [cfg.s2()]
    for s2 in funcs:
        rep = scatfunc.validate_s2(s2, thetas, tol)
        per[s2.describe()] = rep["max_deviation"]
        worst = max(worst, rep["max_deviation"])
    return {"max_deviation": worst, "pass": worst <= tol, "tol": tol,
            "per_function": per, "dims": {"n_samples": 1000}}


def check_phi_inner(cfg, rng):
    tol = cfg.tol("phi_inner", 1e-10)
    worst = 0.0
    per = {}
    for phi in scatfunc.builtin_phi_functions() + [cfg.phi()]:
        rep = scatfunc.validate_inner(phi, 1000, tol, rng)
        per[phi.describe()] = rep["max_deviation"]
        worst = max(worst, rep["max_deviation"])
    return {"max_deviation": worst, "pass": worst <= tol, "tol": tol, "per_function": per,
            "dims": {"n_samples": 1000}}


def check_s2_fock_exchange(cfg, rng):
    tol = cfg.tol("s2_fock_exchange", 1e-12)
    d = min(cfg.n_points, 8)
    grid = make_grid(cfg.theta_half_width, d, cfg.mass)
    s2 = cfg.s2()
    space = FockSpace(grid, 2, s2=s2.evaluator)
    from .fock import sector_projection
    Q = sector_projection(s2.evaluator, 2, grid)
    herm = float(np.abs(Q - Q.conj().T).max())
    idem = float(np.abs(Q @ Q - Q).max())
    worst = max(herm, idem)
    om = vacuum(space)
    for i in range(d):
        for j in range(d):
            zi = create(space, verify.grid_delta(grid, i))
            zj = create(space, verify.grid_delta(grid, j))
            v1 = zi.apply(zj.apply(om))
            v2 = zj.apply(zi.apply(om))
            s = complex(s2(grid.theta[j] - grid.theta[i]))
            dev = (v2 - s * v1).norm()
            worst = max(worst, dev)
    return {"max_deviation": worst, "pass": worst <= tol, "tol": tol,
            "dims": {"grid": d, "rank2": space.sector_dims[2]},
            "projection": {"hermitian": herm, "idempotent": idem}}


def check_smatrix_axioms(cfg, rng):
    tol = cfg.tol("smatrix_axioms", 1e-12)
    thetas = rng.normal(scale=1.5, size=20)
    reports = {}
    kappa = float(cfg.model_params.get("kappa", 0.25))
    reports["federbush"] = smatrix.check_axioms(smatrix.federbush_smatrix(kappa), thetas, tol)
    reports["longo-witten"] = smatrix.check_axioms(
        smatrix.longo_witten_smatrix(cfg.phi()), thetas, tol)
    worst = max(r["max_deviation"] for r in reports.values())
    return {"max_deviation": worst, "pass": worst <= tol, "tol": tol,
            "per_matrix": {k: r["axiom_deviations"] for k, r in reports.items()},
            "dims": {"n_thetas": len(thetas)}}


def check_zf_federbush(cfg, rng):
    tol = cfg.tol("zf_federbush", 1e-10)
    kappa = float(cfg.model_params.get("kappa", 0.25))
    rep = verify.zf_relations_federbush(
        kappa, grid_size=min(cfg.n_points, 8), n_max=max(cfg.n_max, 3),
        n_draws=int(cfg.model_params.get("n_draws", 5)),
        tol=tol, seed=int(rng.integers(1 << 31)), mass=cfg.mass)
    rep["phases"] = sorted({tuple(np.round(r["theory_phase"], 12)) for r in rep["relations"]})
    return rep


def check_zf_longo_witten(cfg, rng):
    tol = cfg.tol("zf_longo_witten", 1e-12)
    f = onepspace.bump((0.2, 2.2), (0.6, 0.6))
    g = onepspace.bump((-0.1, 2.4), (0.6, 0.6))
    return verify.zf_relation_longo_witten(
        cfg.phi(), grid_size=min(cfg.n_points, 6), n_max=min(cfg.n_max, 2),
        tol=tol, mass=cfg.mass, seed=int(rng.integers(1 << 31)), smear=(f, g))


def _wedge_pair():
    f = onepspace.bump((0.25, 2.4), (0.7, 0.7))
    g = onepspace.bump((-0.15, -2.5), (0.7, 0.7))
    return f, g


def check_wedge_free(cfg, rng, out_dir=None):
    f, g = _wedge_pair()
    rep = verify.wedge_commutativity(
        f, g, grids=(16, 32, 64), twist=None, theta_half_width=cfg.theta_half_width,
        mass=cfg.mass, n_max=2, tol_identity=cfg.tol("wedge_identity", 1e-10))
    if out_dir is not None:
        rep.refinement_to_csv(Path(out_dir) / "wedge_free_refinement.csv")
    return {"max_deviation": rep.details["identity_dev"], "pass": rep.passed,
            "refinement": rep.refinement, "monotone": rep.details["monotone"],
            "dims": {"grids": [16, 32, 64]}, "tol": rep.tolerances}


def check_wedge_rtilde(cfg, rng, out_dir=None):
    f, g = _wedge_pair()
    rep = verify.wedge_commutativity(
        f, g, grids=(16, 32), twist=("rtilde", cfg.phi()),
        theta_half_width=cfg.theta_half_width, mass=cfg.mass, n_max=2, right_n_max=2,
        tol_identity=cfg.tol("wedge_identity", 1e-10),
        tol_norm=cfg.tol("wedge_norm", 1e-6))
    if out_dir is not None:
        rep.refinement_to_csv(Path(out_dir) / "wedge_rtilde_refinement.csv")
    return {"max_deviation": rep.details["identity_dev"], "pass": rep.passed,
            "refinement": rep.refinement, "monotone": rep.details["monotone"],
            "dims": {"grids": [16, 32]}, "tol": rep.tolerances}


def check_modular_twisted(cfg, rng):
    tol = cfg.tol("modular_twisted", 1e-10)
    p = cfg.model_params
    n = int(p.get("n", 2))
    N = int(p.get("N", 2))
    k = int(p.get("k", 1))
    lam = list(p.get("lam", [0.8, 0.2])) if n == 2 else list(range(1, n + 1))
    rep = modular.verify_modular_twisted(n, N, k, lam, rng=rng)
    rep.update({"pass": rep["max_deviation"] <= tol, "tol": tol})
    return rep


def check_commutant_twisted(cfg, rng):
    tol = cfg.tol("commutant_twisted", 1e-10)
    p = cfg.model_params
    n = int(p.get("n", 2))
    N = int(p.get("N", 2))
    k = int(p.get("k", 1))
    lam = list(p.get("lam", [0.8, 0.2])) if n == 2 else list(range(1, n + 1))
    rep = modular.verify_commutant_twisted(n, N, k, lam)
    rep.update({"pass": rep["max_deviation"] <= tol, "tol": tol})
    return rep


def check_tau_bound(cfg, rng):
    tol = cfg.tol("tau_bound", 1e-12)
    worst = {}
    ok = True
    dev = 0.0
    for N in (2, 3):
        rep = modular.tau_bound_report(2, N, 1, n_draws=50, rng=rng)
        worst[f"N={N}"] = rep["worst_norm_ratio"]
        ok = ok and rep["bound_satisfied"] and rep["vector_action_deviation"] <= tol
        dev = max(dev, rep["max_deviation"])
    return {"max_deviation": dev, "pass": ok, "tol": tol, "worst_ratios": worst,
            "dims": {"n": 2, "N": [2, 3]}}


def check_type_i(cfg, rng):
    ok = True
    dev = 0.0
    per = {}
    for (n, N) in ((2, 2), (2, 3), (3, 2), (3, 3)):
        rep = modular.factor_and_minimal_projection(n, N, 1)
        per[f"M{n},N={N}"] = {"center_dim": rep["center_dimension"],
                             "compression_rank": rep["compression_rank"]}
        ok = ok and rep["center_trivial"] and rep["minimal"]
        dev = max(dev, rep["fixed_point_deviation"], rep["projection_membership_residual"])
    return {"max_deviation": dev, "pass": ok and dev <= cfg.tol("type_i", 1e-10),
            "per_toy": per, "tol": cfg.tol("type_i", 1e-10), "dims": {"sizes": [2, 3]}}


def check_spectrum(cfg, rng):
    grid = make_grid(cfg.theta_half_width, min(cfg.n_points, 8), cfg.mass)
    space = FockSpace(grid, min(cfg.n_max + 2, 4))
    rep = verify.spectrum_condition(space, space)
    rep["dims"] = {"grid": grid.size, "n_max": space.n_max}
    return rep


def check_cyclicity(cfg, rng):
    grid = make_grid(1.5, 4, 1.0)
    space = FockSpace(grid, 2)
    funcs = [onepspace.bump((0.2 * i, 2.0 + 0.3 * i), (0.6, 0.6)) for i in range(4)]
    from .fock import field
    rep = verify.cyclicity_rank(space, [field(space, fn) for fn in funcs], degree=4)
    tw = verify.twisted_cyclicity_match(float(cfg.model_params.get("kappa", 0.25)))
    rep["twisted_rank_match"] = tw["pass"]
    rep["pass"] = rep["full_rank"] and rep["separating_on_words"] and tw["pass"]
    return rep


def check_control_overlap(cfg, rng):
    return verify.control_overlapping_supports(mass=cfg.mass,
                                               theta_half_width=cfg.theta_half_width)


def check_control_cyclicity(cfg, rng):
    return verify.control_single_generator()


# name -> (runner, anchor). Anchors are descriptive labels for the verified statement.
CHECKS = {
    "s2-axioms": (check_s2_axioms, "exchange-function identities on the strip boundary"),
    "phi-inner": (check_phi_inner, "inner property of the lightray twist functions"),
    "s2-fock-exchange": (check_s2_fock_exchange,
                         "two-particle symmetrizer and creation exchange law"),
    "smatrix-axioms": (check_smatrix_axioms,
                       "unitarity / hermitian analyticity / Yang-Baxter of the "
                       "two-particle S-matrices"),
    "zf-federbush": (check_zf_federbush,
                     "twisted exchange relations of the coupled complex free fields"),
    "zf-longo-witten": (check_zf_longo_witten,
                        "twisted exchange relation of the lightray-deformed free field"),
    "wedge-free": (check_wedge_free,
                   "free-field locality scalar under grid refinement"),
    "wedge-rtilde": (check_wedge_rtilde,
                     "wedge commutativity of the lightray-twisted field pair"),
    "modular-twisted": (check_modular_twisted,
                        "modular operator of the twisted algebra is the tensor square"),
    "commutant-twisted": (check_commutant_twisted,
                          "commutant formula for the twisted algebra"),
    "tau-bound": (check_tau_bound,
                  "norm bound and vacuum invariance of the sector-twisting map"),
    "type-i-minimal": (check_type_i,
                       "trivial center and minimal projection of the twisted factor"),
    "spectrum-condition": (check_spectrum,
                           "joint translation spectrum in the forward cone"),
    "cyclicity": (check_cyclicity, "vacuum cyclicity rank at truncation"),
    "control-overlap": (check_control_overlap,
                        "negative control: timelike supports must not commute"),
    "control-cyclicity": (check_control_cyclicity,
                          "negative control: one generator must not be cyclic"),
}

DEFAULT_CHECKS = [n for n in CHECKS if not n.startswith("control-")] + \
                 [n for n in CHECKS if n.startswith("control-")]


def list_checks(stream=sys.stdout):
    for name in sorted(CHECKS):
        stream.write(f"{name:24s} {CHECKS[name][1]}\n")
    return len(CHECKS)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not serializable: {type(obj)}")


def run(cfg, out_dir, selected=None, jobs=1):
    """Run the requested checks; write report.json and CSV artifacts; return exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = selected or cfg.checks or DEFAULT_CHECKS
    for n in names:
        if n not in CHECKS:
            raise ConfigError(f"unknown check {n!r}")

    def run_one(name):
        fn = CHECKS[name][0]
        rng = _rng_for(cfg, name)
        kwargs = {"out_dir": out} if name.startswith("wedge-") else {}
        rep = fn(cfg, rng, **kwargs)
        rep["check"] = name
        rep["seed"] = cfg.seed
        rep["anchor"] = CHECKS[name][1]
        return name, rep

    results = {}
    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            for name, rep in pool.map(run_one, names):
                results[name] = rep
    else:
        for name in names:
            name, rep = run_one(name)
            results[name] = rep

    all_ok = all(rep.get("pass", False) for rep in results.values())
    report = {
        "config": {
            "model": cfg.model, "model_params": cfg.model_params,
            "grid": {"theta_half_width": cfg.theta_half_width,
                     "n_points": cfg.n_points, "mass": cfg.mass},
            "n_max": cfg.n_max, "seed": cfg.seed,
        },
        "checks": {k: results[k] for k in sorted(results)},
        "all_pass": all_ok,
    }
    (out / "report.json").write_text(
        json.dumps(report, sort_keys=True, indent=2, default=_json_default) + "\n")
    return (0 if all_ok else 1), report


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="wedgelab",
        description="Finite-truncation checks for twisted Fock-space field models")
    parser.add_argument("--config", type=str, default=None, help="TOML config file")
    parser.add_argument("--out", type=str, default="wedgelab-out", help="report directory")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--jobs", type=int, default=1, help="parallel check workers")
    parser.add_argument("--check", action="append", default=None,
                        help="run a single named check (repeatable)")
    parser.add_argument("--list", action="store_true", help="list available checks")
    args = parser.parse_args(argv)

    if args.list:
        list_checks()
        return 0
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig().validate()
        if args.seed is not None:
            cfg.seed = args.seed
        code, report = run(cfg, args.out, selected=args.check, jobs=max(1, args.jobs))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    n_pass = sum(1 for r in report["checks"].values() if r.get("pass"))
    print(f"{n_pass}/{len(report['checks'])} checks as required; report in {args.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
