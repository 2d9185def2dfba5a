"""Command-line entry point: verify, radial, evolve, tetrad.

Exit codes: 0 all asserted checks pass, 1 numeric failure, 2 usage or config error.
"""
import argparse
import json
import sys
import time

import numpy as np

from . import algebra, lorentz, tetrad as tetrad_mod
from .errors import ConfigError, DiracGeomError, NoSignChange, StiffIntegration, DomainError
from .io import RunManifest, OutputDir, load_config, typed_section

SUITES = ("algebra", "lorentz", "tetrad", "geometry", "connection", "identities")

RADIAL_CASES = {
    "coulomb_Z0.5": dict(Zalpha=0.5, k=1.0, m=1.0, aleph_mode="off", n_nodes=10000,
                         E_lo=0.80, E_hi=0.90, nE=0),
    "aleph_spherical": dict(Zalpha=0.5, k=1.0, m=1.0, aleph_mode="spherical", n_nodes=3000,
                            E_lo=0.30, E_hi=0.999, nE=60),
}

EVOLVE_KEYS = {"L", "N", "dt", "m", "nonlinear", "steps", "R0", "bump_height", "bump_center",
               "bump_width", "self_coupling", "sample_every", "center", "width", "momentum",
               "amplitude", "snapshot_every", "compare_linear"}


def _check(rows, name, value, tol):
    ok = bool(np.isfinite(value) and value <= tol)
    rows.append({"check": name, "value": float(value), "tol": float(tol), "pass": ok})


# ---------------------------------------------------------------- verify suites

def _corrupted_matrices():
    m = algebra.build_matrices()
    alpha = m.alpha.copy()
    alpha[2] = alpha[2].copy()
    alpha[2][0, 1] *= -1          # breaks hermiticity and the Clifford relation
    return algebra.DiracMatrices(alpha=alpha, rho=m.rho, sigma=m.sigma)


def suite_algebra(rng, n, ts, mats):
    rows = []
    for k, v in algebra.matrix_identity_residuals(mats).items():
        _check(rows, f"algebra.{k}", v, 1e-14 * ts)
    psi = algebra.random_spinors(n, rng)
    try:
        b = algebra.bilinears(psi, mats)
    except DiracGeomError as ex:
        rows.append({"check": "algebra.bilinears", "value": float("inf"), "tol": 0.0, "pass": False,
                     "error": str(ex)})
        return rows
    for k, v in algebra.invariant_report(b).items():
        _check(rows, f"algebra.{k}", v, 1e-12 * ts)
    _check(rows, "algebra.tensor_dual_product", algebra.tensor_dual_product_residual(b), 1e-12 * ts)
    return rows


def suite_lorentz(rng, n, ts, mats):
    rows, worst = [], {}
    psi = algebra.random_spinors(n, rng)
    for i in range(n):
        S = lorentz.random_spin_transform(rng)
        Lam = lorentz.induced_lorentz(S, mats)
        for k, v in lorentz.lorentz_residuals(Lam, S, mats).items():
            worst[k] = max(worst.get(k, 0.0), v)
        for k, v in lorentz.verify_tensor_law(psi[i], S, mats).items():
            worst["law_" + k] = max(worst.get("law_" + k, 0.0), v)
    for k, v in sorted(worst.items()):
        tol = 1e-12 if k in ("law_S", "law_P", "law_R") else 1e-10
        _check(rows, f"lorentz.{k}", v, tol * ts)
    return rows


def suite_tetrad(rng, n, ts, mats):
    rows, worst, kept = [], {}, 0
    for psi in algebra.random_spinors(n, rng):
        b = algebra.bilinears(psi, mats)
        if b.norm2 / b.R > 5:          # boost factor above 5: rounding floor grows as gamma^4
            continue
        kept += 1
        t = tetrad_mod.build_tetrad(b)
        for k, v in tetrad_mod.tetrad_residuals(t).items():
            worst[k] = max(worst.get(k, 0.0), v)
    for k, v in sorted(worst.items()):
        _check(rows, f"tetrad.{k}", v, 1e-12 * ts)
    from .manufactured import rest_spinor
    rest = tetrad_mod.build_tetrad(algebra.bilinears(rest_spinor(2.0, 0.0)), chart="world_time")
    g = tetrad_mod.metric_from_tetrad(rest).g
    _check(rows, "tetrad.rest_g00_inverse_R2", abs(g[0, 0] - 1 / 4.0), 1e-12 * ts)
    return rows


def suite_geometry(rng, n, ts, mats):
    from .grid import rotation_coefficients
    from .manufactured import spherical_grid, spherical_flat_tetrad, spherical_flat_omega
    errs = []
    for nr in (9, 17):
        gr = spherical_grid(1.0, 2.0, 0.6, 1.2, nr, nr)
        om = rotation_coefficients(gr, spherical_flat_tetrad(gr)).omega
        _, r, th, _ = gr.mesh()
        errs.append(np.abs(om - spherical_flat_omega(r, th)).max())
    rows = []
    _check(rows, "geometry.spherical_omega_coarse", errs[0], 5e-2 * ts)
    _check(rows, "geometry.spherical_omega_order_defect", abs(errs[0] / errs[1] - 4.0), 0.3 * ts)
    return rows


def suite_connection(rng, n, ts, mats):
    from .connection import ConnectionInputs, build_connection, connection_residuals
    om = rng.normal(size=(max(n // 100, 4), 4, 4, 4))
    om = om - np.swapaxes(om, 1, 2)
    inp = ConnectionInputs(omega=om, A=rng.normal(size=(len(om), 4)), aleph=rng.normal(size=(len(om), 4)),
                           e_charge=0.7, g_coupling=1.3)
    rows = []
    for k, v in connection_residuals(build_connection(inp), inp).items():
        _check(rows, f"connection.{k}", v, 1e-12 * ts)
    return rows


def suite_identities(rng, n, ts, mats):
    from .identities import aleph_from_bending, curvature_constraint, gyromagnetic_moment, spherical_relations
    from .manufactured import normal_radial_omega
    rows = []
    r = np.linspace(1.5, 4.0, 11)
    om, U, X = normal_radial_omega(r)
    al, _ = aleph_from_bending(om, U, 1.0, form="normal_radial")
    _check(rows, "identities.aleph_radial_closed_form", np.abs(2 * al[..., 3] - X).max(), 1e-12 * ts)
    cc = curvature_constraint(om, U, 1.0)
    _check(rows, "identities.curvature_constraint", cc.max("curvature_constraint"), 1e-12 * ts)
    sr = spherical_relations(om, al, 1.0, r)
    worst = max(v["max"] for v in sr.entries.values() if v["asserted"])
    _check(rows, "identities.spherical_relations", worst, 1e-12 * ts)
    _check(rows, "identities.gyromagnetic_moment", abs(gyromagnetic_moment() - 0.5), 0.0)
    return rows


def cmd_verify(args, cfg, manifest, out):
    sec = typed_section(cfg, "verify", {"suites", "samples", "fault"})
    suites = sec.get("suites", list(SUITES))
    if isinstance(suites, str):
        suites = [suites]
    unknown = [s for s in suites if s not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s): {', '.join(unknown)}")
    n = int(sec.get("samples", 2000))
    fault = sec.get("fault")
    if fault not in (None, "corrupt_matrix"):
        raise ConfigError(f"unknown fault hook {fault!r}")
    mats = _corrupted_matrices() if fault == "corrupt_matrix" else algebra.MATS
    rng = np.random.default_rng(args.seed)
    rows = []
    for s in suites:
        rows += globals()[f"suite_{s}"](rng, n, args.tol_scale, mats)
    failed = [r["check"] for r in rows if not r["pass"]]
    for r in rows:
        print(f"{'PASS' if r['pass'] else 'FAIL'} {r['check']} {r['value']:.3e} (tol {r['tol']:.1e})")
    manifest.tolerances = {r["check"]: r["tol"] for r in rows}
    out.json("verify_report.json", {"suites": suites, "samples": n, "checks": rows, "failed": failed})
    manifest.status = "fail" if failed else "ok"
    return 1 if failed else 0


# ---------------------------------------------------------------- radial

def sommerfeld_level(n, kappa, Zalpha, m=1.0):
    """Closed-form Dirac-Coulomb level for principal number n and Dirac quantum number kappa."""
    g = np.sqrt(kappa ** 2 - Zalpha ** 2)
    nr = n - abs(kappa)
    return m / np.sqrt(1 + (Zalpha / (nr + g)) ** 2)


def cmd_radial(args, cfg, manifest, out):
    from .radial import RadialProblem, shoot_bound_state, find_levels
    sec = typed_section(cfg, "radial", {"case", "Zalpha", "k", "m", "aleph_mode", "n_nodes", "E_lo", "E_hi",
                                        "nE", "r_min", "r_max", "g_coupling", "channel"})
    case = sec.pop("case", None)
    if case is not None:
        if case not in RADIAL_CASES:
            raise ConfigError(f"unknown radial case {case!r}")
        base = dict(RADIAL_CASES[case])
        base.update(sec)
        sec = base
    lo, hi, nE = float(sec.pop("E_lo", 0.5)), float(sec.pop("E_hi", 0.999)), int(sec.pop("nE", 60))
    channel = sec.pop("channel", None)
    try:
        prob = RadialProblem(**sec)
    except (TypeError, ValueError, DomainError) as ex:
        raise ConfigError(str(ex)) from ex
    manifest.tolerances = {"E_abs": 1e-6 * args.tol_scale}
    t0 = time.time()
    result = {"case": case, "problem": {k: v for k, v in prob.__dict__.items() if k != "aleph_custom"},
              "bracket": [lo, hi]}
    code = 0
    try:
        if nE == 0:
            levels = [shoot_bound_state(prob, (lo, hi), channel=channel)]
        else:
            levels, scans = find_levels(prob, (lo, hi), nE)
            for ch, sc in scans.items():
                out.csv(f"scan_{ch}.csv", ["E", "defect"], sc)
    except (NoSignChange, StiffIntegration) as ex:
        print(f"FAIL radial: {type(ex).__name__}: {ex} (bracket [{lo}, {hi}])")
        result["error"] = {"type": type(ex).__name__, "message": str(ex), "bracket": [lo, hi]}
        out.json("spectrum.json", result)
        manifest.status = "fail"
        return 1
    result["levels"] = []
    for i, p in enumerate(levels):
        out.csv(f"profile_{i}.csv", ["r", "re_uL", "im_uL", "re_dL", "im_dL", "re_uR", "im_uR", "re_dR", "im_dR"],
                [[p.r[j]] + [f(c[j]) for c in (p.uL, p.dL, p.uR, p.dR) for f in (np.real, np.imag)]
                 for j in range(len(p.r))])
        meta = {k: v for k, v in p.meta.items()}
        result["levels"].append({"E": p.E, "profile": f"profile_{i}.csv", "meta": meta})
    if prob.aleph_mode == "off" and prob.Zalpha > 0 and case == "coulomb_Z0.5":
        exact = sommerfeld_level(1, -1, prob.Zalpha, prob.m)
        err = abs(levels[0].E - exact)
        result["analytic"] = {"E_exact": exact, "abs_error": err}
        ok = err <= 1e-6 * args.tol_scale * prob.m
        print(f"{'PASS' if ok else 'FAIL'} radial.coulomb_ground E = {levels[0].E:.10f} exact {exact:.10f} "
              f"error {err:.2e}")
        code = 0 if ok else 1
    if prob.aleph_mode != "off":
        # mesh self-check of the lowest level: pure mesh method (no step splitting) on three meshes
        conv = []
        E0 = levels[0].E if levels else None
        if E0 is not None:
            for nn in (100, 200, 400):
                pr = RadialProblem(**{**prob.__dict__, "n_nodes": nn, "adaptive": False})
                try:
                    conv.append({"n_nodes": nn, "E": shoot_bound_state(pr, (E0 - 5e-2, E0 + 5e-2), xtol=1e-14).E})
                except DiracGeomError as ex:
                    conv.append({"n_nodes": nn, "error": str(ex)})
            Es = [c.get("E") for c in conv]
            if all(e is not None for e in Es) and Es[1] != Es[2] and Es[0] != Es[1]:
                conv.append({"observed_order": float(np.log2(abs(Es[0] - Es[1]) / abs(Es[1] - Es[2])))})
        result["convergence"] = conv
        print(f"radial: {len(levels)} level(s) with the axial potential; convergence entries {len(conv)}")
    manifest.extra["solve_time"] = time.time() - t0
    out.json("spectrum.json", result)
    manifest.status = "ok" if code == 0 else "fail"
    return code


# ---------------------------------------------------------------- evolve

def cmd_evolve(args, cfg, manifest, out):
    from .evolve import Evolution1p1Config, Packet, run, to_csv
    sec = typed_section(cfg, "evolve", EVOLVE_KEYS)
    pk = Packet(**{k: sec.pop(k) for k in ("center", "width", "momentum", "amplitude") if k in sec})
    snap = int(sec.pop("snapshot_every", 0) or 0)
    compare = sec.pop("compare_linear", None)
    try:
        conf = Evolution1p1Config(initial=pk, **sec)
    except (TypeError, ValueError) as ex:
        raise ConfigError(str(ex)) from ex
    snaps = []
    res = run(conf, snapshot_every=snap, snapshots=snaps)
    out.csv_text("diagnostics.csv", to_csv(res.rows))
    for i, (t, psi) in enumerate(snaps):
        out.snapshot(f"snapshot_{i:04d}.npz", t=np.array(t), x=conf.grid(), psi=psi)
    summary = {"status": res.status, "stop_time": res.stop_time, "message": res.message,
               "steps_run": res.final.step}
    tot = res.column("total_j0")
    summary["j0_relative_drift"] = float(abs(tot[-1] - tot[0]) / tot[0])
    if not conf.nonlinear:
        ok = summary["j0_relative_drift"] <= 1e-8 * max(conf.steps, 1) / 1000 * args.tol_scale
        summary["conservation_within_tolerance"] = ok
        print(f"{'PASS' if ok else 'FAIL'} evolve.conservation drift {summary['j0_relative_drift']:.2e}")
    vacuum = conf.nonlinear and conf.R0 == 1.0 and conf.bump_height == 0 and conf.self_coupling == 0
    if vacuum or compare:
        lin = run(Evolution1p1Config(**{**conf.__dict__, "nonlinear": False}))
        same = bool(np.array_equal(lin.final.xi, res.final.xi))
        summary["identical_to_linear"] = same
        print(f"evolve: identical_to_linear = {same}")
    if conf.nonlinear and conf.bump_height:
        c = res.column("centroid")
        drift = float((c[-1] - c[0]) * np.sign(conf.bump_center - pk.center))
        summary["drift_toward_bump"] = drift
        print(f"evolve: centroid drift toward the high-R region {drift:+.4f} "
              f"({'toward' if drift > 0 else 'away'})")
    if res.status == "caustic":
        print(f"evolve: caustic at t = {res.stop_time:.6g}")
    out.json("evolve_summary.json", summary)
    manifest.status = res.status
    manifest.extra["stop_time"] = res.stop_time
    if not conf.nonlinear and not summary["conservation_within_tolerance"]:
        return 1
    return 0


# ---------------------------------------------------------------- tetrad

def cmd_tetrad(args, cfg, manifest, out):
    from .grid import Grid, rotation_coefficients, riemann, MIN_EXTENT
    sec = typed_section(cfg, "tetrad", {"field", "chart"})
    path = args.field or sec.get("field")
    if not path:
        raise ConfigError("tetrad needs a field file (--field or [tetrad] field =)")
    try:
        z = np.load(path)
    except (OSError, ValueError) as ex:
        raise ConfigError(f"cannot read field file {path}: {ex}") from ex
    psi = np.asarray(z["psi"], dtype=complex)
    if psi.ndim != 5 or psi.shape[-1] != 4:
        raise ConfigError("psi must have shape (n0, n1, n2, n3, 4)")
    dims = psi.shape[:4]
    spacing = tuple(z["spacing"]) if "spacing" in z else (1.0,) * 4
    origin = tuple(z["origin"]) if "origin" in z else (0.0,) * 4
    chart = sec.get("chart", "local")
    e = np.zeros(dims + (4, 4))
    idx = list(np.ndindex(*dims))
    flags = []
    for i in idx:
        t = tetrad_mod.tetrad_from_spinor(psi[i], chart=chart)
        e[i] = t.e
        flags.append(t.gauge_flag)
    einv = np.linalg.inv(e)
    g = np.einsum("...ma,ab,...nb->...mn", einv, np.diag([1.0, -1, -1, -1]), einv)
    out.csv("tetrad.csv", ["i0", "i1", "i2", "i3"] + [f"e{a}{m}" for a in range(4) for m in range(4)],
            [list(i) + list(e[i].ravel()) for i in idx])
    out.csv("metric.csv", ["i0", "i1", "i2", "i3"] + [f"g{m}{n}" for m in range(4) for n in range(4)],
            [list(i) + list(g[i].ravel()) for i in idx])
    summary = {"nodes": len(idx), "gauge_flags": {f: flags.count(f) for f in sorted(set(flags))}}
    grid = Grid(dims, spacing, origin)
    if all(d == 1 or d >= MIN_EXTENT for d in dims) and any(d > 1 for d in dims):
        om = rotation_coefficients(grid, e, g).omega
        cb = riemann(grid, g, e, om)
        out.csv("curvature.csv", ["i0", "i1", "i2", "i3", "scalar", "max_abs_riemann_tetrad"],
                [list(i) + [cb.scalar[i], float(np.abs(cb.riemann_tetrad[i]).max())] for i in idx])
        summary["curvature"] = "curvature.csv"
    else:
        summary["curvature"] = f"skipped: active axes need at least {MIN_EXTENT} nodes"
    out.json("tetrad_summary.json", summary)
    print(f"tetrad: {len(idx)} nodes written")
    return 0


# ---------------------------------------------------------------- main

def build_parser():
    p = argparse.ArgumentParser(prog="diracgeom", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, hlp in (("verify", "run identity verification suites"),
                      ("radial", "solve radial bound states"),
                      ("evolve", "run the 1+1D evolution demo"),
                      ("tetrad", "tetrad, metric and curvature dumps from a field file")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("--config", help="key-value config file")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--out", default="out", help="output directory")
        s.add_argument("--tol-scale", type=float, default=1.0, dest="tol_scale")
        if name == "radial":
            s.add_argument("--case", choices=sorted(RADIAL_CASES), help="bundled case (overrides config)")
        if name == "tetrad":
            s.add_argument("--field", help="npz file with psi[(n0, n1, n2, n3, 4)], spacing, origin")
    return p


COMMANDS = {"verify": cmd_verify, "radial": cmd_radial, "evolve": cmd_evolve, "tetrad": cmd_tetrad}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return 2 if ex.code else 0
    t0 = time.time()
    try:
        cfg = load_config(args.config)
        if args.command == "radial" and args.case:
            cfg.setdefault("radial", {})["case"] = args.case
        if args.tol_scale <= 0:
            raise ConfigError("--tol-scale must be positive")
        manifest = RunManifest(command=args.command, config_path=args.config, config=cfg, seed=args.seed)
        out = OutputDir(args.out, manifest)
        code = COMMANDS[args.command](args, cfg, manifest, out)
    except ConfigError as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return 2
    except DiracGeomError as ex:
        print(f"FAIL {args.command}: {type(ex).__name__}: {ex}", file=sys.stderr)
        return 1
    manifest.wall_time = time.time() - t0
    out.write_manifest()
    return code


if __name__ == "__main__":
    sys.exit(main())
