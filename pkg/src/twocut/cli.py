"""Command-line front end.

Commands: classify, boundary, endpoints, trace, constants, theta-scan,
predict, oracle, compare, figure.  Complex numbers serialize as
{"re": "...", "im": "..."} decimal strings so extended precision survives
the round trip; `predict --constants-file` re-ingests a `constants --json`
dump and reproduces downstream predictions bit-for-bit at fixed digits.

Exit codes: 0 success, 2 phase/precondition failure, 3 numerical
convergence failure, 4 cross-check failure.
"""

import argparse
import json
import sys

from mpmath import mp, mpf, mpc, nstr, workdps

from . import errors
from .precision import PrecisionContext
from .config import load_config
from .phase import PhaseDiagram
from .curve import (
    CutSystem,
    EndpointSet,
    solve_endpoints_two_cut,
    critical_graph,
    s_contour,
)
from .surface import SurfaceConstants, compute_constants
from .theta import ThetaEngine
from .predict import Predictor
from .oracle import moment_table, recurrence_from_moments
from .report import run_compare, emit_figure_data, build_pipeline


def _parse_t(spec):
    re_s, _, im_s = spec.partition(",")
    return mpc(mpf(re_s.strip()), mpf(im_s.strip() or "0"))


def _c(v, digits):
    with workdps(digits + 10):
        v = mpc(v)
        return {"re": nstr(v.real, digits + 10), "im": nstr(v.imag, digits + 10)}


def _c_load(obj):
    return mpc(mpf(obj["re"]), mpf(obj["im"]))


def _emit(data, out=None):
    text = json.dumps(data, indent=1)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# constants (de)serialization for the round-trip contract


def constants_to_json(sc, pack, digits):
    E = sc.endpoints
    d = {
        "digits": digits,
        "t": _c(E.t, digits),
        "endpoints": {k: _c(v, digits) for k, v in zip(("a1", "b1", "a2", "b2"), E.as_tuple())},
        "residual_inf_norm": nstr(E.residual_inf_norm, 8),
        "d0": _c(sc.d0, digits),
        "d1": _c(sc.d1, digits),
        "d2": _c(sc.d2, digits),
        "varsigma": _c(sc.varsigma, digits),
        "B": _c(sc.b_period, digits),
        "tau": nstr(sc.tau, digits + 10),
        "omega": nstr(sc.omega, digits + 10),
        "alpha_period": _c(sc.alpha_period, digits),
        "a_inf0": _c(sc.a_inf0, digits),
        "p": _c(sc.p, digits),
        "p_sheet_zero": sc.p_sheet_zero,
        "abel_p0": _c(sc.abel_p0, digits),
        "abel_p1": _c(sc.abel_p1, digits),
        "abel_branch": {k: _c(v, digits) for k, v in sc.abel_branch.items()},
        "far_radius": nstr(sc.far_radius, digits + 10),
        "lattice_tol": float(sc.lattice_tol),
    }
    if pack is not None:
        d["ell_star_direct"] = _c(pack.ell_star_direct, digits)
        d["ell_star_theta"] = _c(pack.ell_star_theta, digits)
        d["ell_star_cross_residual"] = nstr(pack.cross_residual, 8)
        d["D_inf"] = _c(pack.D_inf, digits)
        d["mu1"] = _c(pack.mu1, digits)
        d["D1"] = _c(pack.D1, digits)
    return d


def constants_from_json(d):
    digits = int(d["digits"])
    with workdps(digits):
        t = _c_load(d["t"])
        E = EndpointSet(
            a1=_c_load(d["endpoints"]["a1"]),
            b1=_c_load(d["endpoints"]["b1"]),
            a2=_c_load(d["endpoints"]["a2"]),
            b2=_c_load(d["endpoints"]["b2"]),
            t=t,
        )
        sc = SurfaceConstants(cuts=CutSystem(E))
        sc.d0, sc.d1, sc.d2 = _c_load(d["d0"]), _c_load(d["d1"]), _c_load(d["d2"])
        sc.varsigma = _c_load(d["varsigma"])
        sc.b_period = _c_load(d["B"])
        sc.tau = mpf(d["tau"])
        sc.omega = mpf(d["omega"])
        sc.alpha_period = _c_load(d["alpha_period"])
        sc.a_inf0 = _c_load(d["a_inf0"])
        sc.p = _c_load(d["p"])
        sc.p_sheet_zero = int(d["p_sheet_zero"])
        sc.abel_p0 = _c_load(d["abel_p0"])
        sc.abel_p1 = _c_load(d["abel_p1"])
        sc.abel_branch = {k: _c_load(v) for k, v in d["abel_branch"].items()}
        sc.far_radius = mpf(d["far_radius"])
        sc.lattice_tol = d["lattice_tol"]
        sc.working_digits = digits
        return sc, digits


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args, cfg):
    pd = PhaseDiagram(boundary_tol=cfg["precision.boundary_tol"])
    region = pd.classify(_parse_t(args.t))
    data = {"t": args.t, "kind": region.kind, "distance_to_boundary": nstr(region.distance_to_boundary, 10)}
    _emit(data, args.out)


def cmd_boundary(args, cfg):
    pd = PhaseDiagram()
    pd.ensure_radius(mpf(args.radius) / mpf("2.5"))
    import csv

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("curve_id", "re_t", "im_t"))
        for name, arc in pd.curves.all_curves():
            for v in arc.vertices:
                w.writerow((name, nstr(v.real, 17), nstr(v.imag, 17)))
    print(f"wrote {args.out}")


def cmd_endpoints(args, cfg):
    digits = args.digits or cfg["precision.surface_digits"]
    ctx = PrecisionContext(digits, mpf(10) ** (24 - digits))
    E = solve_endpoints_two_cut(_parse_t(args.t), ctx=ctx, with_jacobian=args.jacobian)
    data = {
        "t": args.t,
        "endpoints": {k: _c(v, digits) for k, v in zip(("a1", "b1", "a2", "b2"), E.as_tuple())},
        "residual_inf_norm": nstr(E.residual_inf_norm, 8),
    }
    if args.jacobian:
        data["jacobian_det"] = nstr(E.jacobian_det, 12)
    _emit(data, args.out)


def cmd_trace(args, cfg):
    import csv

    ctx = PrecisionContext(cfg["precision.surface_digits"], 1e-40)
    t = _parse_t(args.t)
    cs = s_contour(t, ctx=ctx)
    E = cs.endpoints
    short, unbounded, _ = critical_graph(E)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("arc_id", "kind", "re", "im"))
        for (la, lb), arc in sorted(short.items()):
            for v in arc.vertices:
                w.writerow((f"{la}-{lb}", "traj", nstr(v.real, 17), nstr(v.imag, 17)))
        for i, (lab, ang, arc) in enumerate(unbounded):
            for v in arc.vertices:
                w.writerow((f"unb-{lab}-{i}", "traj", nstr(v.real, 17), nstr(v.imag, 17)))
        for v in cs.i_arc.vertices:
            w.writerow(("i_arc", "cut", nstr(v.real, 17), nstr(v.imag, 17)))
        for v in cs.gamma.vertices:
            w.writerow(("gamma", "contour", nstr(v.real, 17), nstr(v.imag, 17)))
    print(f"wrote {args.out}")


def cmd_constants(args, cfg):
    digits = args.digits or cfg["precision.surface_digits"]
    ctx = PrecisionContext(digits, mpf(10) ** (24 - digits))
    pred = build_pipeline(
        _parse_t(args.t), ctx=ctx, cross_tol=cfg["precision.cross_tol"],
        check_phase=not args.skip_phase_check,
    )
    data = constants_to_json(pred.sc, pred.pack, digits)
    with ctx.workdps():
        resid = pred.sc.lattice_distance(
            pred.sc.varsigma + pred.sc.omega + pred.sc.b_period * pred.sc.tau - 2 * pred.sc.a_inf0
        )
        data["residue_identity_residual"] = nstr(resid, 8)
        data["im_tau"] = nstr(mpc(pred.sc.tau).imag, 5)
    _emit(data, args.out)


def cmd_theta_scan(args, cfg):
    digits = cfg["precision.surface_digits"]
    ctx = PrecisionContext(digits, mpf(10) ** (24 - digits))
    pred = build_pipeline(_parse_t(args.t), ctx=ctx, eps=args.eps, check_phase=False)
    rows = []
    for n in range(1, args.n_max + 1):
        N_n = n + args.offset
        td = pred.engine.normalized_ratios(n, N_n, eps=args.eps, allow_degenerate=True)
        rows.append(
            {
                "n": n,
                "N_n": N_n,
                "degenerate": td.degenerate,
                "theta_star_inf": _c(td.theta_star_inf, 20),
                "theta_tilde_inf": _c(td.theta_tilde_inf, 20),
            }
        )
    _emit({"t": args.t, "eps": args.eps, "rows": rows}, args.out)


def cmd_predict(args, cfg):
    if args.constants_file:
        with open(args.constants_file, "r", encoding="utf-8") as fh:
            sc, digits = constants_from_json(json.load(fh))
        ctx = PrecisionContext(digits, mpf(10) ** (24 - digits))
        pred = Predictor(sc, ctx, cross_tol=cfg["precision.cross_tol"])
    else:
        digits = args.digits or cfg["precision.surface_digits"]
        ctx = PrecisionContext(digits, mpf(10) ** (24 - digits))
        pred = build_pipeline(_parse_t(args.t), ctx=ctx, check_phase=False)
        digits = ctx.working_digits
    N_n = args.Nn if args.Nn is not None else args.n
    p = pred.prediction(args.n, N_n)
    data = {
        "n": p.n,
        "N_n": p.N_n,
        "degenerate": p.degenerate,
        "h_n": _c(p.h_n, digits),
        "gamma2_n": _c(p.gamma2_n, digits),
        "gamma2_alt": _c(p.gamma2_alt, digits),
        "beta_n": _c(p.beta_n, digits),
        "beta_conditioning": p.beta_conditioning,
        "S1": _c(p.S1, digits),
        "S2": _c(p.S2, digits),
        "theta_star_inf": _c(p.theta_star_inf, digits),
        "theta_tilde_inf": _c(p.theta_tilde_inf, digits),
    }
    _emit(data, args.out)


def cmd_oracle(args, cfg):
    digits = args.digits or cfg["precision.oracle_digits"]
    t = _parse_t(args.t)
    table = moment_table(t, args.N, 2 * (args.n_max + 2) + 2, digits)
    res = recurrence_from_moments(table, args.n_max + 1)
    with workdps(digits):
        rows = []
        for n in range(args.n_max + 1):
            from mpmath import log as mlog

            h = res.h[n]
            rows.append(
                {
                    "n": n,
                    "h": _c(h, 30),
                    "h_log_abs": nstr(mlog(abs(h)), 20),
                    "gamma2": _c(res.gamma2[n], 30) if n >= 1 else None,
                    "beta": _c(res.beta[n], 30),
                }
            )
    _emit({"t": args.t, "N": args.N, "digits": digits, "rows": rows}, args.out)


def cmd_compare(args, cfg):
    digits = args.digits or cfg["precision.oracle_digits"]
    ctx = PrecisionContext(cfg["precision.surface_digits"], 1e-40)
    rule = "equal" if args.offset == 0 else f"offset:{args.offset}"

    def progress(row):
        print(
            f"n={row.n:3d} degen={row.degenerate} h_err={row.h_rel_err} "
            f"g2_err={row.gamma2_rel_err}",
            file=sys.stderr,
        )

    report = run_compare(
        _parse_t(args.t),
        n_min=args.n_min,
        n_max=args.n_max,
        N_rule=rule,
        digits=digits,
        ctx=ctx,
        progress=progress if args.verbose else None,
    )
    report.to_json(args.out + ".json")
    report.to_csv(args.out + ".csv")
    print(f"wrote {args.out}.json / .csv; trends: {report.trend}")


def cmd_figure(args, cfg):
    t = _parse_t(args.t) if args.t else None
    emit_figure_data(args.kind, args.out, t=t)
    print(f"wrote {args.out}")


def build_parser():
    ap = argparse.ArgumentParser(prog="twocut", description=__doc__)
    ap.add_argument("--config", help="config file (or set TWOCUT_CONFIG)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="phase classification of t")
    p.add_argument("--t", required=True, help="complex t as re,im")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("boundary", help="export phase-boundary curves")
    p.add_argument("--out", required=True)
    p.add_argument("--radius", default="30")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("endpoints", help="two-cut branch points at t")
    p.add_argument("--t", required=True)
    p.add_argument("--digits", type=int)
    p.add_argument("--jacobian", action="store_true")
    p.add_argument("--json", dest="out_json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_endpoints)

    p = sub.add_parser("trace", help="critical graph and S-contour CSV")
    p.add_argument("--t", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("constants", help="surface constants (JSON)")
    p.add_argument("--t", required=True)
    p.add_argument("--digits", type=int)
    p.add_argument("--json", dest="out_json", action="store_true")
    p.add_argument("--skip-phase-check", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("theta-scan", help="degeneracy flags and ratio values per n")
    p.add_argument("--t", required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--json", dest="out_json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_theta_scan)

    p = sub.add_parser("predict", help="asymptotic predictions for one index")
    p.add_argument("--t")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--Nn", type=int)
    p.add_argument("--digits", type=int)
    p.add_argument("--constants-file", help="reuse a constants --json dump")
    p.add_argument("--json", dest="out_json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("oracle", help="moment-based ground truth")
    p.add_argument("--t", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--digits", type=int)
    p.add_argument("--json", dest="out_json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("compare", help="predictions vs oracle over an index range")
    p.add_argument("--t", required=True)
    p.add_argument("--n-min", type=int, default=10)
    p.add_argument("--n-max", type=int, default=30)
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--digits", type=int)
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("figure", help="CSV data behind the standard figures")
    p.add_argument("--kind", required=True, choices=["phase_diagram", "critical_graph", "density", "contour"])
    p.add_argument("--t")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_figure)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    cfg = load_config(args.config)
    try:
        args.func(args, cfg)
    except errors.PhaseError as exc:
        print(f"phase error: {exc}", file=sys.stderr)
        return 2
    except errors.ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return 3
    except errors.CrossCheckError as exc:
        print(f"cross-check error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
