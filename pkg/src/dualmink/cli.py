"""Command-line entry point: ``dualmink {measure,solve,probe,verify,scan}``.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 invariant
violation (non-positive data, non-convex or invalid body), 4 solver did not
converge.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import estimates as est
from .bodies import (
    AsymmetricBodyError,
    Ellipsoid,
    NonConvexError,
    OriginNotInteriorError,
    Polytope,
    SupportBody,
)
from .io import InputError, dump_json, load_body, load_problem, write_field_csv, write_json
from .measures import body_density, polytope_cone_volume, radial_total_mc
from .solver import (
    NonConvergenceError,
    ResonanceError,
    SolverConfig,
    solve,
    solve_curve,
    uniqueness_probe,
)
from .sphere import build_grid

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_INVARIANT, EXIT_NONCONV = 0, 1, 2, 3, 4

log = logging.getLogger("dualmink")


# -- verification suites -------------------------------------------------------


def _suite_lemma43(args):
    return [est.singular_axis_integral(n, s) for n in (3, 2) for s in (0.25, 0.5, 0.75)]


def _suite_claim41(args):
    return [est.check_power_diff(1.0, [0.1, 0.01, 0.001]), est.check_power_diff(1.0, [-0.1, -0.01, -0.001])]


def _suite_lemma42(args):
    out = []
    for name in ("ball_1", "ellipsoid_1_1_2", "cube"):
        body = est.body_zoo()[name]
        eta, _, _ = est.admissible_eta(body)
        for p, q in ((0.0, 3.0), (0.5, 2.5), (-0.5, 2.0)):
            rep = est.check_total_lower_bound(body, p, q, 0.99 * eta)
            rep.metadata["body"] = name
            out.append(rep)
    return out


def _suite_claim61(args):
    out = []
    for name, body in est.body_zoo().items():
        for g in (0.5, 1.0, 2.0):
            rep = est.hmax_sandwich(body, g)
            rep.metadata["body"] = name
            out.append(rep)
    return out


def _suite_lemma62(args):
    out = []
    for name, body in est.body_zoo().items():
        if isinstance(body, Ellipsoid):
            rep = est.ellipsoid_moments(body, 0.5, family=None, decay_check=False)
            rep.metadata["body"] = name
            out.append(rep)
    out.append(est.ellipsoid_moments(Ellipsoid([1.0, 1.0, 8.0]), 0.5))
    return out


def _suite_prop51(args):
    Rs = [2.0, 4.0, 8.0, 16.0]
    return [
        est.family_scan("ellipsoid", Rs, 0.5, 3.0),
        est.family_scan("ellipsoid", Rs, 0.5, 2.9),
        est.family_scan("ball", [0.5, 1.0, 2.0], 0.5, 3.0),
        est.family_scan("box", [1.0, 2.0, 4.0], 0.0, 3.0, seed=args.seed),
    ]


def _suite_identities(args):
    return [est.measure_identities(mc_samples=args.mc_samples, seed=args.seed)]


def _suite_lemma71(args):
    return [est.weak_convergence()]


SUITES = {
    "lemma43": _suite_lemma43,
    "claim41": _suite_claim41,
    "lemma42": _suite_lemma42,
    "claim61": _suite_claim61,
    "lemma62": _suite_lemma62,
    "prop51": _suite_prop51,
    "identities": _suite_identities,
    "lemma71": _suite_lemma71,
}


# -- commands -----------------------------------------------------------------


def _grid_for(n, L):
    return build_grid(n, L) if L else build_grid(n, 64 if n == 3 else 1024)


def cmd_measure(args):
    body = load_body(args.body)
    n, p, q = body.n, args.p, args.q
    if isinstance(body, Polytope):
        if p == 0 and q == n:
            tot = n * polytope_cone_volume(body).total()
        else:
            tot = radial_total_mc(body, p, q, args.mc_samples, args.seed)[0]
        nvk = abs(n * polytope_cone_volume(body).total() - n * body.volume()) / (n * body.volume())
        scaled = body.scaled(2.0)
        if p == 0 and q == n:
            tot2 = n * polytope_cone_volume(scaled).total()
        else:
            tot2 = radial_total_mc(scaled, p, q, args.mc_samples, args.seed)[0]
        scaling = abs(tot2 - 2.0 ** (q - p) * tot) / (2.0 ** (q - p) * tot)
        out = {"total": tot, "min_density": None, "max_density": None,
               "identities": {"nVk_check": nvk, "scaling_check": scaling}}
    else:
        grid = body.grid if isinstance(body, SupportBody) else _grid_for(n, args.L)
        dens = body_density(body, grid, p, q)
        base = body_density(body, grid, 0.0, n).total()
        nvk = abs(base - n * body.volume()) / (n * body.volume())
        d2 = body_density(body.scaled(2.0), grid, p, q).values
        scaling = float(np.max(np.abs(d2 - 2.0 ** (q - p) * dens.values) / (2.0 ** (q - p) * dens.values)))
        out = {"total": dens.total(), "min_density": float(dens.values.min()),
               "max_density": float(dens.values.max()),
               "identities": {"nVk_check": nvk, "scaling_check": scaling}}
        if args.dump:
            write_field_csv(args.dump, grid.nodes, dens.values, "density")
    _emit(args, out)
    return EXIT_OK


def _config(args):
    return SolverConfig(tol_residual=args.tol, max_iter=args.max_iter)


def cmd_solve(args):
    spec = load_problem(args.problem)
    config = _config(args)
    if args.curve:
        sol = solve_curve(spec, config, M=args.L or 512)
    else:
        sol = solve(spec, _grid_for(spec.n, args.L) if args.L else None, config)
    out = {"problem": {"n": spec.n, "p": spec.p, "q": spec.q}, **sol.summary(),
           "u_min": float(sol.u.values.min()), "u_max": float(sol.u.values.max())}
    _emit(args, out)
    if args.field:
        write_field_csv(args.field, sol.u.grid.nodes, sol.u.values, "u")
    return EXIT_OK if sol.converged else EXIT_NONCONV


def cmd_probe(args):
    spec = load_problem(args.problem)
    grid = build_grid(spec.n, args.L) if args.L else None
    res = uniqueness_probe(spec, grid, _config(args), num_starts=args.starts, seed=args.seed,
                           perturb_scale=args.perturb_scale, even=args.even)
    _emit(args, res)
    return EXIT_OK if res["converged"] == args.starts else EXIT_NONCONV


def _print_table(reports, stream):
    for rep in reports:
        bad = sum(not r.passed for r in rep.rows)
        tag = "PASS" if rep.passed else "FAIL"
        label = rep.name + (f"[{rep.metadata['body']}]" if "body" in rep.metadata else "")
        print(f"{tag}  {label:<32} rows={len(rep.rows):<3} failed={bad}", file=stream)
        for r in rep.rows:
            if not r.passed:
                print(f"      {r.params}: {r.lhs:.6g} {r.relation} {r.rhs}", file=stream)


def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    reports = [rep for name in names for rep in SUITES[name](args)]
    _print_table(reports, sys.stderr if args.out is None else sys.stdout)
    out = {"passed": all(r.passed for r in reports), "suites": names,
           "reports": [r.to_dict() for r in reports]}
    _emit(args, out)
    if args.csv:
        Path(args.csv).write_text("".join(
            r.to_csv() if i == 0 else r.to_csv().split("\n", 1)[1] for i, r in enumerate(reports)
        ), encoding="utf-8")
    return EXIT_OK if out["passed"] else EXIT_VERIFY


def cmd_scan(args):
    params = [float(x) for x in args.params.split(",")]
    rep = est.family_scan(args.family, params, args.p, args.q, n=args.n, seed=args.seed)
    _emit(args, rep.to_dict())
    return EXIT_OK if rep.passed else EXIT_VERIFY


def _emit(args, obj):
    if args.out:
        write_json(args.out, obj)
    else:
        sys.stdout.write(dump_json(obj))


# -- parser -------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="dualmink", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-o", "--out", help="write JSON here instead of stdout")
        p.add_argument("--L", type=int, default=None, help="grid resolution")

    def solver_flags(p):
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--max-iter", type=int, default=100)

    m = sub.add_parser("measure", help="dual curvature measure of a body")
    m.add_argument("body")
    m.add_argument("--p", type=float, default=0.0)
    m.add_argument("--q", type=float, default=None, help="defaults to n")
    m.add_argument("--mc-samples", type=int, default=1_000_000)
    m.add_argument("--dump", help="density CSV dump")
    common(m)
    m.set_defaults(func=cmd_measure)

    s = sub.add_parser("solve", help="solve for the support function")
    s.add_argument("problem")
    s.add_argument("--field", help="solution CSV dump")
    s.add_argument("--curve", action="store_true", help="use the n=2 finite-difference solver")
    common(s)
    solver_flags(s)
    s.set_defaults(func=cmd_solve)

    pr = sub.add_parser("probe", help="multi-start uniqueness probe")
    pr.add_argument("problem")
    pr.add_argument("--starts", type=int, default=10)
    pr.add_argument("--perturb-scale", type=float, default=0.2)
    pr.add_argument("--even", action="store_true")
    common(pr)
    solver_flags(pr)
    pr.set_defaults(func=cmd_probe)

    v = sub.add_parser("verify", help="run estimate and identity suites")
    v.add_argument("--suite", choices=["all", *SUITES], default="all")
    v.add_argument("--mc-samples", type=int, default=1_000_000)
    v.add_argument("--csv", help="also write report rows as CSV")
    common(v)
    v.set_defaults(func=cmd_verify)

    sc = sub.add_parser("scan", help="family scan of density range and John ellipsoids")
    sc.add_argument("family", choices=["ball", "ellipsoid", "box", "random_polytope"])
    sc.add_argument("--params", required=True, help="comma-separated family parameters")
    sc.add_argument("--p", type=float, default=0.5)
    sc.add_argument("--q", type=float, default=3.0)
    sc.add_argument("--n", type=int, default=3)
    common(sc)
    sc.set_defaults(func=cmd_scan)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "measure" and args.q is None:
            args.q = float(load_body(args.body).n)
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonConvergenceError as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except (NonConvexError, OriginNotInteriorError, AsymmetricBodyError, ResonanceError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        # data-level violations (non-positive f, degenerate bodies) surface as ValueError
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
