"""Command-line interface.

Subcommands: constants, lambda-star, eigen, solve, green, transform-check,
pohozaev, sweep.  Outputs are deterministic for a fixed configuration
(worker results are assembled in index order; no randomness anywhere in the
pipeline).  Exit codes: 0 success, 1 usage error, 2 certification failure.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import reporting
from .constants import (hls_constant, lambda_bar, pk_symbol, sobolev_constant,
                        underline_lambda, DimensionOutOfRange)
from .geometry import GeodesicBall, ProblemDims
from .reporting import report_document


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hyperbn",
        description="Thresholds, kernels and radial solvers for higher-order "
                    "Brezis-Nirenberg problems on hyperbolic space.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, ball=True, lam=False):
        sp.add_argument("--n", type=int, default=5, help="spatial dimension")
        sp.add_argument("--k", type=int, default=2, help="operator order")
        if ball:
            sp.add_argument("--R", type=float, default=0.5,
                            help="Euclidean ball-model radius (0 < R < 1)")
        if lam:
            sp.add_argument("--lambda", dest="lam", type=float, required=True,
                            help="equation parameter")
        sp.add_argument("--grid", type=int, default=1000,
                        help="discretization size (default 1000)")
        sp.add_argument("--tol", type=float, default=1e-8,
                        help="tolerance (default 1e-8)")
        sp.add_argument("--out", type=str, default="-",
                        help="output path ('-' = stdout)")
        sp.add_argument("--format", choices=("json", "csv", "tsv"),
                        default="json")

    sp = sub.add_parser("constants", help="spectral bottom, Sobolev and HLS "
                                          "constants, whole-space thresholds")
    common(sp, ball=False)

    sp = sub.add_parser("lambda-star", help="k=2 threshold on a geodesic ball")
    common(sp)
    sp.add_argument("--method", choices=("determinant", "quotient", "both"),
                    default="both")

    sp = sub.add_parser("eigen", help="first Dirichlet eigenvalues of P1, P2")
    common(sp)

    sp = sub.add_parser("solve", help="certified radial solution at lambda")
    common(sp, lam=True)

    sp = sub.add_parser("green", help="build and certify a resolvent kernel")
    common(sp, ball=False, lam=True)
    sp.add_argument("--rho-max", type=float, default=8.0)

    sp = sub.add_parser("transform-check", help="radial transform self-tests")
    common(sp, ball=False)
    sp.add_argument("--tau-max", type=float, default=40.0)

    sp = sub.add_parser("pohozaev", help="solve and report identity residuals; "
                                         "nonexistence scan for lambda < 0")
    common(sp, lam=True)

    sp = sub.add_parser("sweep", help="lambda sweep of the solver")
    common(sp)
    sp.add_argument("--lambda-from", dest="lam_from", type=float, required=True)
    sp.add_argument("--lambda-to", dest="lam_to", type=float, required=True)
    sp.add_argument("--steps", type=int, default=20)
    sp.add_argument("--parallel", type=int, default=1)
    return p


def _emit(args, doc, rows=None) -> None:
    if args.format == "json":
        if args.out == "-":
            import json
            print(json.dumps(doc, indent=2, sort_keys=True))
        else:
            reporting.emit_json(doc, args.out)
    else:
        table = rows if rows is not None else doc.get("results", [])
        if args.out == "-":
            import io
            import tempfile
            with tempfile.NamedTemporaryFile("r+", suffix=".txt") as fh:
                reporting.emit_table(table, fh.name,
                                     "," if args.format == "csv" else "\t")
                fh.seek(0)
                sys.stdout.write(fh.read())
        else:
            reporting.emit_table(table, args.out,
                                 "," if args.format == "csv" else "\t")


def _cmd_constants(args) -> int:
    dims = ProblemDims(args.n, args.k)
    results = [lambda_bar(args.k).to_dict(), sobolev_constant(dims).to_dict()]
    hls_rows = []
    for lam_exp in (0.5, 1.0, 2.0, args.n - 2 * args.k):
        if 0 < lam_exp < args.n:
            hls_rows.append(hls_constant(args.n, float(lam_exp)).to_dict())
    results.extend(hls_rows)
    results.append({"name": "pk_symbol_at_zero", "value": pk_symbol(0.0, args.k)})
    diagnostics = []
    try:
        results.append(underline_lambda(dims).to_dict())
    except DimensionOutOfRange as exc:
        diagnostics.append({"underline_lambda": str(exc)})
    doc = report_document("constants", {"n": args.n, "k": args.k},
                          results, diagnostics)
    _emit(args, doc)
    return 0


def _cmd_lambda_star(args) -> int:
    from .eigen import first_eigenvalue_P2
    from .thresholds import find_lambda_star, lambda_star_quotient

    dims = ProblemDims(args.n, 2)
    ball = GeodesicBall(args.R)
    eig = first_eigenvalue_P2(dims, ball, max(args.grid // 2, 200))
    results = [{"name": "lambda1_P2", "value": eig.value,
                "diagnostics": eig.diagnostics}]
    det = quo = None
    if args.method in ("determinant", "both"):
        det = find_lambda_star(dims, ball, eig.value)
        results.append(det.to_dict())
    if args.method in ("quotient", "both"):
        quo = lambda_star_quotient(dims, ball, max(args.grid, 500))
        d = quo.to_dict()
        d["diagnostics"].pop("profile", None)
        results.append(d)
    if det is not None and quo is not None:
        gap = abs(det.lambda_star - quo.lambda_star) / det.lambda_star
        results.append({"name": "cross_check_gap", "value": gap})
    doc = report_document("lambda-star",
                          {"n": args.n, "R": args.R, "method": args.method,
                           "grid": args.grid}, results,
                          timings={"eigen_grid": eig.grid_size})
    _emit(args, doc)
    return 0


def _cmd_eigen(args) -> int:
    from .eigen import first_eigenvalue_P1, first_eigenvalue_P2

    dims = ProblemDims(args.n, args.k)
    ball = GeodesicBall(args.R)
    r1 = first_eigenvalue_P1(dims, ball, max(args.grid, 100))
    results = [{"name": "lambda1_P1", **r1.to_dict()}]
    if args.k >= 2:
        r2 = first_eigenvalue_P2(dims, ball, max(args.grid, 200))
        results.append({"name": "lambda1_P2", **r2.to_dict()})
    doc = report_document("eigen", {"n": args.n, "k": args.k, "R": args.R,
                                    "grid": args.grid}, results)
    _emit(args, doc)
    return 0


def _solve_row(lam: float, n: int, k: int, R: float, warm=None) -> dict:
    from . import bnsolver as bn

    dims = ProblemDims(n, k)
    ball = GeodesicBall(R)
    try:
        sol = bn.solve_bn(lam, dims, ball, warm_start=warm)
    except (bn.NotFound, bn.BlowUp) as exc:
        return {"lambda": lam, "found": False, "error": str(exc)[:160]}
    row = {"lambda": lam, "found": True,
           "v0": float(sol.trajectory.states[0, 0]),
           "boundary_residual": sol.boundary_residual,
           "nehari_gap": bn.nehari_residual(sol),
           "nehari_level": bn.nehari_level(sol),
           "shoot_a": sol.shoot_params[0],
           "shoot_b": sol.shoot_params[1] if len(sol.shoot_params) > 1 else 0.0}
    if k == 2:
        row["pohozaev_gap"] = bn.pohozaev_residual(sol)
    return row


def _cmd_solve(args) -> int:
    row = _solve_row(args.lam, args.n, args.k, args.R)
    doc = report_document("solve", {"n": args.n, "k": args.k, "R": args.R,
                                    "lambda": args.lam}, [row])
    _emit(args, doc, rows=[row])
    return 0 if row.get("found") else 2


def _cmd_green(args) -> int:
    from .greens import (certify_kernel, p1_inverse_closed,
                         resolvent_kernel_P1, resolvent_kernel_Pk)

    dims = ProblemDims(args.n, args.k)
    if args.k == 1:
        rho = np.geomspace(1e-2, args.rho_max, 161)
        kern = resolvent_kernel_P1(args.lam, dims, rho)
    else:
        kern = resolvent_kernel_Pk(args.lam, dims)
    cert = certify_kernel(kern)
    results = [{"name": "kernel", "lambda": args.lam,
                "construction": kern.construction.value,
                "certificate": cert.to_dict()}]
    if args.k == 1 and args.lam == 0.0:
        ref = [p1_inverse_closed(r, dims) for r in kern.profile.grid]
        gap = float(np.max(np.abs(kern.profile.values / np.array(ref) - 1.0)))
        results.append({"name": "closed_form_gap", "value": gap})
    rows = [{"rho": float(r), "G": float(g)}
            for r, g in zip(kern.profile.grid, kern.profile.values)]
    doc = report_document("green", {"n": args.n, "k": args.k,
                                    "lambda": args.lam}, results)
    if args.format == "json":
        doc["results"].append({"name": "profile", "rows": rows})
        _emit(args, doc)
    else:
        _emit(args, doc, rows=rows)
    return 0 if cert.passed else 2


def _cmd_transform_check(args) -> int:
    from .geometry import RadialProfile
    from .helgason import TransformGrid, plancherel_check, radial_inverse, radial_transform

    dims = ProblemDims(args.n, args.k)
    grid = TransformGrid.uniform(args.tau_max, 801)
    rho = np.linspace(1e-4, 10.0, 1401)
    prof = RadialProfile(rho, np.exp(-rho ** 2), dims)
    fhat = radial_transform(prof, grid)
    rho_eval = np.linspace(0.05, 3.0, 40)
    back = radial_inverse(fhat, grid, rho_eval, dims)
    ref = np.exp(-rho_eval ** 2)
    rt_err = float(np.sqrt(np.mean((back.values - ref) ** 2) / np.mean(ref ** 2)))
    lhs, rhs, gap = plancherel_check(prof, grid)
    results = [{"name": "roundtrip_l2_rel", "value": rt_err},
               {"name": "plancherel", "lhs": lhs, "rhs": rhs, "gap": gap}]
    doc = report_document("transform-check",
                          {"n": args.n, "tau_max": args.tau_max}, results)
    _emit(args, doc)
    return 0 if rt_err < 1e-4 and gap < 1e-3 else 2


def _cmd_pohozaev(args) -> int:
    from . import bnsolver as bn

    dims = ProblemDims(args.n, args.k)
    ball = GeodesicBall(args.R)
    if args.lam < 0:
        rep = bn.nonexistence_scan(args.lam, dims, ball)
        doc = report_document("pohozaev", {"n": args.n, "k": args.k,
                                           "R": args.R, "lambda": args.lam},
                              [rep.to_dict()])
        _emit(args, doc)
        return 0 if rep.n_certified == 0 else 2
    row = _solve_row(args.lam, args.n, args.k, args.R)
    doc = report_document("pohozaev", {"n": args.n, "k": args.k, "R": args.R,
                                       "lambda": args.lam}, [row])
    _emit(args, doc, rows=[row])
    return 0 if row.get("found") else 2


def _sweep_worker(payload):
    idx, lam, n, k, R = payload
    return idx, _solve_row(lam, n, k, R)


def _cmd_sweep(args) -> int:
    lams = np.linspace(args.lam_from, args.lam_to, args.steps)
    payloads = [(i, float(lam), args.n, args.k, args.R)
                for i, lam in enumerate(lams)]
    rows: list = [None] * len(payloads)
    if args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            for idx, row in pool.map(_sweep_worker, payloads):
                rows[idx] = row
    else:
        warm = None
        for payload in payloads:
            idx, row = _sweep_worker(payload)
            rows[idx] = row
    doc = report_document("sweep",
                          {"n": args.n, "k": args.k, "R": args.R,
                           "from": args.lam_from, "to": args.lam_to,
                           "steps": args.steps, "parallel": args.parallel},
                          rows, timings={"points": len(rows)})
    _emit(args, doc, rows=rows)
    return 0


_COMMANDS = {
    "constants": _cmd_constants,
    "lambda-star": _cmd_lambda_star,
    "eigen": _cmd_eigen,
    "solve": _cmd_solve,
    "green": _cmd_green,
    "transform-check": _cmd_transform_check,
    "pohozaev": _cmd_pohozaev,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if getattr(args, "tol", 1e-8) <= 0:
            raise ValueError("tol must be positive")
        if getattr(args, "grid", 1000) < 100:
            raise ValueError("grid must be >= 100")
        return _COMMANDS[args.command](args)
    except (ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
