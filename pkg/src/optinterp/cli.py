"""Command-line front end.

Subcommands: optimize, evaluate, mesh-info, fit, compare, export, campaign.
Progress goes to stderr; parseable data to stdout or --out files.  Exit
codes: 0 success, 1 usage error, 2 computation failure.
"""

import argparse
import json
import sys

import numpy as np

from .analysis import fit_ball_growth, fit_cube_growth, matched_pairs, setdistance
from .campaign import run_campaign
from .domains import Domain
from .io import (
    ResultFileError,
    export_mesh_csv,
    export_points,
    load_point_set,
    load_result,
    save_result,
    _atomic_write_text,
    _fmt,
)
from .lebesgue import lebesgue_constant
from .meshes import mesh_for
from .optimizer import OptimConfig, optimize, resume


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract reserves 2 for
    # computation failures and 1 for usage problems
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _progress(line):
    print(line, file=sys.stderr, flush=True)


def _emit(data, out=None):
    text = json.dumps(data, indent=1)
    if out:
        _atomic_write_text(out, text + "\n")
    else:
        print(text)


def _add_domain_flags(p):
    p.add_argument("--domain", choices=("cube", "ball"), required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--degree", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="optinterp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="minimise the Lebesgue constant")
    _add_domain_flags(p)
    p.add_argument("--starts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--refine-tol", type=float, default=1e-3)
    p.add_argument("--mesh-cap", type=int, default=129)
    p.add_argument("--max-mesh-points", type=int, default=300_000)
    p.add_argument("--resume", metavar="FILE", help="continue from a stored result")
    p.add_argument("--out", metavar="FILE", help="result file path")

    p = sub.add_parser("evaluate", help="Lebesgue constant of stored points on a mesh")
    p.add_argument("points_file")
    p.add_argument("--mesh-m", type=int, required=True)
    p.add_argument("--domain", choices=("cube", "ball"))
    p.add_argument("--dim", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--dump-csv", metavar="FILE", help="per-mesh-point Lebesgue values")

    p = sub.add_parser("mesh-info", help="cardinality and constant of a mesh")
    _add_domain_flags(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", metavar="FILE", help="write mesh points as CSV")

    p = sub.add_parser("fit", help="growth-law fit over stored results")
    p.add_argument("result_files", nargs="+")
    p.add_argument("--no-constant", action="store_true", help="pure-power ball fit")
    p.add_argument("--out", metavar="FILE", help="fit JSON path")
    p.add_argument("--csv", metavar="FILE", help="(n, lambda, model) table")

    p = sub.add_parser("compare", help="symmetry-aware distance of two point sets")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--procrustes", action="store_true")
    p.add_argument("--pairs-csv", metavar="FILE", help="aligned pairing table")
    p.add_argument("--domain", choices=("cube", "ball"))
    p.add_argument("--dim", type=int)
    p.add_argument("--degree", type=int)

    p = sub.add_parser("export", help="dump the points of a result file")
    p.add_argument("result_file")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", required=True)
    p.add_argument("--proj", type=int, nargs=2, metavar=("I", "J"),
                   help="1-based coordinate pair for a 2D projection")

    p = sub.add_parser("campaign", help="run a grid of optimisations")
    p.add_argument("campaign_file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1)
    return parser


def _cmd_optimize(args):
    if args.resume:
        result = resume(
            args.resume,
            progress=_progress,
            mesh_cap=args.mesh_cap,
            refine_tol=args.refine_tol,
            max_mesh_points=args.max_mesh_points,
        )
    else:
        cfg = OptimConfig(
            degree=args.degree,
            dim=args.dim,
            domain=Domain(args.domain, args.dim),
            starts=args.starts,
            seed=args.seed,
            refine_tol=args.refine_tol,
            mesh_cap=args.mesh_cap,
            max_mesh_points=args.max_mesh_points,
        )
        result = optimize(cfg, progress=_progress)
    if args.out:
        save_result(result, args.out)
        _progress(f"wrote {args.out}")
    else:
        from .io import result_to_dict

        print(json.dumps(result_to_dict(result), indent=1))
    return 0


def _load_ps(path, args):
    try:
        return load_point_set(path, degree=args.degree, dim=args.dim,
                              domain_kind=args.domain)
    except ResultFileError as exc:
        raise UsageError(str(exc))


def _cmd_evaluate(args):
    ps = _load_ps(args.points_file, args)
    mesh = mesh_for(ps.domain, ps.space.degree, args.mesh_m)
    report = lebesgue_constant(ps, mesh, keep_per_point=bool(args.dump_csv))
    if args.dump_csv:
        lines = [",".join([f"x{i+1}" for i in range(ps.domain.dim)] + ["lebesgue"])]
        for pt, val in zip(mesh.points, report.per_point):
            lines.append(",".join([_fmt(v) for v in pt] + [_fmt(val)]))
        _atomic_write_text(args.dump_csv, "\n".join(lines) + "\n")
    _emit({
        "lambda": report.value,
        "argmax": report.argmax.tolist(),
        "mesh_m": report.mesh_m,
        "mesh_size": report.mesh_size,
    })
    return 0


def _cmd_mesh_info(args):
    mesh = mesh_for(Domain(args.domain, args.dim), args.degree, args.m)
    if args.out:
        export_mesh_csv(mesh, args.out)
    _emit({
        "m": mesh.m,
        "cardinality": mesh.size,
        "raw_cardinality": mesh.raw_size,
        "constant": mesh.constant,
        "degree": mesh.degree_for,
        "domain": mesh.domain.to_dict(),
    })
    return 0


def _cmd_fit(args):
    results = [load_result(p) for p in args.result_files]
    kinds = {r.config.domain.kind for r in results}
    dims = {r.config.dim for r in results}
    if len(kinds) != 1 or len(dims) != 1:
        raise UsageError("fit inputs must share one domain and dimension")
    kind, d = kinds.pop(), dims.pop()
    data = sorted((r.config.degree, r.lam) for r in results)
    if kind == "cube":
        fit = fit_cube_growth(data, d)
    else:
        fit = fit_ball_growth(data, d, constant=not args.no_constant)
    payload = {
        "model": fit.model,
        "c1": fit.c1,
        "c0": fit.c0,
        "residual": fit.residual,
        "points_used": len(data),
    }
    if args.csv:
        lines = ["n,lambda,model"]
        for n, lam in data:
            lines.append(f"{n},{_fmt(lam)},{_fmt(fit.predict(n))}")
        _atomic_write_text(args.csv, "\n".join(lines) + "\n")
    _emit(payload, args.out)
    return 0


def _cmd_compare(args):
    a = _load_ps(args.file_a, args)
    b = _load_ps(args.file_b, args)
    dist = setdistance(a, b, procrustes=args.procrustes)
    if args.pairs_csv:
        rows, cols = matched_pairs(a, b)
        lines = ["index_a,index_b,distance"]
        for i, j in zip(rows, cols):
            gap = float(np.linalg.norm(a.points[i] - b.points[j]))
            lines.append(f"{i},{j},{_fmt(gap)}")
        _atomic_write_text(args.pairs_csv, "\n".join(lines) + "\n")
    _emit({"distance": dist, "procrustes": bool(args.procrustes)})
    return 0


def _cmd_export(args):
    result = load_result(args.result_file)
    export_points(result, args.out, fmt=args.format, proj=args.proj)
    _progress(f"wrote {args.out}")
    return 0


def _cmd_campaign(args):
    try:
        failed = run_campaign(args.campaign_file, args.out_dir, jobs=args.jobs,
                              progress=_progress)
    except ValueError as exc:
        raise UsageError(str(exc))
    return 2 if failed else 0


_HANDLERS = {
    "optimize": _cmd_optimize,
    "evaluate": _cmd_evaluate,
    "mesh-info": _cmd_mesh_info,
    "fit": _cmd_fit,
    "compare": _cmd_compare,
    "export": _cmd_export,
    "campaign": _cmd_campaign,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ResultFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
