"""``roughkit`` command line: thin wrappers over the library's file formats.

Exit status is 0 on success, 1 for bad parameters or usage, and 2 when a
numerical diagnostic fails.  Every output file gets a sibling
``<output>.manifest.json`` recording how it was made; without ``-o`` the
manifest goes to stderr.  ``roughkit rerun <manifest>`` replays it.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .errors import ConsistencyError, DiagnosticError, ParameterError, RoughkitError
from . import io as rio


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _manifest(args, inputs: dict) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "argv")}
    return {
        "subcommand": args.command,
        "argv": list(args.argv),
        "parameters": params,
        "inputs": {name: {"path": p, "sha256": rio.sha256_file(p)} for name, p in inputs.items() if p},
        "version": __version__,
        "seed": getattr(args, "seed", None),
    }


def _emit_json(args, obj, inputs: dict) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    _emit_manifest(args, inputs)


def _emit_manifest(args, inputs: dict) -> None:
    man = _manifest(args, inputs)
    if args.output:
        rio.write_json(args.output + ".manifest.json", man)
    else:
        sys.stderr.write(json.dumps(man, sort_keys=True) + "\n")


def _need_output(args) -> None:
    if not args.output:
        raise ParameterError(f"{args.command} needs -o/--output")


# ---------------------------------------------------------------------------


def cmd_gen_paths(args) -> int:
    from .verify import PathGenerator, gen_path

    _need_output(args)
    g = PathGenerator(args.kind, args.seed, args.dim, args.n, H=args.H, scale=args.scale, horizon=args.horizon)
    rio.write_path_csv(args.output, gen_path(g))
    _emit_manifest(args, {})
    return 0


def cmd_lift(args) -> int:
    from .roughpath import canonical_lift, chen_defect_report

    _need_output(args)
    P = canonical_lift(rio.read_path_csv(args.path), args.rule)
    if args.audit:
        rep = chen_defect_report(P)
        if rep["value"] > args.tol:
            raise ConsistencyError(f"Chen defect {rep['value']:.3e} exceeds {args.tol}")
    rio.write_roughpath_json(args.output, P)
    _emit_manifest(args, {"path": args.path})
    return 0


def cmd_variation(args) -> int:
    from .variation import var_exact, var_field

    f = rio.read_path_csv(args.path)
    if args.field:
        F = var_field(f, args.r, max_points=max(f.n, 2))
        out = {"field": rio.field_to_dict(F), "r": args.r}
    else:
        res = var_exact(f.distance_field(), args.r, args.interval)
        out = {"value": res.value, "partition": list(res.optimal_partition.indices), "r": args.r}
    _emit_json(args, out, {"path": args.path})
    return 0


def cmd_besov(args) -> int:
    from .besov import BesovParams, besov_report

    if bool(args.path) == bool(args.field):
        raise ParameterError("give exactly one of --path or --field")
    chi = rio.read_field_json(args.field) if args.field else rio.read_path_csv(args.path).distance_field()
    rep = besov_report(chi, BesovParams(args.alpha, args.p, args.q), "star" if args.star else "standard", args.evaluator)
    _emit_json(args, rep, {"path": args.path, "field": args.field})
    return 0


def cmd_sew(args) -> int:
    from .sewing import sew

    rep = sew(rio.read_field_json(args.germ), args.p, args.r, args.tol, certificate=not args.no_certificate)
    out = rep.to_dict()
    _emit_json(args, out, {"germ": args.germ})
    return 0 if rep.converged else 2


def cmd_young_solve(args) -> int:
    from .functions import builtin
    from .young import YoungConfig, young_solve

    _need_output(args)
    cfg = YoungConfig(r=args.r, alpha=args.alpha, tol=args.tol, max_iter=args.max_iter)
    S = young_solve(builtin(args.phi), rio.read_path_csv(args.X), rio.parse_vector(args.y0), cfg)
    rio.write_path_csv(args.output, S.path)
    if args.log:
        rio.write_json(args.log, S.to_dict())
    _emit_manifest(args, {"X": args.X})
    return 0


def cmd_rde_solve(args) -> int:
    from .functions import builtin
    from .rde import RdeConfig, rde_solve

    cfg = RdeConfig(r=args.r, alpha=args.alpha, c=args.c, tol=args.tol, max_iter=args.max_iter,
                    check=args.check, windows=not args.single_window)
    P = rio.read_roughpath_json(args.rough)
    S = rde_solve(builtin(args.phi), P, rio.parse_vector(args.y0), cfg)
    out = rio.controlled_to_dict(S.path)
    out["log"] = S.to_dict()
    _emit_json(args, out, {"rough": args.rough})
    return 0


def cmd_verify(args) -> int:
    from .verify import run_suite

    def progress(claim, cells, worst):
        if args.verbose:
            sys.stderr.write(f"{claim} n={cells} max_ratio={worst:.4g}\n")

    rep = run_suite(args.catalog, seeds=args.seeds, sizes=rio.parse_sizes(args.sizes), progress=progress)
    out = rep.to_dict()
    if args.csv:
        rep.write_csv(args.csv)
    elif args.output:
        rep.write_csv(args.output.rsplit(".", 1)[0] + ".csv")
    _emit_json(args, out, {})
    return 0 if rep.passed else 2


def cmd_rerun(args) -> int:
    man = rio.read_json(args.manifest)
    argv = man.get("argv")
    if not isinstance(argv, list) or not argv or argv[0] == "rerun":
        raise ParameterError(f"{args.manifest} holds no replayable command")
    if man.get("version") != __version__:
        sys.stderr.write(f"roughkit: warning: manifest written by version {man.get('version')}\n")
    return main(argv)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="roughkit", description="Variation and Besov norms, sewing, Young and rough equations.")
    ap.add_argument("--version", action="version", version=f"roughkit {__version__}")
    ap.add_argument("--threads", type=int, default=None, help="worker threads (default $ROUGHKIT_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("-o", "--output", default=None)
        return p

    p = add("gen-paths", cmd_gen_paths, "write a corpus path as CSV")
    p.add_argument("--kind", required=True, choices=["gaussian_walk", "fbm_cholesky", "polynomial", "trig", "zigzag"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=257, help="number of grid points")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--H", type=float, default=0.5)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--horizon", type=float, default=1.0)

    p = add("lift", cmd_lift, "canonical level-2 lift of a CSV path")
    p.add_argument("--path", required=True)
    p.add_argument("--rule", default="left_point", choices=["left_point", "linear"])
    p.add_argument("--audit", action="store_true", help="check Chen's identity before writing")
    p.add_argument("--tol", type=float, default=1e-10)

    p = add("variation", cmd_variation, "r-variation of a CSV path")
    p.add_argument("--path", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--field", action="store_true", help="emit the variation on every interval")
    p.add_argument("--interval", type=int, nargs=2, metavar=("A", "B"), default=None)

    p = add("besov", cmd_besov, "Besov norm of a path or a two-parameter field")
    p.add_argument("--path", default=None)
    p.add_argument("--field", default=None)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--star", action="store_true")
    p.add_argument("--evaluator", default="dyadic", choices=["dyadic", "quadrature"])

    p = add("sew", cmd_sew, "sew a germ given as field JSON")
    p.add_argument("--germ", required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--no-certificate", action="store_true")

    p = add("young-solve", cmd_young_solve, "solve a Young equation")
    p.add_argument("--phi", required=True)
    p.add_argument("--X", required=True)
    p.add_argument("--y0", required=True)
    p.add_argument("--r", type=float, default=1.5)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--log", default=None, help="write the window log as JSON")

    p = add("rde-solve", cmd_rde_solve, "solve a rough differential equation")
    p.add_argument("--phi", required=True)
    p.add_argument("--rough", required=True)
    p.add_argument("--y0", required=True)
    p.add_argument("--r", type=float, default=2.2)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--c", type=float, default=9.0)
    p.add_argument("--tol", type=float, default=1e-11)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--check", default="all", choices=["all", "final", "none"])
    p.add_argument("--single-window", action="store_true", help="fail instead of splitting the horizon")

    p = add("verify", cmd_verify, "run the inequality audit")
    p.add_argument("--catalog", default="all")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--sizes", default="256,512")
    p.add_argument("--csv", default=None)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(output="report.json")

    p = sub.add_parser("rerun", help="replay the command recorded in a manifest")
    p.set_defaults(func=cmd_rerun, output=None)
    p.add_argument("manifest")
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    try:
        from .runtime import configure_threads

        args.threads = configure_threads(args.threads)
        return args.func(args)
    except (DiagnosticError, ConsistencyError) as exc:
        sys.stderr.write(f"roughkit: diagnostic failure: {exc}\n")
        return 2
    except (ParameterError, TypeError, OSError, KeyError) as exc:
        sys.stderr.write(f"roughkit: error: {exc}\n")
        return 1
    except RoughkitError as exc:
        sys.stderr.write(f"roughkit: error: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
