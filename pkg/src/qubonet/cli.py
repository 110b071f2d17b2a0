"""Command-line front end.

Exit codes: 0 ok, 2 invalid input, 3 I/O failure, 4 verification found
counterexamples.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import formats
from .constraint_spec import ConstraintSpec, Kind, spec_from_json, validate_spec
from .errors import QubonetError
from .network import Cost
from .qubo import assemble, model_stats
from .solve import AnnealParams, simulated_anneal, summarize
from .sweep import build_network, parse_method, parse_range, rows_to_csv, run_rows, size_jobs, target_jobs
from .verify import (
    MAX_EXHAUSTIVE_N,
    ConditionalMinimizer,
    ExactnessReport,
    default_workers,
    exhaustive_exactness,
)

EXIT_INVALID = 2
EXIT_IO = 3
EXIT_COUNTEREXAMPLE = 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from None


def _write_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from None


def _emit_json(obj, path=None) -> None:
    _write_text(path, json.dumps(obj, indent=2) + "\n")


def _spec_from_args(args) -> ConstraintSpec:
    if getattr(args, "spec", None):
        return spec_from_json(_read_text(args.spec))
    if args.kind is None or args.n is None:
        raise CliError("need --kind and --n (or --spec FILE)")
    kind = Kind(args.kind)
    return validate_spec(ConstraintSpec(kind, args.n, args.k, args.k1, args.k2))


def _load_model(path: str, fmt=None):
    fmt = fmt or formats.guess_format(path)
    if fmt not in formats.READERS:
        raise CliError(f"cannot read models in {fmt!r} format")
    return formats.READERS[fmt](_read_text(path))


def _model_and_network(args):
    """Either load ``--model`` or build from spec flags; network is None for loaded models."""
    if getattr(args, "model", None):
        model = _load_model(args.model)
        return model.spec, None, model
    spec = _spec_from_args(args)
    net = build_network(spec, args.method, Cost.parse(args.cost))
    return spec, net, assemble(net, args.lam)


def cmd_build(args) -> int:
    _, _, model = _model_and_network(args)
    _write_text(args.out, formats.WRITERS[args.format](model))
    return 0


def cmd_export(args) -> int:
    model = _load_model(args.model, args.input_format)
    _write_text(args.out, formats.WRITERS[args.format](model))
    return 0


def cmd_stats(args) -> int:
    spec, net, model = _model_and_network(args)
    out = {"spec": spec.to_dict() if spec else None}
    if net is not None:
        out.update(method=parse_method(args.method)[0], depth=net.depth_label, subs=len(net.subs))
    out.update(model_stats(net, model).as_dict())
    _emit_json(out, args.out)
    return 0


def cmd_inspect(args) -> int:
    spec = _spec_from_args(args)
    net = build_network(spec, args.method, Cost.parse(args.cost))
    _emit_json(net.dump(), args.out)
    return 0


def _verify_model_file(model) -> ExactnessReport:
    """Brute-force check of a model file: feasible inputs reach energy 0, others >= lambda."""
    spec = model.spec
    if spec is None:
        raise CliError("model file carries no spec to verify against")
    originals = [v.id for v in model.variables if v.role.name == "ORIGINAL"]
    if len(originals) != spec.n:
        raise CliError(f"model has {len(originals)} original variables, spec has n={spec.n}")
    if spec.n > MAX_EXHAUSTIVE_N:
        raise CliError(f"verification limited to n <= {MAX_EXHAUSTIVE_N}")
    free = [v.id for v in model.variables if v.id not in set(originals)]
    try:
        minimizer = ConditionalMinimizer(model, free)
    except QubonetError as exc:
        raise CliError(str(exc)) from None
    lo, hi = spec.bounds()
    report = ExactnessReport(gap_verified=True)
    tol = 1e-9 * max(1.0, model.lam)
    for code in range(1 << spec.n):
        bits = [(code >> i) & 1 for i in range(spec.n)]
        best, _ = minimizer.minimize(dict(zip(originals, bits)))
        feasible = lo <= sum(bits) <= hi
        zero = abs(best) <= tol
        report.n_inputs_checked += 1
        report.n_feasible += feasible
        report.n_routed += zero
        if feasible != zero or (not zero and best < model.lam - tol):
            report.counterexamples.append(tuple(bits))
        if not zero and best < model.lam - tol:
            report.gap_verified = False
    return report


def cmd_verify(args) -> int:
    if args.model:
        report = _verify_model_file(_load_model(args.model))
    else:
        spec = _spec_from_args(args)
        if spec.n > MAX_EXHAUSTIVE_N:
            raise CliError(f"verification limited to n <= {MAX_EXHAUSTIVE_N}")
        net = build_network(spec, args.method, Cost.parse(args.cost))
        report = exhaustive_exactness(spec, net, workers=default_workers())
    _emit_json(report.as_dict(), args.out)
    return 0 if report.exact else EXIT_COUNTEREXAMPLE


def cmd_solve(args) -> int:
    spec, _, model = _model_and_network(args)
    params = AnnealParams(args.reads, args.sweeps, args.beta_start, args.beta_end, args.seed)
    samples = simulated_anneal(model, params, workers=default_workers())
    _emit_json(summarize(samples, spec), args.out)
    return 0


def cmd_sweep_size(args) -> int:
    kind = Kind(args.kind)
    jobs = size_jobs(kind, parse_range(args.n_range), args.methods)
    _write_text(args.out, rows_to_csv(run_rows(jobs, default_workers())))
    return 0


def cmd_sweep_target(args) -> int:
    jobs = target_jobs(args.n, args.methods)
    _write_text(args.out, rows_to_csv(run_rows(jobs, default_workers())))
    return 0


def _add_spec_flags(p, model_ok=False):
    p.add_argument("--kind", choices=[k.value for k in Kind])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int)
    p.add_argument("--spec", metavar="FILE", help="JSON spec file instead of --kind/--n/...")
    p.add_argument("--method", default="full", help="clique | full | depth=D | optimized")
    p.add_argument("--cost", default="edges", help="cost for --method optimized: edges | variables | weighted:A,B")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    if model_ok:
        p.add_argument("--model", metavar="FILE", help="use a saved model instead of spec flags")
    p.add_argument("--out", default=None)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qubonet", description="Sparse QUBO formulations of cardinality constraints.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="assemble a model and write it out")
    _add_spec_flags(p)
    p.add_argument("--format", choices=sorted(formats.WRITERS), default="json")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("export", help="convert a saved model between formats")
    p.add_argument("--model", required=True)
    p.add_argument("--input-format", choices=sorted(formats.READERS))
    p.add_argument("--format", choices=sorted(formats.WRITERS), default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("stats", help="variable/edge/degree counts")
    _add_spec_flags(p, model_ok=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("inspect", help="dump the network's sub-constraints")
    _add_spec_flags(p)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("verify", help="exhaustive exactness check (n <= 20)")
    _add_spec_flags(p, model_ok=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="simulated annealing feasibility run")
    _add_spec_flags(p, model_ok=True)
    p.add_argument("--reads", type=int, default=1000)
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--beta-start", type=float, default=0.1)
    p.add_argument("--beta-end", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep-size", help="CSV of counts versus N")
    p.add_argument("--kind", choices=["one-hot", "equality", "at-most", "at-least"], default="one-hot")
    p.add_argument("--n-range", required=True, metavar="START:END[:STEP]")
    p.add_argument("--methods", nargs="+", default=["clique", "full"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep_size)

    p = sub.add_parser("sweep-target", help="CSV of counts versus K for an equality constraint")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--methods", nargs="+", default=["clique", "full", "optimized"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep_target)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"qubonet: {exc}", file=sys.stderr)
        return exc.code
    except (QubonetError, ValueError) as exc:
        print(f"qubonet: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
