"""Command line entry point: ``polycond <command> ...``.

Exit status is 0 on success, 1 when the property suite reports a failure and
2 on usage errors (bad arguments, unreadable or malformed input files).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bounds as B
from .harness import (
    _json_default,
    DEFAULT_T_GRID,
    emit_report,
    load_config,
    load_report,
    run_expectation_experiment,
    run_property_suite,
    run_tail_experiment,
    summary_text,
)
from .polycore import dumps_system, loads_system
from .randsys import EnsembleSpec, EquationModel, sample_system
from .spherenet import kappa_global

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from None


def _ensemble(args) -> EnsembleSpec:
    degrees = args.degrees
    seed = 0 if args.seed is None else args.seed
    if args.model == "gaussian":
        return EnsembleSpec.gaussian(args.n, degrees, seed=seed)
    if args.model == "lp":
        return EnsembleSpec.lp_ball(args.n, degrees, args.p, seed=seed)
    return EnsembleSpec.sphere(args.n, degrees, seed=seed)


def cmd_sample(args) -> int:
    spec = _ensemble(args)
    P = sample_system(spec, args.index)
    _write(dumps_system(P) + "\n", args.out)
    return EXIT_OK


def cmd_kappa(args) -> int:
    try:
        P = loads_system(Path(args.file).read_text())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read system from {args.file}: {exc}") from None
    res = kappa_global(P, args.delta, args.refine)
    doc = res.to_dict()
    doc["certified"] = res.certified
    _write(json.dumps(doc, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    bp = B.BoundParams(args.n, args.degrees, K=args.K, c0=args.c0, c0tilde=args.c0tilde, C=args.C)
    ts = args.t if args.t else list(DEFAULT_T_GRID)
    _write(B.format_rows(B.bound_curve_rows(ts, bp)), args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        cfg = load_config(Path(args.config).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.trials is not None:
        kw["trials"] = args.trials
    if args.delta is not None:
        kw["coarse_delta"] = args.delta
    if args.refine is not None:
        kw["refine_rounds"] = args.refine
    if args.jobs is not None:
        kw["jobs"] = args.jobs
    if kw:
        cfg = cfg.replace(**kw)
    run = run_tail_experiment if args.kind == "tail" else run_expectation_experiment
    report = run(cfg)
    out = args.out or cfg.out or f"results-{args.kind}"
    files = emit_report(report, out)
    sys.stdout.write(summary_text(report))
    sys.stdout.write(f"wrote {', '.join(str(p) for p in files.values())}\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_property_suite(seed=args.seed or 0, scale=args.scale)
    lines = [
        f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.inequality} "
        f"(samples={r.samples}, worst margin={r.worst_margin:.3g})"
        for r in results
    ]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        _write(json.dumps([r.to_dict() for r in results], indent=1, default=_json_default) + "\n", args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_report(args) -> int:
    try:
        report = load_report(args.results)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read results from {args.results}: {exc}") from None
    _write(summary_text(report), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polycond", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        if seed:
            p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output file (directory for experiments)")

    p = sub.add_parser("sample", help="draw a random system and print it as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--degrees", type=_int_list, required=True, help="e.g. 2,2")
    p.add_argument("--model", choices=("gaussian", "lp", "sphere"), default="gaussian")
    p.add_argument("--p", type=float, default=4.0, help="exponent for --model lp")
    p.add_argument("--index", type=int, default=0, help="trial index of the stream")
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("kappa", help="certified condition number of a system file")
    p.add_argument("file")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--refine", type=int, default=6)
    common(p, seed=False)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("bounds", help="tabulate the tail bound curves")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--degrees", type=_int_list, required=True)
    p.add_argument("--t", type=_float_list, default=None, help="t values, default a log grid on [1, 1e4]")
    for name, default in (("K", 1.0), ("c0", 1.0), ("c0tilde", 1.0), ("C", 4.0)):
        p.add_argument(f"--{name}", type=float, default=default)
    common(p, seed=False)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a config file")
    p.add_argument("kind", choices=("tail", "expectation"))
    p.add_argument("config")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--refine", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("verify", help="run the property suite")
    p.add_argument("--scale", choices=("desk", "quick"), default="desk")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="print the summary of a results file or directory")
    p.add_argument("results")
    common(p, seed=False)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"polycond: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # invalid parameter combinations rejected by the library
        print(f"polycond: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
