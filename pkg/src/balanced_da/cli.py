"""Command-line entry point: ``bda run | sweep | gen``.

Reports go to ``--out`` (stdout when omitted) as versioned JSON or as CSV
rows ``method, mu, lambda, dim, iteration, accuracy, mmd_distance``.
A one-line-per-method summary with percent accuracies goes to stderr.

Exit status is 0 when everything succeeded and 1 otherwise; a failing
method does not stop the others and the partial report is still written.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .bda import DEFAULT_GRID, best_mu, fit
from .core import KERNELS, AdaptConfig, UnlabeledDomain
from .data_io import TASK_KINDS, DatasetSpec, generate_shift, load_dense_csv, load_labels, \
    sniff_format, synthetic_task, write_dense_csv, write_labels_csv
from .errors import BDAError, InvalidConfig
from .methods import REGISTRY, run_method

EXPERIMENT_SCHEMA = "balanced_da.experiment/1"
SWEEP_SCHEMA = "balanced_da.sweep/1"
CSV_COLUMNS = ("method", "mu", "lambda", "dim", "iteration", "accuracy", "mmd_distance")


class UsageError(BDAError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; the contract here is 0 / 1 only
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None



def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("BDA_WORKERS", "1")))
    except ValueError:
        return 1


def _add_synth(p):
    g = p.add_argument_group("synthetic task")
    g.add_argument("--kind", choices=TASK_KINDS, default="shift")
    g.add_argument("--classes", type=int, default=2)
    g.add_argument("--features", type=int, default=10)
    g.add_argument("--per-class", type=int, default=100)
    g.add_argument("--source-priors", type=_floats)
    g.add_argument("--target-priors", type=_floats)
    g.add_argument("--sigma", type=float, default=0.7)
    g.add_argument("--separation", type=float, default=4.0)
    g.add_argument("--marginal", type=float, help="length of the common target offset")
    g.add_argument("--conditional", type=float, help="length of each per-class target offset")
    g.add_argument("--seed", type=int, default=7)


def _add_data(p):
    g = p.add_argument_group("data")
    g.add_argument("--source", help="labelled source file (dense-csv or dense-binary)")
    g.add_argument("--target", help="target feature file")
    g.add_argument("--truth", help="true target labels, for scoring only")
    g.add_argument("--label-col", type=int, default=-1, help="label column of a CSV source file")
    g.add_argument("--task", action="store_true",
                   help="generate the task in memory from the synthetic flags instead of reading files")


def _add_config(p):
    g = p.add_argument_group("adaptation")
    g.add_argument("--mu", type=float)
    g.add_argument("--grid", type=_floats, help="comma-separated mu values")
    g.add_argument("--lambda", dest="lam", type=float, default=0.1)
    g.add_argument("--dim", type=int, default=100)
    g.add_argument("--iters", type=int, default=10)
    g.add_argument("--kernel", choices=KERNELS, default="linear")
    g.add_argument("--gamma", type=float)
    g.add_argument("--no-zscore", action="store_true")
    g.add_argument("--workers", type=int, default=_default_workers())
    g.add_argument("--out")
    g.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bda", description="Balanced distribution adaptation experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one or more methods on a task")
    _add_data(run)
    _add_config(run)
    _add_synth(run)
    run.add_argument("--methods", default="bda",
                     help=f"comma-separated subset of {','.join(REGISTRY)}")

    sweep = sub.add_parser("sweep", help="accuracy and MMD traces over a grid of mu")
    _add_data(sweep)
    _add_config(sweep)
    _add_synth(sweep)
    sweep.add_argument("--weighted", action="store_true", help="sweep the prior-weighted variant")

    gen = sub.add_parser("gen", help="write a synthetic task as dense-csv files")
    _add_synth(gen)
    gen.add_argument("--out", required=True, help="output directory")
    return parser


# -- manifest ---------------------------------------------------------------

def _synth_config(args):
    return synthetic_task(args.kind, args.seed, n_classes=args.classes, n_features=args.features,
                          per_class=args.per_class, source_priors=args.source_priors,
                          target_priors=args.target_priors, separation=args.separation,
                          marginal=args.marginal, conditional=args.conditional, sigma=args.sigma)


def _synth_echo(args) -> dict:
    return {
        "kind": args.kind, "seed": args.seed, "classes": args.classes, "features": args.features,
        "per_class": args.per_class, "source_priors": args.source_priors,
        "target_priors": args.target_priors, "sigma": args.sigma, "separation": args.separation,
        "marginal": args.marginal, "conditional": args.conditional,
    }


def _load_task(args):
    """Returns (source, target, truth, echo) from files or the generator."""
    if args.task:
        if args.source or args.target or args.truth:
            raise UsageError("--task cannot be combined with --source/--target/--truth")
        spec = DatasetSpec(generator=_synth_config(args))
        source, target, truth = generate_shift(spec.generator)
        return source, target, truth, {"task": _synth_echo(args)}
    if not args.source or not args.target:
        raise UsageError("need --source and --target (or --task)")
    for path in (args.source, args.target, args.truth):
        if path is not None and not Path(path).is_file():
            raise UsageError(f"no such file: {path}")
    source = load_dense_csv(DatasetSpec(args.source, sniff_format(args.source), args.label_col))
    if not hasattr(source, "labels"):
        raise UsageError(f"{args.source} carries no labels")
    target = load_dense_csv(DatasetSpec(args.target, sniff_format(args.target)))
    if hasattr(target, "labels"):
        target = UnlabeledDomain(target.features)   # a labelled target file is used unlabelled
    truth = None if args.truth is None else load_labels(args.truth)
    return source, target, truth, {"source": args.source, "target": args.target, "truth": args.truth}


def _config(args) -> AdaptConfig:
    return AdaptConfig(mu=0.5 if args.mu is None else args.mu, lam=args.lam, dim=args.dim,
                       kernel=args.kernel, gamma=args.gamma, iterations=args.iters,
                       weighted=bool(getattr(args, "weighted", False)), zscore=not args.no_zscore)


# -- output -----------------------------------------------------------------

def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def _iteration_rows(method: str, mu, report) -> list:
    cfg = report.config
    return [(method, mu, cfg["lambda"], cfg["dim"], rec.iteration, rec.accuracy, rec.mmd_distance)
            for rec in report.per_iteration]


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _pct(acc) -> str:
    return "n/a" if acc is None else f"{100 * acc:.2f}%"


def _fail(exc: BaseException) -> int:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    line = getattr(exc, "line", None)
    if line is not None:
        payload["error"]["line"] = line
        payload["error"]["column"] = getattr(exc, "column", None)
    print(json.dumps(payload), file=sys.stderr)
    return 1


# -- commands ---------------------------------------------------------------

def cmd_run(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in REGISTRY]
    if unknown or not methods:
        raise UsageError(f"unknown method(s) {unknown}; choose from {', '.join(REGISTRY)}")
    source, target, truth, data_echo = _load_task(args)
    config = _config(args)
    grid = None if args.mu is not None else (args.grid or list(DEFAULT_GRID))
    workers = max(1, args.workers)

    def one(name):
        return run_method(name, source, target, config, truth, grid, workers)

    if workers > 1 and len(methods) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, methods))
    else:
        results = [one(name) for name in methods]

    manifest = dict(data_echo, config=config.to_dict(), methods=methods, grid=grid,
                    format=args.format)
    if args.format == "json":
        doc = {"schema": EXPERIMENT_SCHEMA, "command": "run", "manifest": manifest,
               "results": [r.to_dict() for r in results]}
        _emit(json.dumps(doc, indent=2, allow_nan=False) + "\n", args.out)
    else:
        rows = []
        for r in results:
            if r.report is None:
                rows.append((r.method, r.mu, config.lam, config.dim, None, None, None))
            else:
                rows.extend(_iteration_rows(r.method, r.mu, r.report))
        _emit(_csv_text(rows), args.out)

    for r in results:
        if r.ok:
            print(f"{r.method:8s} mu={r.mu}  accuracy {_pct(r.report.final_accuracy)}", file=sys.stderr)
        else:
            print(json.dumps({"method": r.method, "error": r.error}), file=sys.stderr)
    return 0 if all(r.ok for r in results) else 1


def _sweep_point(source, target, config, truth, mu):
    try:
        return fit(source, target, replace(config, mu=mu), truth).report, None
    except Exception as exc:
        return None, f"{type(exc).__name__}: mu={mu}: {exc}"


def cmd_sweep(args) -> int:
    source, target, truth, data_echo = _load_task(args)
    if truth is None:
        raise UsageError("sweep needs the true target labels (--truth or --task)")
    config = _config(args)
    grid = args.grid or list(DEFAULT_GRID)
    for g in grid:
        if not 0.0 <= g <= 1.0:
            raise InvalidConfig(f"grid value {g} outside [0, 1]")
    method = "wbda" if config.weighted else "bda"

    def one(mu):
        return _sweep_point(source, target, config, truth, mu)

    workers = max(1, args.workers)
    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(one, grid))
    else:
        points = [one(mu) for mu in grid]

    curve = [(mu, rep.final_accuracy) for mu, (rep, err) in zip(grid, points) if rep is not None]
    best = best_mu(curve) if curve else None
    manifest = dict(data_echo, config=replace(config, mu=grid[0]).to_dict(), method=method, grid=grid,
                    format=args.format)
    manifest["config"].pop("mu")

    if args.format == "json":
        entries = []
        for mu, (rep, err) in zip(grid, points):
            e = {"mu": mu, "status": "ok" if err is None else "error"}
            if rep is not None:
                e.update(accuracy=rep.final_accuracy, mmd_distance=rep.final_mmd_distance,
                         accuracy_trace=[r.accuracy for r in rep.per_iteration],
                         mmd_trace=[r.mmd_distance for r in rep.per_iteration],
                         initial_mmd_distance=rep.initial_mmd_distance)
            e["error"] = err
            entries.append(e)
        doc = {"schema": SWEEP_SCHEMA, "command": "sweep", "manifest": manifest, "curve": entries,
               "best": None if best is None else {"mu": best[0], "accuracy": best[1]}}
        _emit(json.dumps(doc, indent=2, allow_nan=False) + "\n", args.out)
    else:
        rows, traces = [], []
        for mu, (rep, err) in zip(grid, points):
            if rep is None:
                rows.append((method, mu, config.lam, config.dim, None, None, None))
                continue
            last = rep.per_iteration[-1]
            rows.append((method, mu, config.lam, config.dim, last.iteration, last.accuracy,
                         last.mmd_distance))
            traces.extend(_iteration_rows(method, mu, rep))
        _emit(_csv_text(rows), args.out)
        if args.out is not None:
            out = Path(args.out)
            out.with_name(out.stem + ".traces" + (out.suffix or ".csv")).write_text(
                _csv_text(traces), encoding="utf-8")

    for mu, (rep, err) in zip(grid, points):
        if err is not None:
            print(json.dumps({"mu": mu, "error": err}), file=sys.stderr)
    if best is not None:
        print(f"{method} best mu={best[0]}  accuracy {_pct(best[1])}", file=sys.stderr)
    return 0 if all(err is None for _, err in points) else 1


def cmd_gen(args) -> int:
    source, target, truth = generate_shift(_synth_config(args))
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_dense_csv(out / "source.csv", source.features, source.labels)
        write_dense_csv(out / "target.csv", target.features)
        write_labels_csv(out / "truth.csv", truth)
    except OSError as exc:
        raise UsageError(f"cannot write to {out}: {exc}") from exc
    print(f"wrote {len(source.labels)} source / {len(truth)} target samples to {out}", file=sys.stderr)
    return 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "gen": cmd_gen}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (BDAError, ValueError, OSError) as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
