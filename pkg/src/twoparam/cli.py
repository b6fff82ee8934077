"""Command-line driver: generate, solve, verify, and benchmark problems.

Exit codes: 0 success, 2 solver did not converge, 3 invalid input,
4 oracle infeasible at this size.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .alternating import SolveOptions, solve_index
from .exceptions import TooLarge, TwoParamError
from .generators import (
    Discretization,
    builtin_metric,
    diagonal_variant,
    random_definite_problem,
    separable_helmholtz,
)
from .oracle import oracle_solve_all
from .problem import (
    RecoveryMap,
    check_assumptions,
    load_problem,
    recover_eigenvalue,
    save_problem,
)
from .sweep import SweepRow, solve_all_indices

EXIT_OK = 0
EXIT_NO_CONVERGENCE = 2
EXIT_INVALID_INPUT = 3
EXIT_ORACLE_INFEASIBLE = 4

GRID_SCHEMA = "twoparam-grid/1"
TRACE_SCHEMA = "twoparam-trace/1"


@dataclass
class RunManifest:
    """Reproducibility record embedded in every emitted file."""

    command: str
    parameters: dict
    seed: int | None
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat()
    )
    version: str = __version__
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _manifest_line(manifest: RunManifest) -> str:
    return "# manifest: " + json.dumps(manifest.to_dict(), sort_keys=True)


def _write_csv(path, header: list[str], rows, manifest: RunManifest, schema: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema: {schema}\n")
        fh.write(_manifest_line(manifest) + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def read_csv_rows(path, expect_schema: str | None = None) -> tuple[list[str], list[list[str]]]:
    """Read a CSV emitted by this tool, skipping comment lines.

    When expect_schema is given, a present schema comment must match it.
    """
    header: list[str] | None = None
    rows: list[list[str]] = []
    schema: str | None = None
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for line in lines:
        if line.startswith("# schema:"):
            schema = line.partition(":")[2].strip()
    if expect_schema is not None and schema is not None and schema != expect_schema:
        raise TwoParamError(f"{path}: schema {schema!r}, expected {expect_schema!r}")
    for record in csv.reader(line for line in lines if not line.startswith("#")):
        if not record:
            continue
        if header is None:
            header = record
        else:
            rows.append(record)
    if header is None:
        raise TwoParamError(f"{path}: no CSV header found")
    return header, rows


def _fmt(x: float) -> str:
    return repr(float(x))


def _solver_options(args) -> SolveOptions:
    return SolveOptions(
        max_sweeps=args.max_sweeps,
        tol_lambda=args.tol_lambda,
        tol_residual=args.tol_residual,
        seed=args.seed,
        restarts=args.restarts,
    )


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="base seed")
    parser.add_argument("--tol-lambda", type=float, default=1e-12)
    parser.add_argument("--tol-residual", type=float, default=1e-10)
    parser.add_argument("--max-sweeps", type=int, default=25)
    parser.add_argument("--restarts", type=int, default=5)


def _parse_metric_args(pairs: list[str]) -> dict:
    params = {}
    for pair in pairs:
        key, _, value = pair.partition("=")
        if not _:
            raise ValueError(f"metric argument {pair!r} is not key=value")
        params[key] = float(value)
    return params


def cmd_gen(args) -> int:
    t0 = time.perf_counter()
    recovery: RecoveryMap | None = None
    if args.kind == "random":
        problem = random_definite_problem(args.n, args.m, args.seed)
    elif args.kind == "diagonal":
        problem = diagonal_variant(args.n, args.m, args.seed)
    else:
        metric = builtin_metric(args.metric, args.n, args.m, **_parse_metric_args(args.metric_args))
        problem, recovery = separable_helmholtz(metric, Discretization.from_metric(metric))
    parameters = {"kind": args.kind, "n": args.n, "m": args.m}
    if args.kind == "helmholtz":
        parameters["metric"] = args.metric
        parameters["metric_args"] = args.metric_args
    manifest = RunManifest(command="gen", parameters=parameters, seed=args.seed)
    manifest.timings["generate"] = time.perf_counter() - t0
    save_problem(args.out, problem, recovery=recovery, manifest=manifest.to_dict())
    print(f"wrote {args.out}: {problem.label} ({problem.n}x{problem.m})")
    return EXIT_OK


def cmd_check(args) -> int:
    problem, _, _ = load_problem(args.problem)
    t0 = time.perf_counter()
    report = check_assumptions(problem, exhaustive_threshold=args.exhaustive_threshold)
    manifest = RunManifest(
        command="check",
        parameters={"problem": str(args.problem)},
        seed=None,
        timings={"check": time.perf_counter() - t0},
    )
    payload = {"schema": "twoparam-check/1", "report": report.to_dict(), "manifest": manifest.to_dict()}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def cmd_solve(args) -> int:
    problem, recovery, _ = load_problem(args.problem)
    opts = _solver_options(args)
    t0 = time.perf_counter()
    sol = solve_index(problem, (args.index[0], args.index[1]), opts)
    elapsed = time.perf_counter() - t0
    manifest = RunManifest(
        command="solve",
        parameters={"problem": str(args.problem), "index": list(args.index)},
        seed=args.seed,
        timings={"solve": elapsed},
    )
    payload = {
        "schema": "twoparam-solution/1",
        "index": list(sol.index),
        "lambda": sol.lam,
        "mu": sol.mu,
        "converged": sol.converged,
        "half_steps": sol.half_steps,
        "sweeps_used": sol.sweeps_used,
        "index_error": sol.final_error,
        "u": [float(x) for x in sol.u],
        "v": [float(x) for x in sol.v],
        "manifest": manifest.to_dict(),
    }
    if recovery is not None:
        lam_rec, mu_rec = recover_eigenvalue(recovery, (sol.lam, sol.mu))
        payload["lambda_recovered"] = lam_rec
        payload["mu_recovered"] = mu_rec
    if args.trace:
        _write_csv(
            args.trace,
            ["half_step", "lambda", "index_error"],
            [[t.half_step, _fmt(t.lam), _fmt(t.index_error)] for t in sol.trace],
            manifest,
            TRACE_SCHEMA,
        )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
            fh.write("\n")
    else:
        print(json.dumps({k: v for k, v in payload.items() if k not in ("u", "v")}, indent=2))
    if not sol.converged:
        print("solver did not converge", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def grid_rows_for_csv(rows: list[SweepRow]) -> list[list]:
    return [
        [r.i, r.j, _fmt(r.lam), _fmt(r.mu), _fmt(r.error), r.half_steps]
        for r in rows
    ]


def cmd_solve_all(args) -> int:
    problem, _, _ = load_problem(args.problem)
    opts = _solver_options(args)
    t0 = time.perf_counter()
    rows = solve_all_indices(problem, opts, workers=args.workers)
    elapsed = time.perf_counter() - t0
    manifest = RunManifest(
        command="solve-all",
        parameters={"problem": str(args.problem), "workers": args.workers},
        seed=args.seed,
        timings={"sweep": elapsed},
    )
    _write_csv(
        args.out,
        ["i", "j", "lambda", "mu", "error", "half_steps"],
        grid_rows_for_csv(rows),
        manifest,
        GRID_SCHEMA,
    )
    errors = np.array([r.error for r in rows])
    finite = errors[np.isfinite(errors)]
    summary = {
        "schema": "twoparam-summary/1",
        "indices": len(rows),
        "converged": int(sum(r.converged for r in rows)),
        "failed": int(np.count_nonzero(~np.isfinite(errors))),
        "max_error": float(finite.max()) if finite.size else None,
        "median_error": float(np.median(finite)) if finite.size else None,
        "wall_seconds": elapsed,
        "manifest": manifest.to_dict(),
    }
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    print(
        f"{len(rows)} indices, {summary['converged']} converged, "
        f"max error {summary['max_error']:.3e}, {elapsed:.1f}s"
    )
    if summary["converged"] < len(rows):
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_verify(args) -> int:
    """Match sweep rows to oracle records: by index first, then (for rows on
    near-degenerate eigenvalues, where a point index is ill-posed) to the
    nearest unconsumed record within tolerance."""
    problem, _, _ = load_problem(args.problem)
    t0 = time.perf_counter()
    spectrum = oracle_solve_all(problem)
    header, raw_rows = read_csv_rows(args.results, expect_schema=GRID_SCHEMA)
    col = {name: k for k, name in enumerate(header)}
    records = list(spectrum)
    consumed = [False] * len(records)
    slot_of = {}
    for k, rec in enumerate(records):
        slot_of.setdefault(rec.index, k)
    tol = args.tol
    max_dlam = 0.0
    max_dmu = 0.0
    matched_by_index = 0
    matched_degenerate = 0
    unmatched: list[list[int]] = []

    def deviation(lam, mu, rec):
        scale = max(1.0, abs(rec.lam), abs(rec.mu))
        return abs(lam - rec.lam), abs(mu - rec.mu), scale

    pending = []
    for record in raw_rows:
        i, j = int(record[col["i"]]), int(record[col["j"]])
        lam, mu = float(record[col["lambda"]]), float(record[col["mu"]])
        if not (np.isfinite(lam) and np.isfinite(mu)):
            unmatched.append([i, j])
            continue
        slot = slot_of.get((i, j))
        if slot is not None and not consumed[slot]:
            dlam, dmu, scale = deviation(lam, mu, records[slot])
            if dlam <= tol * scale and dmu <= tol * scale:
                consumed[slot] = True
                matched_by_index += 1
                max_dlam = max(max_dlam, dlam)
                max_dmu = max(max_dmu, dmu)
                continue
        pending.append((i, j, lam, mu))
    for i, j, lam, mu in pending:
        best, best_dev = None, np.inf
        for k, rec in enumerate(records):
            if consumed[k]:
                continue
            dlam, dmu, scale = deviation(lam, mu, rec)
            dev = max(dlam, dmu) / scale
            if dev < best_dev:
                best, best_dev = k, dev
        if best is not None and best_dev <= tol:
            consumed[best] = True
            matched_degenerate += 1
            dlam, dmu, _ = deviation(lam, mu, records[best])
            max_dlam = max(max_dlam, dlam)
            max_dmu = max(max_dmu, dmu)
        else:
            unmatched.append([i, j])
    report = {
        "schema": "twoparam-verify/1",
        "rows": len(raw_rows),
        "oracle_records": len(spectrum),
        "matched": matched_by_index + matched_degenerate,
        "matched_by_index": matched_by_index,
        "matched_near_degenerate": matched_degenerate,
        "unmatched_indices": unmatched,
        "max_abs_dlambda": max_dlam,
        "max_abs_dmu": max_dmu,
        "tolerance": tol,
        "manifest": RunManifest(
            command="verify",
            parameters={"problem": str(args.problem), "results": str(args.results)},
            seed=None,
            timings={"verify": time.perf_counter() - t0},
        ).to_dict(),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    print(
        f"matched {report['matched']}/{report['rows']} rows "
        f"({matched_degenerate} near-degenerate); "
        f"max |dlambda| {max_dlam:.3e}, max |dmu| {max_dmu:.3e}, "
        f"{len(unmatched)} unmatched"
    )
    return EXIT_OK


def _bench_one(n: int, seed: int, mode: str, workers: int) -> tuple[float, float]:
    problem = random_definite_problem(n, n, seed)
    t0 = time.perf_counter()
    if mode == "alternating_all":
        rows = solve_all_indices(problem, SolveOptions(seed=seed), workers=workers)
        max_error = max(r.error for r in rows)
    else:
        spectrum = oracle_solve_all(problem)
        from .metrics import index_error

        max_error = max(
            index_error(problem, rec.lam, rec.mu, rec.index).value for rec in spectrum
        )
    return time.perf_counter() - t0, max_error


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    modes = (
        ["alternating_all", "oracle_all"] if args.mode == "both" else [args.mode]
    )
    manifest = RunManifest(
        command="bench",
        parameters={"sizes": sizes, "modes": modes},
        seed=args.seed,
    )
    rows = []
    for n in sizes:
        for mode in modes:
            try:
                seconds, max_error = _bench_one(n, args.seed, mode, args.workers)
            except TooLarge:
                print(f"skipping n={n} {mode}: oracle infeasible", file=sys.stderr)
                continue
            rows.append([n, mode, _fmt(seconds), _fmt(max_error)])
            manifest.timings[f"{mode}-n{n}"] = float(seconds)
            print(f"n={n:5d} {mode:16s} {seconds:9.3f}s max_error={max_error:.3e}")
    _write_csv(args.out, ["n", "mode", "wall_seconds", "max_error"], rows, manifest, "twoparam-bench/1")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twoparam",
        description="Index-targeted alternating solver for two-parameter eigenvalue problems",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a problem file")
    gen.add_argument("kind", choices=["random", "diagonal", "helmholtz"])
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--metric", default="half_ellipse", help="builtin metric name for helmholtz")
    gen.add_argument(
        "--metric-args", nargs="*", default=[], metavar="KEY=VALUE",
        help="metric parameters, e.g. c=1 R=1",
    )
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    check = sub.add_parser("check", help="assumption report for a problem file")
    check.add_argument("problem")
    check.add_argument("--exhaustive-threshold", type=int, default=4096)
    check.add_argument("--out")
    check.set_defaults(func=cmd_check)

    solve = sub.add_parser("solve", help="solve a single index")
    solve.add_argument("problem")
    solve.add_argument("--index", type=int, nargs=2, required=True, metavar=("I", "J"))
    _add_solver_flags(solve)
    solve.add_argument("--out")
    solve.add_argument("--trace", help="write per-half-step trace CSV here")
    solve.set_defaults(func=cmd_solve)

    solve_all = sub.add_parser("solve-all", help="solve every index")
    solve_all.add_argument("problem")
    _add_solver_flags(solve_all)
    solve_all.add_argument("--workers", type=int, default=1)
    solve_all.add_argument("--out", required=True)
    solve_all.add_argument("--summary", help="write summary JSON here")
    solve_all.set_defaults(func=cmd_solve_all)

    verify = sub.add_parser("verify", help="compare a results CSV to the dense oracle")
    verify.add_argument("problem")
    verify.add_argument("results")
    verify.add_argument(
        "--tol", type=float, default=1e-8,
        help="matching tolerance, relative to max(1, |lambda|, |mu|)",
    )
    verify.add_argument("--out")
    verify.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="timing sweep over problem sizes")
    bench.add_argument("--sizes", default="10,20,40", help="comma-separated sizes")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--mode", choices=["alternating_all", "oracle_all", "both"], default="both")
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--out", required=True)
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE_INFEASIBLE
    except (TwoParamError, OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
