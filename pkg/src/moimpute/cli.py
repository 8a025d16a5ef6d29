"""Command-line client for the experiment service.

Every subcommand builds the same request models the HTTP API uses. By
default requests are dispatched in-process; pass --server to talk to a
running service instead (files the service writes then live on the
server, while mask/aggregate artifacts are always written client-side).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .harness import load_reports
from .metrics import REPORT_COLUMNS, report_row
from .missing import MissingType, Pattern, Situation
from .objectives import Formulation
from .service import app as service
from .service.schemas import (
    AggregateRequest,
    AggregateResponse,
    MaskRequest,
    MaskResponse,
    MatrixRequest,
    MatrixResponse,
    MissingSpecModel,
    RunReportModel,
    RunRequest,
    RunResponse,
)

LOCAL_HANDLERS = {
    "/runs": (service.run_single, RunResponse),
    "/matrix": (service.run_grid, MatrixResponse),
    "/masks": (service.make_mask, MaskResponse),
    "/reports/aggregate": (service.aggregate, AggregateResponse),
}


def dispatch(server: str | None, path: str, request):
    """POST a request model to the service, locally or over HTTP."""
    if server is None:
        handler, _ = LOCAL_HANDLERS[path]
        return handler(request)
    import httpx

    response = httpx.post(
        server.rstrip("/") + path,
        json=json.loads(request.model_dump_json()),
        timeout=None,
    )
    response.raise_for_status()
    _, model = LOCAL_HANDLERS[path]
    return model.model_validate(response.json())


def _add_common_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ratio", type=float, default=0.05,
                        help="missing-cell ratio (default: %(default)s)")
    parser.add_argument("--pattern", choices=[p.value for p in Pattern],
                        default="simple")
    parser.add_argument("--type", dest="mtype",
                        choices=[t.value for t in MissingType], default="overall")
    parser.add_argument("--situation", choices=[s.value for s in Situation],
                        default="test_only")
    parser.add_argument("--population-size", type=int, default=54)
    parser.add_argument("--max-clusters", type=int, default=10)
    parser.add_argument("--crossover-pool", type=int, default=8)
    parser.add_argument("--max-generations", type=int, default=100)
    parser.add_argument("--threshold", type=float, default=0.0005)
    parser.add_argument("--test-fraction", type=float, default=0.3)
    parser.add_argument("--label-column", default="class")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moimpute",
        description="Classification on incomplete data via bi-objective "
                    "imputation and model selection.",
    )
    parser.add_argument("--server", help="base URL of a running service "
                        "(default: run in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a single experiment")
    run.add_argument("--config", help="JSON file with a full run request "
                     "(overrides the other flags)")
    run.add_argument("--dataset", default="iris")
    run.add_argument("--formulation", choices=[f.value for f in Formulation],
                     default="asw")
    run.add_argument("--seed", type=int, default=1)
    _add_common_run_flags(run)
    run.add_argument("--output-dir", help="directory for the report JSON "
                     "and generation history")

    matrix = sub.add_parser("matrix", help="execute an experiment grid")
    matrix.add_argument("--datasets", nargs="+", default=["iris", "zoo", "sonar"])
    matrix.add_argument("--formulations", nargs="+",
                        choices=[f.value for f in Formulation],
                        default=[f.value for f in Formulation])
    matrix.add_argument("--ratios", nargs="+", type=float,
                        default=[0.01, 0.05, 0.10, 0.25, 0.50])
    matrix.add_argument("--patterns", nargs="+",
                        choices=[p.value for p in Pattern],
                        default=[p.value for p in Pattern])
    matrix.add_argument("--types", nargs="+", dest="mtypes",
                        choices=[t.value for t in MissingType],
                        default=[t.value for t in MissingType])
    matrix.add_argument("--situations", nargs="+",
                        choices=[s.value for s in Situation],
                        default=[s.value for s in Situation])
    matrix.add_argument("--seeds", nargs="+", type=int, default=[1, 2, 3, 4, 5])
    matrix.add_argument("--output-dir", required=True)
    matrix.add_argument("--workers", type=int, default=1)
    matrix.add_argument("--population-size", type=int, default=54)
    matrix.add_argument("--max-clusters", type=int, default=10)
    matrix.add_argument("--crossover-pool", type=int, default=8)
    matrix.add_argument("--max-generations", type=int, default=100)
    matrix.add_argument("--threshold", type=float, default=0.0005)
    matrix.add_argument("--test-fraction", type=float, default=0.3)

    gen = sub.add_parser("gen-missing", help="emit a missing-value mask")
    gen.add_argument("--dataset", default="iris")
    gen.add_argument("--seed", type=int, default=1)
    _add_common_run_flags(gen)
    gen.add_argument("--out", required=True,
                     help="mask CSV path; a .json sidecar is written next to it")

    report = sub.add_parser("report", help="re-aggregate raw run reports")
    report.add_argument("--reports-dir", required=True)
    report.add_argument("--out", required=True, help="aggregate CSV path")

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _missing_model(args, seed: int) -> MissingSpecModel:
    return MissingSpecModel(
        ratio=args.ratio,
        pattern=Pattern(args.pattern),
        mtype=MissingType(args.mtype),
        situation=Situation(args.situation),
        seed=seed,
    )


def cmd_run(args) -> int:
    if args.config:
        request = RunRequest.model_validate_json(Path(args.config).read_text())
    else:
        request = RunRequest(
            dataset=args.dataset,
            formulation=Formulation(args.formulation),
            missing=_missing_model(args, args.seed),
            seed=args.seed,
            population_size=args.population_size,
            max_clusters=args.max_clusters,
            crossover_pool=args.crossover_pool,
            max_generations=args.max_generations,
            threshold=args.threshold,
            test_fraction=args.test_fraction,
            label_column=args.label_column,
        )
    response = dispatch(args.server, "/runs", request)
    report = response.report
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{response.run_id}.json").write_text(
            report.model_dump_json(indent=2)
        )
        history = "\n".join(h.model_dump_json() for h in response.history)
        if history:
            (out / f"{response.run_id}.history.ndjson").write_text(history + "\n")
    if report.failed:
        print(f"{response.run_id}: FAILED ({report.error})")
        return 1
    print(f"{response.run_id}: generations={report.generations} "
          f"front1={report.front1_size} cv_error={report.mean_cv_error:.4f} "
          f"imputed_test={report.imputed_test_error:.4f} "
          f"complete_test={report.complete_test_error:.4f} "
          f"time={report.elapsed_seconds:.1f}s")
    return 0


def cmd_matrix(args) -> int:
    request = MatrixRequest(
        datasets=args.datasets,
        formulations=[Formulation(f) for f in args.formulations],
        ratios=args.ratios,
        patterns=[Pattern(p) for p in args.patterns],
        mtypes=[MissingType(t) for t in args.mtypes],
        situations=[Situation(s) for s in args.situations],
        seeds=args.seeds,
        output_dir=args.output_dir,
        workers=args.workers,
        population_size=args.population_size,
        max_clusters=args.max_clusters,
        crossover_pool=args.crossover_pool,
        max_generations=args.max_generations,
        threshold=args.threshold,
        test_fraction=args.test_fraction,
    )
    response = dispatch(args.server, "/matrix", request)
    if args.server is not None:
        # remote artifacts live on the server; mirror the CSVs locally
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_reports_csv(response.reports, out / "runs.csv")
        _write_aggregate_csv(response.aggregate, out / "aggregate.csv")
    print(f"matrix: {response.total_runs} runs, {response.failures} failures, "
          f"reports in {response.output_dir}")
    return 1 if response.failures else 0


def _write_reports_csv(reports: list[RunReportModel], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for model in reports:
            writer.writerow(report_row(model.to_core()))


def _write_aggregate_csv(rows, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "subcategory", "situation", "runs",
                         "mean_seconds", "mean_front1_size", "mean_cv_error"])
        for row in rows:
            writer.writerow([row.category, row.subcategory, row.situation,
                             row.runs, row.mean_seconds, row.mean_front1_size,
                             row.mean_cv_error])


def cmd_gen_missing(args) -> int:
    request = MaskRequest(
        dataset=args.dataset,
        missing=_missing_model(args, args.seed),
        label_column=args.label_column,
    )
    response = dispatch(args.server, "/masks", request)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "column"])
        writer.writerows(response.cells)
    sidecar = out.with_suffix(".json")
    sidecar.write_text(json.dumps({
        "dataset": response.dataset,
        "rows": response.rows,
        "columns": response.columns,
        "missing_cells": response.missing_cells,
        "spec": json.loads(response.spec.model_dump_json()),
    }, indent=2))
    print(f"{response.missing_cells} masked cells -> {out} (+ {sidecar.name})")
    return 0


def cmd_report(args) -> int:
    reports = load_reports(args.reports_dir)
    if not reports:
        print(f"no reports found under {args.reports_dir}", file=sys.stderr)
        return 1
    request = AggregateRequest(
        reports=[RunReportModel.from_core(r) for r in reports]
    )
    response = dispatch(args.server, "/reports/aggregate", request)
    _write_aggregate_csv(response.aggregate, Path(args.out))
    print(f"aggregated {len(reports)} reports -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run(service.create_app(), host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    commands = {
        "run": cmd_run,
        "matrix": cmd_matrix,
        "gen-missing": cmd_gen_missing,
        "report": cmd_report,
        "serve": cmd_serve,
    }
    return commands[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
