"""FastAPI service wrapping the experiment harness.

Endpoints run synchronously: an experiment request blocks until its
report is ready, which suits the desk-scale workloads this serves. File
artifacts (reports, manifests, aggregates) are written on the service
side; responses always carry the full payload as well.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..harness import (
    BUILTIN_DATASETS,
    aggregate_reports,
    grid_configs,
    load_dataset,
    persist_run,
    run_experiment_detailed,
    run_matrix,
)
from ..missing import generate_missing, mask_to_pairs
from ..datasets import DataError, normalize
from ..missing import InfeasibleMaskError
from .schemas import (
    AggregateRequest,
    AggregateResponse,
    AggregateRow,
    GenerationRecord,
    HealthResponse,
    MaskRequest,
    MaskResponse,
    MatrixRequest,
    MatrixResponse,
    RunReportModel,
    RunRequest,
    RunResponse,
)


def run_single(request: RunRequest) -> RunResponse:
    cfg = request.to_core()
    report, history = run_experiment_detailed(cfg)
    return RunResponse(
        run_id=cfg.run_id(),
        report=RunReportModel.from_core(report),
        history=[GenerationRecord(
            generation=h.generation,
            mean_imputation=h.mean_imputation,
            mean_cv_error=h.mean_cv_error,
            front1_size=h.front1_size,
            elapsed_seconds=h.elapsed_seconds,
        ) for h in history],
    )


def run_grid(request: MatrixRequest) -> MatrixResponse:
    configs = grid_configs(
        datasets=request.datasets,
        formulations=request.formulations,
        ratios=request.ratios,
        patterns=request.patterns,
        mtypes=request.mtypes,
        situations=request.situations,
        seeds=request.seeds,
        population_size=request.population_size,
        max_clusters=request.max_clusters,
        crossover_pool=request.crossover_pool,
        max_generations=request.max_generations,
        threshold=request.threshold,
        test_fraction=request.test_fraction,
    )
    result = run_matrix(configs, request.output_dir, workers=request.workers)
    return MatrixResponse(
        total_runs=len(result.reports),
        failures=result.failures,
        output_dir=request.output_dir,
        reports=[RunReportModel.from_core(r) for r in result.reports],
        aggregate=[AggregateRow(**row) for row in result.aggregate],
    )


def make_mask(request: MaskRequest) -> MaskResponse:
    masked = load_dataset(request.dataset, request.label_column)
    if masked.mask.any():
        raise DataError("mask generation needs complete source data")
    complete = normalize(masked).base
    generated = generate_missing(complete, request.missing.to_core())
    return MaskResponse(
        dataset=request.dataset,
        rows=generated.n,
        columns=generated.m,
        missing_cells=generated.missing_count(),
        cells=mask_to_pairs(generated),
        spec=request.missing,
    )


def aggregate(request: AggregateRequest) -> AggregateResponse:
    reports = [model.to_core() for model in request.reports]
    return AggregateResponse(
        aggregate=[AggregateRow(**row) for row in aggregate_reports(reports)]
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="moimpute",
        version=__version__,
        description=(
            "Learn classifiers from incomplete tabular data by jointly "
            "optimizing fuzzy-clustering imputation and SVM model selection."
        ),
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/datasets", response_model=list[str])
    def datasets() -> list[str]:
        return list(BUILTIN_DATASETS)

    @app.post("/runs", response_model=RunResponse)
    def runs(request: RunRequest) -> RunResponse:
        return run_single(request)

    @app.post("/matrix", response_model=MatrixResponse)
    def matrix(request: MatrixRequest) -> MatrixResponse:
        return run_grid(request)

    @app.post("/masks", response_model=MaskResponse)
    def masks(request: MaskRequest) -> MaskResponse:
        try:
            return make_mask(request)
        except (DataError, InfeasibleMaskError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/reports/aggregate", response_model=AggregateResponse)
    def reports_aggregate(request: AggregateRequest) -> AggregateResponse:
        return aggregate(request)

    return app
