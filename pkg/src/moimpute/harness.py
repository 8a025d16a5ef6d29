"""Experiment orchestration: single runs, the dataset x formulation x
missing-combination x situation matrix, resumable manifests, and report
aggregation.

All randomness in a run derives from one seed; a (config, seed) cell
always reproduces the same report (wall time aside).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace, asdict
from importlib import resources
from pathlib import Path
from time import perf_counter
import csv
import json
import os
import tempfile

import numpy as np

from .datasets import MaskedDataset, load_csv, normalize, split
from .evo import EvoConfig, GenerationStats, optimize
from .metrics import (
    REPORT_COLUMNS,
    RunReport,
    hypervolume,
    imputation_accuracy,
    nmi,
    report_row,
    test_errors,
)
from .missing import MissingSpec, Pattern, MissingType, Situation, apply_situation
from .objectives import Formulation

BUILTIN_DATASETS = ("iris", "zoo", "sonar")
DEFAULT_LABEL_COLUMN = "class"


class HarnessError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str                       # builtin id or a CSV path
    formulation: Formulation
    missing: MissingSpec
    seed: int = 1
    population_size: int = 54
    max_clusters: int = 10
    crossover_pool: int = 8
    max_generations: int = 100
    threshold: float = 0.0005
    test_fraction: float = 0.3
    label_column: str = DEFAULT_LABEL_COLUMN

    def run_id(self) -> str:
        return "_".join([
            Path(self.dataset).stem,
            self.formulation.value,
            f"r{self.missing.ratio:g}",
            self.missing.pattern.value,
            self.missing.mtype.value,
            self.missing.situation.value,
            f"s{self.seed}",
        ])


def dataset_path(name: str) -> Path:
    if name in BUILTIN_DATASETS:
        return Path(str(resources.files("moimpute").joinpath(f"data/{name}.csv")))
    return Path(name)


def load_dataset(name: str, label_column: str = DEFAULT_LABEL_COLUMN) -> MaskedDataset:
    return load_csv(dataset_path(name), label_column)


def _derived_seeds(seed: int) -> tuple[int, int, int]:
    state = np.random.SeedSequence([seed, 0x52554E]).generate_state(3)
    return int(state[0]), int(state[1]), int(state[2])


def _config_echo(cfg: ExperimentConfig) -> dict:
    return {
        "dataset": Path(cfg.dataset).stem,
        "formulation": cfg.formulation.value,
        "ratio": cfg.missing.ratio,
        "pattern": cfg.missing.pattern.value,
        "mtype": cfg.missing.mtype.value,
        "situation": cfg.missing.situation.value,
        "seed": cfg.seed,
        "population_size": cfg.population_size,
        "max_clusters": cfg.max_clusters,
        "crossover_pool": cfg.crossover_pool,
        "max_generations": cfg.max_generations,
        "threshold": cfg.threshold,
        "test_fraction": cfg.test_fraction,
    }


def run_experiment_detailed(
    cfg: ExperimentConfig,
) -> tuple[RunReport, list[GenerationStats]]:
    """Load -> normalize -> split -> mask -> optimize -> score.

    Failures are folded into the report rather than raised, so a matrix
    can continue past a bad cell.
    """
    echo = _config_echo(cfg)
    try:
        source = load_dataset(cfg.dataset, cfg.label_column)
        if source.mask.any():
            raise HarnessError(
                "experiment source data must be complete (masks are generated)"
            )
        split_seed, mask_seed, evo_seed = _derived_seeds(cfg.seed)
        normalized = normalize(source)
        train, test = split(normalized, cfg.test_fraction, split_seed)
        train_m, test_m = apply_situation(
            train, test, replace(cfg.missing, seed=mask_seed)
        )
        evo_cfg = EvoConfig(
            population_size=cfg.population_size,
            max_clusters=cfg.max_clusters,
            crossover_pool=cfg.crossover_pool,
            max_generations=cfg.max_generations,
            threshold=cfg.threshold,
            formulation=cfg.formulation,
            seed=evo_seed,
        )
        start = perf_counter()
        result = optimize(train_m, test_m, evo_cfg, collect_traces=True)
        elapsed = perf_counter() - start

        front_pairs = [e.objectives for e in result.front1]
        complete_test = np.where(test_m.mask, test_m.truth, test_m.base.features)
        complete_err, imputed_err = test_errors(
            result.front1,
            result.n_train,
            train_m.base.labels,
            test_m.base.labels,
            complete_test,
        )
        values, mask, truth = (
            np.vstack([train_m.base.features, test_m.base.features]),
            np.vstack([train_m.mask, test_m.mask]),
            np.vstack([train_m.truth, test_m.truth]),
        )
        accs = [imputation_accuracy(e.imputed, truth, mask) for e in result.front1]
        accs = [a for a in accs if a is not None]
        mae = float(np.mean([a[0] for a in accs])) if accs else None
        rmse = float(np.mean([a[1] for a in accs])) if accs else None

        traces = result.traces
        nmi_imp = nmi(traces.imputation_value, traces.rmse)
        nmi_model = nmi(traces.cv_error, traces.complete_test_error)

        report = RunReport(
            **echo,
            elapsed_seconds=elapsed,
            generations=len(result.history),
            stop_reason=result.stop_reason,
            front1_size=len(result.front1),
            mean_imputation_value=float(
                np.mean([p.imputation_value for p in front_pairs])
            ),
            mean_cv_error=float(np.mean([p.cv_error for p in front_pairs])),
            hypervolume=hypervolume(front_pairs),
            complete_test_error=complete_err,
            imputed_test_error=imputed_err,
            error_difference=imputed_err - complete_err,
            mae=mae,
            rmse=rmse,
            nmi_imputation=nmi_imp,
            nmi_model=nmi_model,
        )
        return report, result.history
    except Exception as exc:  # noqa: BLE001 - matrix cells must not abort
        return RunReport(**echo, failed=True, error=f"{type(exc).__name__}: {exc}"), []


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    return run_experiment_detailed(cfg)[0]


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def persist_run(
    report: RunReport, history: list[GenerationStats], out_dir: Path, run_id: str
) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / f"{run_id}.json"
    _atomic_write(report_path, report.to_json())
    if history:
        lines = [
            json.dumps({
                "generation": h.generation,
                "mean_imputation": h.mean_imputation,
                "mean_cv_error": h.mean_cv_error,
                "front1_size": h.front1_size,
                "elapsed_seconds": h.elapsed_seconds,
            })
            for h in history
        ]
        _atomic_write(out_dir / f"{run_id}.history.ndjson", "\n".join(lines) + "\n")
    return report_path


def grid_configs(
    datasets=BUILTIN_DATASETS,
    formulations=tuple(Formulation),
    ratios=(0.01, 0.05, 0.10, 0.25, 0.50),
    patterns=tuple(Pattern),
    mtypes=tuple(MissingType),
    situations=tuple(Situation),
    seeds=(1, 2, 3, 4, 5),
    **overrides,
) -> list[ExperimentConfig]:
    """Expand a (sub-)grid into experiment configs; the full default grid
    is 3 x 3 x 30 x 2 = 540 configurations per seed."""
    configs = []
    for dataset in datasets:
        for formulation in formulations:
            for ratio in ratios:
                for pattern in patterns:
                    for mtype in mtypes:
                        for situation in situations:
                            for seed in seeds:
                                configs.append(ExperimentConfig(
                                    dataset=dataset,
                                    formulation=Formulation(formulation),
                                    missing=MissingSpec(
                                        ratio=ratio,
                                        pattern=Pattern(pattern),
                                        mtype=MissingType(mtype),
                                        situation=Situation(situation),
                                    ),
                                    seed=seed,
                                    **overrides,
                                ))
    return configs


def _run_cell(cfg: ExperimentConfig):
    return cfg, run_experiment_detailed(cfg)


@dataclass
class MatrixResult:
    reports: list[RunReport]
    aggregate: list[dict]
    failures: int


def run_matrix(
    configs: list[ExperimentConfig],
    out_dir: str | Path,
    workers: int = 1,
) -> MatrixResult:
    """Execute a grid with a resumable on-disk manifest.

    Completed (config, seed) cells are skipped on restart; the manifest
    is only ever written by this (single) coordinating process.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.json"
    manifest: dict[str, str] = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())

    reports: dict[str, RunReport] = {}
    pending = []
    for cfg in configs:
        run_id = cfg.run_id()
        report_file = out_dir / manifest.get(run_id, f"{run_id}.json")
        if run_id in manifest and report_file.exists():
            reports[run_id] = RunReport.from_json(report_file.read_text())
        else:
            pending.append(cfg)

    def record(cfg, report, history):
        run_id = cfg.run_id()
        persist_run(report, history, out_dir, run_id)
        manifest[run_id] = f"{run_id}.json"
        _atomic_write(manifest_path, json.dumps(manifest, indent=2, sort_keys=True))
        reports[run_id] = report

    if workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for cfg, (report, history) in pool.map(_run_cell, pending):
                record(cfg, report, history)
    else:
        for cfg in pending:
            report, history = run_experiment_detailed(cfg)
            record(cfg, report, history)

    ordered = [reports[cfg.run_id()] for cfg in configs]
    aggregate = aggregate_reports(ordered)
    write_reports_csv(ordered, out_dir / "runs.csv")
    write_aggregate_csv(aggregate, out_dir / "aggregate.csv")
    failures = sum(1 for r in ordered if r.failed)
    return MatrixResult(reports=ordered, aggregate=aggregate, failures=failures)


AGGREGATE_CATEGORIES = (
    ("dataset", "dataset"),
    ("objective_function", "formulation"),
    ("ratio", "ratio"),
    ("pattern", "pattern"),
    ("type", "mtype"),
)
AGGREGATE_COLUMNS = [
    "category", "subcategory", "situation", "runs",
    "mean_seconds", "mean_front1_size", "mean_cv_error",
]


def aggregate_reports(reports: list[RunReport]) -> list[dict]:
    """Per-category/sub-category/situation means of time, first-front size
    and classification error (failed runs excluded, counted separately)."""
    ok = [r for r in reports if not r.failed]
    rows = []
    for category, attr in AGGREGATE_CATEGORIES:
        values = sorted({getattr(r, attr) for r in ok}, key=str)
        for value in values:
            for situation in sorted({r.situation for r in ok}):
                cell = [r for r in ok
                        if getattr(r, attr) == value and r.situation == situation]
                if not cell:
                    continue
                rows.append({
                    "category": category,
                    "subcategory": str(value),
                    "situation": situation,
                    "runs": len(cell),
                    "mean_seconds": float(np.mean([r.elapsed_seconds for r in cell])),
                    "mean_front1_size": float(np.mean([r.front1_size for r in cell])),
                    "mean_cv_error": float(np.mean([r.mean_cv_error for r in cell])),
                })
    return rows


def write_reports_csv(reports: list[RunReport], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for report in reports:
            writer.writerow(report_row(report))


def write_aggregate_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=AGGREGATE_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def load_reports(directory: str | Path) -> list[RunReport]:
    """Read every per-run report JSON under a directory."""
    reports = []
    for path in sorted(Path(directory).glob("*.json")):
        if path.name == "manifest.json":
            continue
        try:
            reports.append(RunReport.from_json(path.read_text()))
        except (json.JSONDecodeError, TypeError):
            continue
    return reports
