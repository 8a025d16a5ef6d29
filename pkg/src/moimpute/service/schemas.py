"""Request/response models for the HTTP API.

These mirror the core config and report types; conversion helpers keep
the service layer free of numpy types.
"""

from __future__ import annotations

from dataclasses import asdict

from pydantic import BaseModel, Field

from ..harness import ExperimentConfig
from ..metrics import RunReport
from ..missing import MissingSpec, MissingType, Pattern, Situation
from ..objectives import Formulation


class HealthResponse(BaseModel):
    status: str
    version: str


class MissingSpecModel(BaseModel):
    ratio: float = Field(ge=0.0, lt=1.0)
    pattern: Pattern = Pattern.SIMPLE
    mtype: MissingType = MissingType.OVERALL
    situation: Situation = Situation.TEST_ONLY
    seed: int = 0

    def to_core(self) -> MissingSpec:
        return MissingSpec(ratio=self.ratio, pattern=self.pattern,
                           mtype=self.mtype, situation=self.situation,
                           seed=self.seed)


class RunRequest(BaseModel):
    dataset: str
    formulation: Formulation
    missing: MissingSpecModel
    seed: int = 1
    population_size: int = Field(default=54, ge=4)
    max_clusters: int = Field(default=10, ge=2)
    crossover_pool: int = Field(default=8, ge=4)
    max_generations: int = Field(default=100, ge=1)
    threshold: float = Field(default=0.0005, ge=0.0)
    test_fraction: float = Field(default=0.3, gt=0.0, lt=1.0)
    label_column: str = "class"

    def to_core(self) -> ExperimentConfig:
        return ExperimentConfig(
            dataset=self.dataset,
            formulation=self.formulation,
            missing=self.missing.to_core(),
            seed=self.seed,
            population_size=self.population_size,
            max_clusters=self.max_clusters,
            crossover_pool=self.crossover_pool,
            max_generations=self.max_generations,
            threshold=self.threshold,
            test_fraction=self.test_fraction,
            label_column=self.label_column,
        )


class GenerationRecord(BaseModel):
    generation: int
    mean_imputation: float
    mean_cv_error: float
    front1_size: int
    elapsed_seconds: float


class RunReportModel(BaseModel):
    dataset: str
    formulation: str
    ratio: float
    pattern: str
    mtype: str
    situation: str
    seed: int
    population_size: int
    max_clusters: int
    crossover_pool: int
    max_generations: int
    threshold: float
    test_fraction: float
    failed: bool
    error: str | None
    elapsed_seconds: float | None
    generations: int | None
    stop_reason: str | None
    front1_size: int | None
    mean_imputation_value: float | None
    mean_cv_error: float | None
    hypervolume: float | None
    complete_test_error: float | None
    imputed_test_error: float | None
    error_difference: float | None
    mae: float | None
    rmse: float | None
    nmi_imputation: float | None
    nmi_model: float | None

    @classmethod
    def from_core(cls, report: RunReport) -> "RunReportModel":
        return cls(**asdict(report))

    def to_core(self) -> RunReport:
        return RunReport(**self.model_dump())


class RunResponse(BaseModel):
    run_id: str
    report: RunReportModel
    history: list[GenerationRecord]


class MatrixRequest(BaseModel):
    datasets: list[str] = ["iris", "zoo", "sonar"]
    formulations: list[Formulation] = list(Formulation)
    ratios: list[float] = [0.01, 0.05, 0.10, 0.25, 0.50]
    patterns: list[Pattern] = list(Pattern)
    mtypes: list[MissingType] = list(MissingType)
    situations: list[Situation] = list(Situation)
    seeds: list[int] = [1, 2, 3, 4, 5]
    output_dir: str
    workers: int = Field(default=1, ge=1)
    population_size: int = Field(default=54, ge=4)
    max_clusters: int = Field(default=10, ge=2)
    crossover_pool: int = Field(default=8, ge=4)
    max_generations: int = Field(default=100, ge=1)
    threshold: float = Field(default=0.0005, ge=0.0)
    test_fraction: float = Field(default=0.3, gt=0.0, lt=1.0)


class AggregateRow(BaseModel):
    category: str
    subcategory: str
    situation: str
    runs: int
    mean_seconds: float
    mean_front1_size: float
    mean_cv_error: float


class MatrixResponse(BaseModel):
    total_runs: int
    failures: int
    output_dir: str
    reports: list[RunReportModel]
    aggregate: list[AggregateRow]


class MaskRequest(BaseModel):
    dataset: str
    missing: MissingSpecModel
    label_column: str = "class"


class MaskResponse(BaseModel):
    dataset: str
    rows: int
    columns: int
    missing_cells: int
    cells: list[tuple[int, int]]
    spec: MissingSpecModel


class AggregateRequest(BaseModel):
    reports: list[RunReportModel]


class AggregateResponse(BaseModel):
    aggregate: list[AggregateRow]
