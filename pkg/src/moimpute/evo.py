"""Bi-objective evolutionary solver over variable-length chromosomes.

A chromosome bundles the imputation genes (fuzziness plus 2..K cluster
centers) with the classifier genes (cost, kernel kind, gamma, r, degree).
Each generation the non-dominated front is copied unchanged, the worse
half of the remainder is replaced by offspring of a best/worst four-parent
crossover, and the better half is mutated. The loop stops on a generation
cap, when either population-mean objective stalls, or when the whole
population is non-dominated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from time import perf_counter
from typing import Callable
import zlib

import numpy as np

from . import fuzzy, objectives, svm
from .datasets import MaskedDataset, concat_parts
from .objectives import Formulation, ObjectivePair

FUZZINESS_RANGE = (1.5, 5.0)
COST_RANGE = (0.01, 100.0)
GAMMA_RANGE = (0.005, 5.0)
KERNEL_R_RANGE = (0.0, 20.0)
DEGREE_RANGE = (2, 5)
KERNEL_KINDS = tuple(svm.KernelKind)


@dataclass(frozen=True)
class Chromosome:
    fuzziness: float
    centers: np.ndarray          # (c, m) in [0, 1]
    cost: float
    kernel: svm.KernelSpec

    def __post_init__(self):
        self.centers.flags.writeable = False

    @property
    def n_clusters(self) -> int:
        return self.centers.shape[0]

    def n_slots(self) -> int:
        """Scalar gene count: fuzziness + every center coordinate + the
        five classifier genes."""
        return 1 + self.centers.size + 5

    def key(self):
        return (
            self.fuzziness,
            self.centers.tobytes(),
            self.cost,
            self.kernel.kind,
            self.kernel.gamma,
            self.kernel.r,
            self.kernel.degree,
        )


@dataclass(frozen=True)
class EvoConfig:
    population_size: int = 54
    max_clusters: int = 10
    crossover_pool: int = 8
    max_generations: int = 100
    threshold: float = 0.0005
    formulation: Formulation = Formulation.ASW
    seed: int = 0

    def __post_init__(self):
        if self.population_size < self.crossover_pool:
            raise ValueError("population must be at least the crossover pool size")
        if self.max_clusters < 2:
            raise ValueError("max_clusters must be at least 2")


@dataclass
class EvaluatedChromosome:
    chromosome: Chromosome
    objectives: ObjectivePair
    imputed: np.ndarray           # concatenated imputed matrix (train rows first)
    front_rank: int = 0           # 1 = non-dominated; assigned by rank_fronts
    diagnostics: "ChromosomeDiagnostics | None" = None


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    mean_imputation: float
    mean_cv_error: float
    front1_size: int
    elapsed_seconds: float


@dataclass
class DiagnosticTraces:
    """Objective and ground-metric traces over every chromosome of every
    generation (population members carried unchanged re-enter each
    generation they survive)."""

    imputation_value: list[float] = field(default_factory=list)
    cv_error: list[float] = field(default_factory=list)
    mae: list[float] = field(default_factory=list)
    rmse: list[float] = field(default_factory=list)
    complete_test_error: list[float] = field(default_factory=list)

    def append(self, diag: "ChromosomeDiagnostics", pair: ObjectivePair) -> None:
        self.imputation_value.append(pair.imputation_value)
        self.cv_error.append(pair.cv_error)
        self.mae.append(diag.mae)
        self.rmse.append(diag.rmse)
        self.complete_test_error.append(diag.complete_test_error)


@dataclass(frozen=True)
class ChromosomeDiagnostics:
    """Ground metrics for one chromosome, computed once at evaluation."""

    mae: float
    rmse: float
    complete_test_error: float


@dataclass
class OptimizeResult:
    population: list[EvaluatedChromosome]
    front1: list[EvaluatedChromosome]
    history: list[GenerationStats]
    stop_reason: str
    traces: DiagnosticTraces | None
    n_train: int
    baseline: np.ndarray


def random_chromosome(cfg: EvoConfig, m: int, rng: np.random.Generator) -> Chromosome:
    c = int(rng.integers(2, cfg.max_clusters + 1))
    return Chromosome(
        fuzziness=float(rng.uniform(*FUZZINESS_RANGE)),
        centers=rng.random((c, m)),
        cost=float(rng.uniform(*COST_RANGE)),
        kernel=svm.KernelSpec(
            kind=KERNEL_KINDS[int(rng.integers(len(KERNEL_KINDS)))],
            gamma=float(rng.uniform(*GAMMA_RANGE)),
            r=float(rng.uniform(*KERNEL_R_RANGE)),
            degree=int(rng.integers(DEGREE_RANGE[0], DEGREE_RANGE[1] + 1)),
        ),
    )


def dominates(a: ObjectivePair, b: ObjectivePair) -> bool:
    """a dominates b when it is at least as good on both objectives and
    strictly better on one."""
    if a.imputation_value < b.imputation_value or a.cv_error > b.cv_error:
        return False
    return a.imputation_value > b.imputation_value or a.cv_error < b.cv_error


def rank_fronts(pop: list[EvaluatedChromosome]) -> list[int]:
    """Front ranks by iterative peeling (1 = non-dominated), computed with
    the usual dominated-count bookkeeping. Also writes front_rank on the
    population entries."""
    n = len(pop)
    objs = [e.objectives for e in pop]
    dominated_by = [0] * n
    dominates_list: list[list[int]] = [[] for _ in range(n)]
    for p in range(n):
        for q in range(p + 1, n):
            if dominates(objs[p], objs[q]):
                dominates_list[p].append(q)
                dominated_by[q] += 1
            elif dominates(objs[q], objs[p]):
                dominates_list[q].append(p)
                dominated_by[p] += 1
    ranks = [0] * n
    current = [i for i in range(n) if dominated_by[i] == 0]
    rank = 1
    while current:
        nxt = []
        for p in current:
            ranks[p] = rank
            pop[p].front_rank = rank
        for p in current:
            for q in dominates_list[p]:
                dominated_by[q] -= 1
                if dominated_by[q] == 0:
                    nxt.append(q)
        current = nxt
        rank += 1
    return ranks


def crossover_pair(pa: Chromosome, pb: Chromosome, rng: np.random.Generator) -> Chromosome:
    """One offspring from two parents.

    The offspring's cluster count copies a uniformly chosen parent; a
    binary mask over the shared gene units (fuzziness, the first
    min(c_a, c_b) centers as atomic blocks, and the five classifier
    genes) picks the donor per unit, False meaning the first parent.
    Centers beyond the shared prefix come from the length-setting parent.
    """
    length_parent = pa if rng.random() < 0.5 else pb
    c_min = min(pa.n_clusters, pb.n_clusters)
    mask = rng.integers(0, 2, size=1 + c_min + 5).astype(bool)

    def pick(unit, attr_a, attr_b):
        return attr_b if mask[unit] else attr_a

    centers = []
    for k in range(length_parent.n_clusters):
        if k < c_min:
            donor = pb if mask[1 + k] else pa
        else:
            donor = length_parent
        centers.append(donor.centers[k])
    return Chromosome(
        fuzziness=pick(0, pa.fuzziness, pb.fuzziness),
        centers=np.array(centers),
        cost=pick(1 + c_min, pa.cost, pb.cost),
        kernel=svm.KernelSpec(
            kind=pick(2 + c_min, pa.kernel.kind, pb.kernel.kind),
            gamma=pick(3 + c_min, pa.kernel.gamma, pb.kernel.gamma),
            r=pick(4 + c_min, pa.kernel.r, pb.kernel.r),
            degree=pick(5 + c_min, pa.kernel.degree, pb.kernel.degree),
        ),
    )


def _pool_roles(pool: list[EvaluatedChromosome]):
    imp = np.array([e.objectives.imputation_value for e in pool])
    err = np.array([e.objectives.cv_error for e in pool])
    return {
        "best_imp": int(np.argmax(imp)),
        "worst_imp": int(np.argmin(imp)),
        "best_err": int(np.argmin(err)),
        "worst_err": int(np.argmax(err)),
    }


def crossover_event(
    pop: list[EvaluatedChromosome], cfg: EvoConfig, rng: np.random.Generator
) -> list[Chromosome]:
    """Three offspring from one best/worst four-parent selection.

    A random pool of Cr chromosomes provides the per-objective best and
    worst parents; the pairs are best-imputation x best-error,
    best-imputation x worst-error, and best-error x worst-imputation.
    A degenerate pair (both roles on one chromosome) is retried on a
    fresh pool once, then falls back to mutating the parent.
    """
    def sample_pool():
        idx = rng.choice(len(pop), size=cfg.crossover_pool, replace=False)
        return [pop[i] for i in idx]

    pool = sample_pool()
    roles = _pool_roles(pool)
    offspring = []
    for role_a, role_b in (("best_imp", "best_err"),
                           ("best_imp", "worst_err"),
                           ("best_err", "worst_imp")):
        pa, pb = pool[roles[role_a]], pool[roles[role_b]]
        if pa is pb:
            retry = sample_pool()
            retry_roles = _pool_roles(retry)
            pa, pb = retry[retry_roles[role_a]], retry[retry_roles[role_b]]
        if pa is pb:
            offspring.append(mutate(pa.chromosome, rng))
        else:
            offspring.append(crossover_pair(pa.chromosome, pb.chromosome, rng))
    return offspring


def mutate(c: Chromosome, rng: np.random.Generator) -> Chromosome:
    """Resample a uniformly-sized random subset of scalar gene slots
    within their ranges; the cluster count never changes."""
    total = c.n_slots()
    count = int(rng.integers(1, total + 1))
    slots = rng.choice(total, size=count, replace=False)

    fuzziness = c.fuzziness
    centers = c.centers.copy()
    cost = c.cost
    kind, gamma, r, degree = (c.kernel.kind, c.kernel.gamma,
                              c.kernel.r, c.kernel.degree)
    n_coords = centers.size
    flat = centers.reshape(-1)
    for slot in slots:
        if slot == 0:
            fuzziness = float(rng.uniform(*FUZZINESS_RANGE))
        elif slot <= n_coords:
            flat[slot - 1] = rng.random()
        elif slot == n_coords + 1:
            cost = float(rng.uniform(*COST_RANGE))
        elif slot == n_coords + 2:
            kind = KERNEL_KINDS[int(rng.integers(len(KERNEL_KINDS)))]
        elif slot == n_coords + 3:
            gamma = float(rng.uniform(*GAMMA_RANGE))
        elif slot == n_coords + 4:
            r = float(rng.uniform(*KERNEL_R_RANGE))
        else:
            degree = int(rng.integers(DEGREE_RANGE[0], DEGREE_RANGE[1] + 1))
    return Chromosome(
        fuzziness=fuzziness,
        centers=centers,
        cost=cost,
        kernel=svm.KernelSpec(kind=kind, gamma=gamma, r=r, degree=degree),
    )


def should_stop(
    history: list[GenerationStats], front1_size: int, cfg: EvoConfig
) -> tuple[bool, str]:
    """Stopping test after a completed generation."""
    if front1_size == cfg.population_size:
        return True, "front1_covers_population"
    if len(history) >= cfg.max_generations:
        return True, "max_generations"
    if len(history) >= 2:
        prev, last = history[-2], history[-1]
        if abs(last.mean_imputation - prev.mean_imputation) < cfg.threshold:
            return True, "imputation_objective_stalled"
        if abs(last.mean_cv_error - prev.mean_cv_error) < cfg.threshold:
            return True, "cv_error_stalled"
    return False, ""


class Evaluator:
    """Turns a chromosome into objectives (plus the imputed matrix).

    Evaluation is a pure function of (chromosome, baseline, data, run
    seed); failures downgrade the affected objective to its worst value
    instead of aborting the run. The CV fold assignment is seeded from the
    run seed and the chromosome's genes, so every chromosome carries its
    own (deterministic) fold draw; a run-constant assignment would make
    the CV error a function of the five classifier genes alone whenever
    the train part is complete, collapsing the first front to a point.
    """

    def __init__(
        self,
        train: MaskedDataset,
        test: MaskedDataset,
        formulation: Formulation,
        cv_seed: int,
        collect_traces: bool = False,
    ):
        self.values, self.mask, self.truth = concat_parts(train, test)
        self.n_train = train.n
        self.labels = train.base.labels
        self.test_labels = test.base.labels
        self.formulation = formulation
        self.cv_seed = cv_seed
        self.baseline = fuzzy.mean_impute(self.values, self.mask)
        self._cache: dict[tuple, tuple] = {}
        self.traces = DiagnosticTraces() if collect_traces else None
        if collect_traces:
            # ground truth for the diagnostic traces (experiments mask a
            # complete dataset, so the true test features are recoverable)
            if test.truth is None:
                self.complete_test = test.base.features
            else:
                self.complete_test = np.where(test.mask, test.truth, test.base.features)

    def fold_seed(self, chromosome: Chromosome) -> int:
        digest = zlib.crc32(repr(chromosome.key()).encode())
        return (self.cv_seed ^ digest) & 0x7FFFFFFF

    def evaluate(self, chromosome: Chromosome) -> EvaluatedChromosome:
        key = chromosome.key()
        if key in self._cache:
            pair, imputed, diag = self._cache[key]
            return EvaluatedChromosome(chromosome=chromosome, objectives=pair,
                                       imputed=imputed, diagnostics=diag)
        cfg = fuzzy.ClusterConfig(chromosome.centers, chromosome.fuzziness)
        u = fuzzy.memberships(self.baseline, cfg)
        imputed = np.where(self.mask, u @ cfg.centers, self.values)

        try:
            assignment = np.argmax(u, axis=1)
            imp_value = objectives.imputation_objective(
                self.formulation, imputed, self.n_train, assignment
            )
        except objectives.ObjectiveUndefinedError:
            imp_value = objectives.WORST_IMPUTATION_VALUE[self.formulation]

        try:
            cv_err = objectives.model_selection_obj(
                imputed[: self.n_train], self.labels,
                chromosome.cost, chromosome.kernel, self.fold_seed(chromosome),
            )
        except svm.SvmConvergenceError:
            cv_err = objectives.WORST_CV_ERROR

        pair = ObjectivePair(imp_value, cv_err, self.formulation)
        diag = self._diagnostics(chromosome, imputed) if self.traces is not None else None
        self._cache[key] = (pair, imputed, diag)
        return EvaluatedChromosome(chromosome=chromosome, objectives=pair,
                                   imputed=imputed, diagnostics=diag)

    def _diagnostics(self, chromosome, imputed) -> ChromosomeDiagnostics:
        masked = (
            self.mask & ~np.isnan(self.truth) if self.truth is not None
            else np.zeros_like(self.mask)
        )
        if masked.any():
            err = imputed[masked] - self.truth[masked]
            mae = float(np.abs(err).mean())
            rmse = float(np.sqrt((err ** 2).mean()))
        else:
            mae = rmse = 0.0
        try:
            model = svm.train_multiclass(
                imputed[: self.n_train], self.labels,
                chromosome.cost, chromosome.kernel,
            )
            pred = model.predict(self.complete_test)
            test_error = float((pred != self.test_labels).mean())
        except svm.SvmConvergenceError:
            test_error = 1.0
        return ChromosomeDiagnostics(mae=mae, rmse=rmse,
                                     complete_test_error=test_error)


def step(
    pop: list[EvaluatedChromosome],
    cfg: EvoConfig,
    rng: np.random.Generator,
    evaluator: Evaluator,
) -> list[EvaluatedChromosome]:
    """One generation: keep the first front, replace the worse-ranked half
    of the rest with crossover offspring, mutate the better-ranked half."""
    elites = [e for e in pop if e.front_rank == 1]
    others = [e for e in pop if e.front_rank != 1]
    q = len(others)
    if q == 0:
        return list(pop)
    n_mut = int(np.floor(q / 2 + 0.5))
    n_off = q - n_mut

    by_rank: dict[int, list[EvaluatedChromosome]] = {}
    for e in others:
        by_rank.setdefault(e.front_rank, []).append(e)
    worst_first: list[EvaluatedChromosome] = []
    for rank in sorted(by_rank, reverse=True):
        group = by_rank[rank]
        order = rng.permutation(len(group))
        worst_first.extend(group[i] for i in order)

    offspring: list[Chromosome] = []
    while len(offspring) < n_off:
        offspring.extend(crossover_event(pop, cfg, rng))
    if len(offspring) > n_off:
        keep = rng.choice(len(offspring), size=n_off, replace=False)
        offspring = [offspring[i] for i in sorted(keep)]

    mutants = [mutate(e.chromosome, rng) for e in worst_first[n_off:]]

    next_pop = list(elites)
    next_pop.extend(evaluator.evaluate(c) for c in offspring)
    next_pop.extend(evaluator.evaluate(c) for c in mutants)
    assert len(next_pop) == cfg.population_size
    return next_pop


def optimize(
    train: MaskedDataset,
    test: MaskedDataset,
    cfg: EvoConfig,
    collect_traces: bool = False,
    on_generation: Callable[[GenerationStats], None] | None = None,
) -> OptimizeResult:
    """Run the full loop on a masked train/test pair.

    Deterministic given (inputs, cfg.seed); per-generation statistics are
    reported through on_generation as they are produced.
    """
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x45564F]))
    cv_seed = int(np.random.SeedSequence([cfg.seed, 0x4356]).generate_state(1)[0])
    evaluator = Evaluator(train, test, cfg.formulation, cv_seed, collect_traces)

    m = train.m
    start = perf_counter()
    pop = [evaluator.evaluate(random_chromosome(cfg, m, rng))
           for _ in range(cfg.population_size)]
    rank_fronts(pop)
    history: list[GenerationStats] = []

    def record(generation):
        front1 = sum(1 for e in pop if e.front_rank == 1)
        stats = GenerationStats(
            generation=generation,
            mean_imputation=float(np.mean([e.objectives.imputation_value for e in pop])),
            mean_cv_error=float(np.mean([e.objectives.cv_error for e in pop])),
            front1_size=front1,
            elapsed_seconds=perf_counter() - start,
        )
        history.append(stats)
        if evaluator.traces is not None:
            for e in pop:
                evaluator.traces.append(e.diagnostics, e.objectives)
        if on_generation is not None:
            on_generation(stats)
        return front1

    front1 = record(1)
    while True:
        stop, reason = should_stop(history, front1, cfg)
        if stop:
            break
        pop = step(pop, cfg, rng, evaluator)
        rank_fronts(pop)
        front1 = record(history[-1].generation + 1)

    return OptimizeResult(
        population=pop,
        front1=[e for e in pop if e.front_rank == 1],
        history=history,
        stop_reason=reason,
        traces=evaluator.traces,
        n_train=evaluator.n_train,
        baseline=evaluator.baseline,
    )
