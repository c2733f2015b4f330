"""Declarative benchmark runner, learning curves, and the timing probe.

A benchmark spec names datasets and protocol parameters; running it trains
the classifier on each task's training targets for every repetition of the
split plan, fixes or cross-validates the decision threshold, scores the test
split, and aggregates Gmean per task as mean and standard deviation in
percent, plus an unweighted overall average row. Reports are delimited text
with a commented header; everything above the timing section is a pure
function of (spec, seed) and reproduces byte for byte.

Seed streams, all derived from the master seed with refold.rng.derive_seed:
split plan of task t -> (t, 1); threshold CV of task t repetition r ->
(t, 2, r) for the folding classifier and (t, 3, r) for the baseline.
"""

from __future__ import annotations

import hashlib
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    ClassifierConfig,
    DEFAULT_DISTANCE,
    DEFAULT_FOLD,
    DEFAULT_ITERATIONS,
    DEFAULT_THRESHOLD,
    _fold_matrix,
    distance_to_origin,
    score,
    train_ref,
)
from .datasets import Dataset, load_dataset, load_registry_dataset, registry, resolve_data_dir
from .errors import ConfigError, DataFormatError
from .evaluation import (
    DEFAULT_CV_FOLDS,
    DEFAULT_REPETITIONS,
    DEFAULT_THRESHOLD_GRID,
    DEFAULT_TRAIN_FRACTION,
    confusion_from_scores,
    gmean,
    make_occ_tasks,
    make_split_plan,
    select_threshold,
)
from .rng import GENERATOR_NAME, derive_seed

REPORT_VERSION = "refold-bench-report-v1"
CURVE_VERSION = "refold-curve-v1"
PROBE_VERSION = "refold-probe-v1"

_SPLIT_STREAM = 1
_REF_CV_STREAM = 2
_BASE_CV_STREAM = 3


@dataclass(frozen=True)
class BenchSpec:
    """Everything needed to reproduce one benchmark run."""

    datasets: tuple[str, ...]
    fold: str = DEFAULT_FOLD
    dist: str = DEFAULT_DISTANCE
    iterations: int = DEFAULT_ITERATIONS
    threshold_mode: str = "fixed"
    threshold: float = DEFAULT_THRESHOLD
    grid: tuple[float, ...] = DEFAULT_THRESHOLD_GRID
    cv_folds: int = DEFAULT_CV_FOLDS
    train_fraction: float = DEFAULT_TRAIN_FRACTION
    repetitions: int = DEFAULT_REPETITIONS
    seed: int = 0
    include_base: bool = False

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "grid", tuple(float(t) for t in self.grid))
        if not self.datasets:
            raise ConfigError("spec lists no datasets")
        ClassifierConfig(self.fold, self.iterations, self.dist)  # validates
        if self.threshold_mode not in ("fixed", "grid"):
            raise ConfigError(
                f"threshold_mode must be 'fixed' or 'grid', got {self.threshold_mode!r}"
            )
        if self.threshold_mode == "fixed" and not self.threshold > 0:
            raise ConfigError("fixed threshold must be > 0")
        if self.threshold_mode == "grid":
            if not self.grid or any(t <= 0 for t in self.grid) or any(
                b <= a for a, b in zip(self.grid, self.grid[1:])
            ):
                raise ConfigError("grid must be strictly increasing and positive")
            if self.cv_folds < 2:
                raise ConfigError("grid mode needs cv_folds >= 2")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must be in (0, 1)")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")

    @property
    def config(self) -> ClassifierConfig:
        return ClassifierConfig(self.fold, self.iterations, self.dist)


_SPEC_KEYS = (
    "datasets", "fold", "dist", "iterations", "threshold_mode", "threshold",
    "grid", "cv_folds", "train_fraction", "repetitions", "seed", "include_base",
)


def parse_bench_spec(text: str) -> BenchSpec:
    """Parse the key = value spec format; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"spec line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _SPEC_KEYS:
            raise ConfigError(f"spec line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"spec line {lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    if "datasets" not in values:
        raise ConfigError("spec is missing the 'datasets' key")

    def _list(v):
        return tuple(x for x in v.replace(",", " ").split() if x)

    def _bool(v):
        if v.lower() in ("true", "yes", "1"):
            return True
        if v.lower() in ("false", "no", "0"):
            return False
        raise ConfigError(f"expected a boolean, got {v!r}")

    kwargs = {"datasets": _list(values["datasets"])}
    try:
        if "fold" in values:
            kwargs["fold"] = values["fold"]
        if "dist" in values:
            kwargs["dist"] = values["dist"]
        if "iterations" in values:
            kwargs["iterations"] = int(values["iterations"])
        if "threshold_mode" in values:
            kwargs["threshold_mode"] = values["threshold_mode"]
        if "threshold" in values:
            kwargs["threshold"] = float(values["threshold"])
        if "grid" in values:
            kwargs["grid"] = tuple(float(t) for t in _list(values["grid"]))
        if "cv_folds" in values:
            kwargs["cv_folds"] = int(values["cv_folds"])
        if "train_fraction" in values:
            kwargs["train_fraction"] = float(values["train_fraction"])
        if "repetitions" in values:
            kwargs["repetitions"] = int(values["repetitions"])
        if "seed" in values:
            kwargs["seed"] = int(values["seed"])
        if "include_base" in values:
            kwargs["include_base"] = _bool(values["include_base"])
    except ValueError as exc:
        raise ConfigError(f"bad spec value: {exc}") from None
    return BenchSpec(**kwargs)


def read_bench_spec(path) -> BenchSpec:
    with open(os.fspath(path), "r", encoding="utf-8") as fh:
        return parse_bench_spec(fh.read())


def serialize_bench_spec(spec: BenchSpec) -> str:
    """Canonical textual form; its hash identifies the run in reports."""
    lines = [
        "datasets = " + ", ".join(spec.datasets),
        f"fold = {spec.fold}",
        f"dist = {spec.dist}",
        f"iterations = {spec.iterations}",
        f"threshold_mode = {spec.threshold_mode}",
        f"threshold = {_fmt(spec.threshold)}",
        "grid = " + ", ".join(_fmt(t) for t in spec.grid),
        f"cv_folds = {spec.cv_folds}",
        f"train_fraction = {_fmt(spec.train_fraction)}",
        f"repetitions = {spec.repetitions}",
        f"seed = {spec.seed}",
        f"include_base = {'true' if spec.include_base else 'false'}",
    ]
    return "\n".join(lines) + "\n"


def spec_hash(spec: BenchSpec) -> str:
    return hashlib.sha256(serialize_bench_spec(spec).encode("utf-8")).hexdigest()[:16]


def _fmt(x: float) -> str:
    return "%.17g" % x


@dataclass(frozen=True)
class RunRecord:
    """One (model variant, task, repetition) evaluation."""

    model: str  # "ref" or "base"
    task: str
    repetition: int  # 1-based
    split_seed: int
    threshold: float
    tp: int
    fn: int
    tn: int
    fp: int
    gmean: float
    seconds: float


@dataclass(frozen=True)
class TaskSummary:
    model: str
    task: str
    mean_pct: float
    std_pct: float


@dataclass(frozen=True)
class BenchReport:
    spec: BenchSpec
    runs: tuple[RunRecord, ...]
    summaries: tuple[TaskSummary, ...]
    notes: tuple[tuple[str, str], ...]  # (dataset name, note)

    def deterministic_text(self) -> str:
        lines = [
            f"# {REPORT_VERSION}",
            f"# spec-hash: {spec_hash(self.spec)}",
            f"# seed: {self.spec.seed}",
            f"# prng: {GENERATOR_NAME}",
            "# protocol: stratified split, train size = floor(fraction * class size),"
            " summary std uses the N-1 divisor",
        ]
        for name, note in self.notes:
            lines.append(f"# note[{name}]: {note}")
        lines.append("run,model,task,repetition,split_seed,threshold,tp,fn,tn,fp,gmean")
        for r in self.runs:
            lines.append(
                f"run,{r.model},{r.task},{r.repetition},{r.split_seed},"
                f"{_fmt(r.threshold)},{r.tp},{r.fn},{r.tn},{r.fp},{_fmt(r.gmean)}"
            )
        lines.append("summary,model,task,mean_gmean_pct,std_gmean_pct")
        for s in self.summaries:
            lines.append(f"summary,{s.model},{s.task},{s.mean_pct:.1f},{s.std_pct:.1f}")
        return "\n".join(lines) + "\n"

    def text(self) -> str:
        lines = [self.deterministic_text()]
        lines.append("# timing below is wall-clock and excluded from the deterministic body\n")
        for r in self.runs:
            lines.append(f"timing,{r.model},{r.task},{r.repetition},{r.seconds:.6f}\n")
        return "".join(lines)

    def write(self, path) -> None:
        with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.text())

    def summary_for(self, model: str, task: str) -> TaskSummary:
        for s in self.summaries:
            if s.model == model and s.task == task:
                return s
        raise KeyError(f"no summary for ({model}, {task})")


def mean_std(values) -> tuple[float, float]:
    """Mean and sample standard deviation; std is 0.0 for a single value."""
    vals = list(values)
    m = sum(vals) / len(vals)
    if len(vals) < 2:
        return m, 0.0
    var = sum((v - m) ** 2 for v in vals) / (len(vals) - 1)
    return m, var ** 0.5


def resolve_benchmark_dataset(name: str, data_dir: str | None = None) -> Dataset:
    """Registry name, or a path to a delimited file with the default schema."""
    if name in registry():
        return load_registry_dataset(name, data_dir)
    candidates = [name, os.path.join(resolve_data_dir(data_dir), name)]
    for path in candidates:
        if os.path.isfile(path):
            return load_dataset(path)
    raise DataFormatError(
        f"dataset {name!r} is neither a manifest name ({', '.join(sorted(registry()))}) "
        "nor an existing file"
    )


def _resolve_tasks(spec: BenchSpec, data_dir):
    """Datasets and their tasks in spec order, with global task ordinals."""
    resolved = []
    seen = set()
    ordinal = 0
    for name in spec.datasets:
        ds = resolve_benchmark_dataset(name, data_dir)
        for task in make_occ_tasks(ds):
            if task.name in seen:
                raise ConfigError(f"duplicate task name {task.name!r} in spec datasets")
            seen.add(task.name)
            resolved.append((ordinal, ds, task))
            ordinal += 1
    return resolved


def _run_cell(spec: BenchSpec, ds: Dataset, task, ordinal: int, rep: int):
    """Evaluate one task repetition; returns RunRecords (ref, maybe base)."""
    plan = make_split_plan(
        ds.labels,
        task.target_class,
        spec.train_fraction,
        spec.repetitions,
        seed=derive_seed(spec.seed, ordinal, _SPLIT_STREAM),
    )
    train_idx, test_idx = plan.splits[rep]
    split_seed = derive_seed(plan.seed, rep)
    flags = np.array([lab == task.target_class for lab in ds.labels])
    fit_rows = [i for i in train_idx if flags[i]]
    test_rows = list(test_idx)
    test_flags = flags[test_rows]
    test_X = ds.features[test_rows]

    records = []
    variants = [("ref", spec.config, _REF_CV_STREAM)]
    if spec.include_base:
        variants.append(("base", replace(spec.config, iterations=1), _BASE_CV_STREAM))
    for model_name, config, cv_stream in variants:
        started = time.perf_counter()
        if spec.threshold_mode == "grid":
            threshold = select_threshold(
                ds.features[list(train_idx)],
                flags[list(train_idx)],
                config,
                spec.grid,
                k=spec.cv_folds,
                seed=derive_seed(spec.seed, ordinal, cv_stream, rep),
            )
        else:
            threshold = spec.threshold
        model = train_ref(ds.features[fit_rows], config.iterations, config.fold)
        scores = score(test_X, model, config.dist)
        result = gmean(confusion_from_scores(scores, test_flags, threshold))
        elapsed = time.perf_counter() - started
        records.append(
            RunRecord(
                model=model_name,
                task=task.name,
                repetition=rep + 1,
                split_seed=split_seed,
                threshold=threshold,
                tp=result.counts.tp,
                fn=result.counts.fn,
                tn=result.counts.tn,
                fp=result.counts.fp,
                gmean=result.gmean,
                seconds=elapsed,
            )
        )
    return records


def run_benchmark(spec: BenchSpec, data_dir: str | None = None, jobs: int = 1) -> BenchReport:
    """Execute the spec; deterministic given (spec, seed) regardless of jobs."""
    resolved = _resolve_tasks(spec, data_dir)
    cells = [
        (ordinal, ds, task, rep)
        for ordinal, ds, task in resolved
        for rep in range(spec.repetitions)
    ]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(
                pool.map(lambda c: _run_cell(spec, c[1], c[2], c[0], c[3]), cells)
            )
    else:
        results = [_run_cell(spec, ds, task, ordinal, rep) for ordinal, ds, task, rep in cells]

    by_model: dict[str, dict[str, list[RunRecord]]] = {}
    runs = []
    for cell_records in results:
        for rec in cell_records:
            runs.append(rec)
            by_model.setdefault(rec.model, {}).setdefault(rec.task, []).append(rec)
    # fixed emission order: all ref rows in task/rep order, then base rows
    task_order = [task.name for _, _, task in resolved]
    ordered_runs = []
    summaries = []
    for model_name in ("ref", "base"):
        if model_name not in by_model:
            continue
        per_task = by_model[model_name]
        task_means = []
        task_stds = []
        for task_name in task_order:
            recs = sorted(per_task[task_name], key=lambda r: r.repetition)
            ordered_runs.extend(recs)
            m, s = mean_std([100.0 * r.gmean for r in recs])
            task_means.append(m)
            task_stds.append(s)
            summaries.append(TaskSummary(model_name, task_name, m, s))
        # overall row: unweighted mean over tasks, in both columns
        overall_mean = sum(task_means) / len(task_means)
        overall_std = sum(task_stds) / len(task_stds)
        summaries.append(TaskSummary(model_name, "Aver.", overall_mean, overall_std))

    notes = []
    reg = registry()
    for name in spec.datasets:
        if name in reg and reg[name].note:
            notes.append((name, reg[name].note))
    return BenchReport(
        spec=spec, runs=tuple(ordered_runs), summaries=tuple(summaries), notes=tuple(notes)
    )


# ------------------------------------------------------------ learning curve

@dataclass(frozen=True)
class LearningCurve:
    """Test Gmean at every truncation depth 1..J of one trained model."""

    task: str
    repetition: int  # 1-based
    threshold: float
    dist: str
    gmeans: tuple[float, ...]

    def text(self) -> str:
        lines = [
            f"# {CURVE_VERSION}",
            f"# task: {self.task}",
            f"# repetition: {self.repetition}",
            f"# threshold: {_fmt(self.threshold)}",
            f"# dist: {self.dist}",
            "iteration,gmean",
        ]
        for i, g in enumerate(self.gmeans, start=1):
            lines.append(f"{i},{_fmt(g)}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.text())


def learning_curve(
    spec: BenchSpec, task_name: str, repetition: int, data_dir: str | None = None
) -> LearningCurve:
    """Gmean versus iteration depth for one task and repetition (1-based).

    Trains the full J-step model once and replays the test set through the
    step sequence, scoring at every depth; step i depends only on earlier
    steps, so truncated models need no retraining. Defined for fixed
    thresholds only.
    """
    if spec.threshold_mode != "fixed":
        raise ConfigError("learning curves are defined for fixed thresholds only")
    if not 1 <= repetition <= spec.repetitions:
        raise ConfigError(
            f"repetition {repetition} outside 1..{spec.repetitions}"
        )
    for ordinal, ds, task in _resolve_tasks(spec, data_dir):
        if task.name == task_name:
            return _curve_for(spec, ds, task, ordinal, repetition - 1)
    raise ConfigError(f"task {task_name!r} not produced by this spec's datasets")


def _curve_for(spec, ds, task, ordinal, rep) -> LearningCurve:
    plan = make_split_plan(
        ds.labels,
        task.target_class,
        spec.train_fraction,
        spec.repetitions,
        seed=derive_seed(spec.seed, ordinal, _SPLIT_STREAM),
    )
    train_idx, test_idx = plan.splits[rep]
    flags = np.array([lab == task.target_class for lab in ds.labels])
    fit_rows = [i for i in train_idx if flags[i]]
    model = train_ref(ds.features[fit_rows], spec.iterations, spec.fold)

    test_rows = list(test_idx)
    test_flags = flags[test_rows]
    z = ds.features[test_rows]
    gmeans = []
    # same replay arithmetic as the scoring path, recorded at every depth;
    # overflow to inf for far-out samples is legitimate there too
    with np.errstate(over="ignore"):
        for i, step in enumerate(model.steps):
            if i > 0:
                z = _fold_matrix(model.fold, z)
            z = (z - step.mu) / step.sigma
            scores = distance_to_origin(z, spec.dist)
            gmeans.append(
                gmean(confusion_from_scores(scores, test_flags, spec.threshold)).gmean
            )
    return LearningCurve(
        task=task.name,
        repetition=rep + 1,
        threshold=spec.threshold,
        dist=spec.dist,
        gmeans=tuple(gmeans),
    )


# -------------------------------------------------------------- timing probe

@dataclass(frozen=True)
class ProbeRow:
    n: int
    dim: int
    iterations: int
    times: tuple[float, ...]

    @property
    def median_seconds(self) -> float:
        return sorted(self.times)[len(self.times) // 2]


@dataclass(frozen=True)
class ProbeReport:
    rows: tuple[ProbeRow, ...]

    def text(self) -> str:
        lines = [f"# {PROBE_VERSION}", "n,dim,iterations,median_seconds,times"]
        for r in self.rows:
            times = " ".join(f"{t:.6f}" for t in r.times)
            lines.append(
                f"{r.n},{r.dim},{r.iterations},{r.median_seconds:.6f},{times}"
            )
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.text())


def timing_probe(
    sizes,
    dim: int = 20,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    repeats: int = 3,
) -> ProbeReport:
    """Median-of-repeats training wall time on synthetic normal data.

    The generator is seeded per size, so identical seeds reproduce identical
    inputs; medians damp scheduler noise.
    """
    sizes = [int(n) for n in sizes]
    if not sizes or any(n < 2 for n in sizes):
        raise ConfigError("probe sizes must all be >= 2")
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    rows = []
    for i, n in enumerate(sizes):
        rng = np.random.default_rng(derive_seed(seed, i))
        X = rng.normal(size=(n, dim))
        times = []
        for _ in range(repeats):
            started = time.perf_counter()
            train_ref(X, iterations=iterations)
            times.append(time.perf_counter() - started)
        rows.append(ProbeRow(n=n, dim=dim, iterations=iterations, times=tuple(times)))
    return ProbeReport(rows=tuple(rows))
