"""Task construction, splitting, metrics, and threshold selection.

One one-class task is built per class of a labeled dataset: that class is
the target, everything else counts as outliers. Tasks are evaluated over
seeded, stratified 70/30 train/test splits repeated several times, reporting
Gmean = sqrt(TPR * TNR). When outlier rows are present in the training pool
they are never used to fit the classifier, only to pick the decision
threshold by k-fold cross-validation over a fixed candidate grid.

All randomness flows through the splitmix64 helpers in refold.rng, so every
split is a pure function of (inputs, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ClassifierConfig, score, train_ref
from .errors import ConfigError, EvaluationError, SelectionError
from .rng import SplitMix64, derive_seed

DEFAULT_TRAIN_FRACTION = 0.7
DEFAULT_REPETITIONS = 5
DEFAULT_CV_FOLDS = 5
DEFAULT_THRESHOLD_GRID = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1)


@dataclass(frozen=True)
class OccTask:
    """One target class of one dataset, e.g. Iris2 = Versicolor vs rest."""

    dataset_name: str
    target_class: str
    name: str


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fn: int
    tn: int
    fp: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.tn, self.fp) < 0:
            raise EvaluationError("confusion counts must be non-negative")


@dataclass(frozen=True)
class EvalResult:
    counts: ConfusionCounts
    tpr: float
    tnr: float
    gmean: float


@dataclass(frozen=True)
class SplitPlan:
    """Seeded train/test index splits, one pair per repetition.

    Stratified: the train fraction applies within the target class and
    within the outlier pool separately, sized by floor(fraction * n).
    Repetition r uses the stream seeded with derive_seed(seed, r); targets
    are shuffled first, then outliers, on that single stream.
    """

    seed: int
    train_fraction: float
    repetitions: int
    splits: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]


def make_occ_tasks(dataset) -> list[OccTask]:
    """One task per class, in order of first appearance in the dataset."""
    classes = list(dataset.class_names)
    if len(classes) < 2:
        raise ConfigError(
            f"dataset {dataset.name!r} has {len(classes)} class(es); "
            "one-class tasks need at least 2"
        )
    prefix = dataset.task_prefix
    return [
        OccTask(dataset_name=dataset.name, target_class=c, name=f"{prefix}{i + 1}")
        for i, c in enumerate(classes)
    ]


def make_split_plan(
    labels: Sequence[str],
    target_class: str,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    repetitions: int = DEFAULT_REPETITIONS,
    seed: int = 0,
) -> SplitPlan:
    """Stratified train/test index splits for one task."""
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train fraction must be in (0, 1), got {train_fraction}")
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    target_idx = [i for i, lab in enumerate(labels) if lab == target_class]
    outlier_idx = [i for i, lab in enumerate(labels) if lab != target_class]
    if not target_idx:
        raise ConfigError(f"target class {target_class!r} has no samples")
    if not outlier_idx:
        raise ConfigError(f"no outlier samples besides class {target_class!r}")

    splits = []
    for rep in range(repetitions):
        rng = SplitMix64(derive_seed(seed, rep))
        tgt = rng.shuffle(list(target_idx))
        out = rng.shuffle(list(outlier_idx))
        n_t = int(train_fraction * len(tgt))
        n_o = int(train_fraction * len(out))
        train = tuple(sorted(tgt[:n_t] + out[:n_o]))
        test = tuple(sorted(tgt[n_t:] + out[n_o:]))
        splits.append((train, test))
    return SplitPlan(
        seed=seed,
        train_fraction=train_fraction,
        repetitions=repetitions,
        splits=tuple(splits),
    )


def gmean(counts: ConfusionCounts) -> EvalResult:
    """TPR, TNR and their geometric mean; needs both classes in the test set."""
    pos = counts.tp + counts.fn
    neg = counts.tn + counts.fp
    if pos == 0:
        raise EvaluationError("no target samples in the test set; Gmean undefined")
    if neg == 0:
        raise EvaluationError("no outlier samples in the test set; Gmean undefined")
    tpr = counts.tp / pos
    tnr = counts.tn / neg
    return EvalResult(counts=counts, tpr=tpr, tnr=tnr, gmean=math.sqrt(tpr * tnr))


def confusion_from_scores(
    scores: np.ndarray, is_target: np.ndarray, threshold: float
) -> ConfusionCounts:
    """Threshold scores inclusively (target iff score <= threshold)."""
    scores = np.asarray(scores, dtype=np.float64)
    is_target = np.asarray(is_target, dtype=bool)
    accepted = scores <= threshold
    return ConfusionCounts(
        tp=int(np.sum(accepted & is_target)),
        fn=int(np.sum(~accepted & is_target)),
        tn=int(np.sum(~accepted & ~is_target)),
        fp=int(np.sum(accepted & ~is_target)),
    )


def kfold(
    indices: Sequence[int], k: int, seed: int = 0
) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Seeded k-fold partition: disjoint validation folds covering indices.

    Fold sizes differ by at most one; the first (n mod k) folds take the
    extra element.
    """
    items = list(indices)
    if k < 2:
        raise ConfigError("k-fold needs k >= 2")
    if k > len(items):
        raise ConfigError(f"cannot make {k} folds from {len(items)} items")
    rng = SplitMix64(seed)
    rng.shuffle(items)
    base, extra = divmod(len(items), k)
    folds = []
    start = 0
    for f in range(k):
        size = base + (1 if f < extra else 0)
        folds.append(items[start : start + size])
        start += size
    out = []
    for f in range(k):
        val = tuple(folds[f])
        train = tuple(x for g in range(k) if g != f for x in folds[g])
        out.append((train, val))
    return out


def select_threshold(
    features: np.ndarray,
    is_target: Sequence[bool],
    config: ClassifierConfig,
    grid: Sequence[float] = DEFAULT_THRESHOLD_GRID,
    k: int = DEFAULT_CV_FOLDS,
    seed: int = 0,
) -> float:
    """Pick the grid threshold maximizing mean Gmean over k CV folds.

    Models are fit on each fold's training targets only; fold outliers serve
    purely for scoring the candidates. Ties break toward the value closest
    to 1.0, then toward the larger value. The training pool must contain
    outliers; without them there is nothing to validate against and the
    caller should fall back to the default threshold 1.
    """
    grid = tuple(float(t) for t in grid)
    if not grid or any(t <= 0 for t in grid) or any(
        b <= a for a, b in zip(grid, grid[1:])
    ):
        raise ConfigError("threshold grid must be strictly increasing and positive")
    features = np.asarray(features, dtype=np.float64)
    flags = np.asarray(is_target, dtype=bool)
    if features.ndim != 2 or len(flags) != len(features):
        raise ConfigError("features must be (N, D) with one is_target flag per row")
    if not flags.any():
        raise SelectionError("training pool has no target samples")
    if flags.all():
        raise SelectionError(
            "training pool has no outliers for validation; "
            "use the default threshold T=1 instead of grid selection"
        )

    per_fold = []
    for fold_train, fold_val in kfold(range(len(features)), k, seed):
        fit_rows = [i for i in fold_train if flags[i]]
        if len(fit_rows) < 2:
            raise SelectionError(
                f"a CV fold has {len(fit_rows)} target training rows; need >= 2"
            )
        val = list(fold_val)
        val_flags = flags[val]
        if val_flags.all() or not val_flags.any():
            # single-class validation fold: Gmean undefined, skip it
            continue
        model = train_ref(features[fit_rows], config.iterations, config.fold)
        val_scores = score(features[val], model, config.dist)
        per_fold.append(
            [
                gmean(confusion_from_scores(val_scores, val_flags, t)).gmean
                for t in grid
            ]
        )
    if not per_fold:
        raise SelectionError("no CV fold had both classes in its validation set")
    means = [sum(col) / len(per_fold) for col in zip(*per_fold)]
    best = max(zip(grid, means), key=lambda tm: (tm[1], -abs(tm[0] - 1.0), tm[0]))
    return best[0]
