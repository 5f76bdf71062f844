"""Metrics, recall-one thresholding, the leakage-safe cross-validation
pipeline over four training variants, and a successive-halving tuner.

The pipeline mirrors the deployment objective: on every validation fold the
decision threshold is lowered until recall is exactly 1.0, and models are
ranked by the precision achieved there.  All augmentation statistics are
derived from the training split of the fold only.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .augment import augment_dataset
from .dataset import LABEL_HUMAN, LabeledDataset
from .dsp import StftConfig, spectrogram
from .errors import DataError
from .models.cnn import CnnModel, TrainConfig, cnn_forward, init_cnn, train_cnn
from .models.losses import LOSS_KINDS

VARIANTS = ("baseline", "all-inclusive", "augmented-only", "two-step")


@dataclass
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(scores, labels, threshold: float) -> ConfusionCounts:
    """Counts under the rule: positive iff score >= threshold."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(int)
    if s.shape != y.shape:
        raise ValueError("scores and labels must have equal length")
    pred = s >= threshold
    pos = y == 1
    return ConfusionCounts(
        tp=int(np.sum(pred & pos)),
        fp=int(np.sum(pred & ~pos)),
        tn=int(np.sum(~pred & ~pos)),
        fn=int(np.sum(~pred & pos)),
    )


def recall(c: ConfusionCounts) -> float:
    denom = c.tp + c.fn
    return c.tp / denom if denom else 1.0


def precision(c: ConfusionCounts) -> float:
    denom = c.tp + c.fp
    return c.tp / denom if denom else 1.0


def select_threshold(scores, labels) -> tuple[float, float]:
    """Largest threshold with recall 1.0, and the precision achieved there.

    That threshold is the minimum score among the positives: every lower value
    keeps recall at 1.0 while admitting at least as many false positives.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(int)
    if s.shape != y.shape:
        raise ValueError("scores and labels must have equal length")
    if not np.any(y == 1):
        raise DataError("cannot select a threshold without positive examples")
    threshold = float(s[y == 1].min())
    return threshold, precision(confusion(s, y, threshold))


def stratified_kfold(labels, k: int = 5, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded stratified splits; per-class fold sizes differ by at most one."""
    y = np.asarray(labels)
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    for cls in sorted(set(y.tolist())):
        idx = np.flatnonzero(y == cls)
        if len(idx) < k:
            raise DataError(f"class {cls!r} has {len(idx)} members, fewer than k={k}")
        idx = idx[rng.permutation(len(idx))]
        for part, chunk in zip(folds, np.array_split(idx, k)):
            part.extend(chunk.tolist())
    splits = []
    everything = set(range(len(y)))
    for part in folds:
        val = np.array(sorted(part), dtype=int)
        train = np.array(sorted(everything - set(part)), dtype=int)
        splits.append((train, val))
    return splits


@dataclass
class FoldData:
    index: int
    train: LabeledDataset
    augmented: LabeledDataset
    val: LabeledDataset


def iter_folds(dataset: LabeledDataset, method, k: int = 5, seed: int = 0):
    """Stratified folds with the augmentation applied to the training split only."""
    for i, (tr, va) in enumerate(stratified_kfold(dataset.labels, k, seed)):
        d_tr = dataset.subset(tr)
        d_va = dataset.subset(va)
        aug_seed = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        d_aug = augment_dataset(d_tr, method, seed=aug_seed)
        yield FoldData(index=i, train=d_tr, augmented=d_aug, val=d_va)


@dataclass
class FoldOutcome:
    threshold: float
    precision: float


@dataclass
class ExperimentReport:
    method: str
    k: int
    folds: list  # list of dict variant -> FoldOutcome
    means: dict = field(default=None)

    def __post_init__(self):
        if self.means is None:
            self.means = {
                v: float(np.mean([f[v].precision for f in self.folds])) for v in VARIANTS
            }

    def jsonl(self) -> str:
        lines = [json.dumps({"type": "experiment", "augmentation": self.method, "k": self.k})]
        for i, fold in enumerate(self.folds):
            for variant in VARIANTS:
                out = fold[variant]
                lines.append(
                    json.dumps(
                        {
                            "type": "fold",
                            "fold": i,
                            "variant": variant,
                            "threshold": out.threshold,
                            "precision": out.precision,
                            "recall": 1.0,
                        },
                        sort_keys=True,
                    )
                )
        for variant in VARIANTS:
            lines.append(
                json.dumps(
                    {"type": "summary", "variant": variant, "mean_precision": self.means[variant]},
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + "\n"

    def csv_summary(self) -> str:
        lines = ["variant,mean_precision"]
        for variant in VARIANTS:
            lines.append(f"{variant},{self.means[variant]!r}")
        return "\n".join(lines) + "\n"


def _spectrogram_matrix(dataset: LabeledDataset, stft_config, sample_rate) -> np.ndarray:
    return np.stack([spectrogram(w, stft_config, sample_rate).values for w in dataset.windows])


def _scores(model: CnnModel, X) -> np.ndarray:
    return np.array([cnn_forward(model, x) for x in X])


def _experiment_fold(payload):
    """Train and score the four variants on one fold (picklable worker)."""
    fold, train_config, n_filters, kernel_width, pool, seed, stft_config, sample_rate = payload
    model_seed = int(np.random.SeedSequence([seed, fold.index, 17]).generate_state(1)[0])
    X_tr = _spectrogram_matrix(fold.train, stft_config, sample_rate)
    y_tr = fold.train.binary_labels(LABEL_HUMAN)
    X_aug = _spectrogram_matrix(fold.augmented, stft_config, sample_rate)
    y_aug = fold.augmented.binary_labels(LABEL_HUMAN)
    X_val = _spectrogram_matrix(fold.val, stft_config, sample_rate)
    y_val = fold.val.binary_labels(LABEL_HUMAN)
    input_shape = X_tr.shape[1:]
    kernel = (input_shape[0], kernel_width)

    def fresh():
        return init_cnn(input_shape, n_filters, kernel, pool, seed=model_seed)

    trained = {}
    trained["baseline"] = train_cnn(X_tr, y_tr, train_config, fresh()).model
    trained["all-inclusive"] = train_cnn(
        np.concatenate([X_tr, X_aug]),
        np.concatenate([y_tr, y_aug]),
        train_config,
        fresh(),
    ).model
    step1 = train_cnn(X_aug, y_aug, train_config, fresh()).model
    trained["augmented-only"] = step1
    trained["two-step"] = train_cnn(X_tr, y_tr, train_config, step1).model

    outcomes = {}
    for variant in VARIANTS:
        threshold, prec = select_threshold(_scores(trained[variant], X_val), y_val)
        outcomes[variant] = FoldOutcome(threshold=threshold, precision=prec)
    return fold.index, outcomes


def run_experiment(
    dataset: LabeledDataset,
    method,
    train_config: TrainConfig,
    n_filters: int = 8,
    kernel_width: int = 15,
    pool: tuple = (1, 4),
    k: int = 5,
    seed: int = 0,
    stft_config: StftConfig | None = None,
    sample_rate: float = 1600.0,
    jobs: int = 1,
) -> ExperimentReport:
    """Cross-validated comparison of the four training variants.

    Per fold: augmentation is derived from the training split only, then a
    baseline model trains on the original split, an all-inclusive model on the
    original plus augmented data, an augmented-only model on the augmented
    data, and a two-step model trains on the augmented data and is then
    fine-tuned on the original split (fresh optimizer state).  Every variant
    is scored on the untouched validation split at its recall-one threshold.

    ``jobs`` > 1 trains folds in worker processes; the report is assembled in
    fold order, so results match the single-process run exactly.
    """
    if stft_config is None:
        stft_config = StftConfig()
    payloads = [
        (fold, train_config, n_filters, kernel_width, pool, seed, stft_config, sample_rate)
        for fold in iter_folds(dataset, method, k, seed)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool_exec:
            results = list(pool_exec.map(_experiment_fold, payloads))
    else:
        results = [_experiment_fold(p) for p in payloads]
    folds = [outcomes for _, outcomes in sorted(results, key=lambda item: item[0])]
    return ExperimentReport(method=method.describe(), k=k, folds=folds)


@dataclass(frozen=True)
class TrialConfig:
    n_filters: int
    kernel_width: int
    loss: str
    learning_rate: float


@dataclass(frozen=True)
class SearchSpace:
    """Hyperparameter grid for the classifier tuner."""

    filters: tuple = tuple(range(8, 257, 8))
    kernel_widths: tuple = tuple(range(5, 201, 5))
    losses: tuple = LOSS_KINDS
    learning_rates: tuple = (0.1, 0.01, 0.001)

    def size(self) -> int:
        return (
            len(self.filters) * len(self.kernel_widths) * len(self.losses) * len(self.learning_rates)
        )

    def contains(self, config: TrialConfig) -> bool:
        return (
            config.n_filters in self.filters
            and config.kernel_width in self.kernel_widths
            and config.loss in self.losses
            and config.learning_rate in self.learning_rates
        )

    def sample(self, rng: np.random.Generator, n: int) -> list[TrialConfig]:
        """n distinct grid points (all of them if n exceeds the grid)."""
        total = self.size()
        n = min(n, total)
        picks = rng.choice(total, size=n, replace=False)
        configs = []
        for flat in picks:
            flat = int(flat)
            i, flat = flat % len(self.filters), flat // len(self.filters)
            j, flat = flat % len(self.kernel_widths), flat // len(self.kernel_widths)
            l, flat = flat % len(self.losses), flat // len(self.losses)
            r = flat % len(self.learning_rates)
            configs.append(
                TrialConfig(
                    n_filters=int(self.filters[i]),
                    kernel_width=int(self.kernel_widths[j]),
                    loss=self.losses[l],
                    learning_rate=self.learning_rates[r],
                )
            )
        return configs


def halving_schedule(n_configs: int, max_epochs: int, reduction: int) -> list[tuple[int, int]]:
    """(survivor count, epoch budget) per rung; budgets grow geometrically to
    max_epochs and survivors shrink by the reduction factor."""
    if n_configs < 1:
        raise ValueError("need at least one configuration")
    rungs = 1
    while reduction**rungs <= n_configs:
        rungs += 1
    schedule = []
    n = n_configs
    for r in range(rungs):
        epochs = max(1, max_epochs // (reduction ** (rungs - 1 - r)))
        schedule.append((n, epochs))
        n = max(1, n // reduction)
    return schedule


@dataclass
class TrialRecord:
    rung: int
    epochs: int
    candidate: int
    config: TrialConfig
    val_loss: float
    precision: float | None = None
    survived: bool = False

    def as_dict(self) -> dict:
        return {
            "rung": self.rung,
            "epochs": self.epochs,
            "candidate": self.candidate,
            "n_filters": self.config.n_filters,
            "kernel_width": self.config.kernel_width,
            "loss": self.config.loss,
            "learning_rate": self.config.learning_rate,
            "val_loss": self.val_loss,
            "precision": self.precision,
            "survived": self.survived,
        }


@dataclass
class TuneResult:
    best: TrialConfig
    trials: list


def _tuner_trial(payload):
    """Train one tuner candidate at a rung budget (picklable worker)."""
    (index, config, epochs, seed, X_tr, y_tr, X_va, y_va,
     input_shape, pool, batch_size, patience, standardize) = payload
    tseed = int(np.random.SeedSequence([seed, index, 23]).generate_state(1)[0])
    model = init_cnn(
        input_shape, config.n_filters, (input_shape[0], config.kernel_width), pool, seed=tseed
    )
    tc = TrainConfig(
        loss=config.loss,
        learning_rate=config.learning_rate,
        epochs=epochs,
        batch_size=batch_size,
        optimizer="adam",
        seed=tseed,
        standardize=standardize,
    )
    result = train_cnn(
        X_tr, y_tr, tc, model, validation=(X_va, y_va), early_stop_patience=patience
    )
    return index, result.model, min(result.val_loss_history)


def successive_halving_tune(
    space: SearchSpace,
    dataset: LabeledDataset,
    n_configs: int = 9,
    max_epochs: int = 20,
    reduction: int = 3,
    seed: int = 0,
    batch_size: int = 32,
    pool: tuple = (1, 4),
    patience: int = 3,
    stft_config: StftConfig | None = None,
    sample_rate: float = 1600.0,
    standardize: bool = False,
    jobs: int = 1,
) -> TuneResult:
    """Single-bracket elimination tournament over sampled configurations.

    Each rung retrains the surviving configurations at the rung's epoch budget
    and keeps the best third (by validation loss, early stopping on patience).
    The last rung's survivors are ranked by precision at recall one.  Trials
    within a rung are independent; ``jobs`` > 1 runs them in worker processes
    with the same deterministic outcome.
    """
    if space.size() == 0:
        raise ValueError("empty search space")
    rng = np.random.default_rng(seed)
    candidates = space.sample(rng, n_configs)
    if not candidates:
        raise ValueError("no configurations sampled")
    splits = stratified_kfold(dataset.labels, 5, seed)
    train_idx, val_idx = splits[0]
    d_tr, d_va = dataset.subset(train_idx), dataset.subset(val_idx)
    if stft_config is None:
        stft_config = StftConfig()
    X_tr = _spectrogram_matrix(d_tr, stft_config, sample_rate)
    y_tr = d_tr.binary_labels(LABEL_HUMAN)
    X_va = _spectrogram_matrix(d_va, stft_config, sample_rate)
    y_va = d_va.binary_labels(LABEL_HUMAN)
    input_shape = X_tr.shape[1:]

    schedule = halving_schedule(len(candidates), max_epochs, reduction)
    trials = []
    alive = list(enumerate(candidates))
    final_models = {}
    last_loss = {}
    for rung, (_, epochs) in enumerate(schedule):
        payloads = [
            (index, config, epochs, seed, X_tr, y_tr, X_va, y_va,
             input_shape, pool, batch_size, patience, standardize)
            for index, config in alive
        ]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool_exec:
                outcomes = list(pool_exec.map(_tuner_trial, payloads))
        else:
            outcomes = [_tuner_trial(p) for p in payloads]
        records = []
        config_of = dict(alive)
        for index, model, val_loss in outcomes:
            final_models[index] = model
            last_loss[index] = val_loss
            records.append(
                TrialRecord(
                    rung=rung, epochs=epochs, candidate=index,
                    config=config_of[index], val_loss=val_loss,
                )
            )
        records.sort(key=lambda rec: (rec.val_loss, rec.candidate))
        keep = len(alive) if rung == len(schedule) - 1 else max(1, len(alive) // reduction)
        for rec in records[:keep]:
            rec.survived = True
        trials.extend(sorted(records, key=lambda rec: rec.candidate))
        alive = [(rec.candidate, rec.config) for rec in records[:keep]]

    best = None
    for index, config in alive:
        _, prec = select_threshold(_scores(final_models[index], X_va), y_va)
        for record in trials:
            if record.candidate == index and record.rung == len(schedule) - 1:
                record.precision = prec
        key = (-prec, last_loss[index], index)
        if best is None or key < best[0]:
            best = (key, config)
    return TuneResult(best=best[1], trials=trials)


def amplitude_report(groups: dict) -> dict:
    """Peak absolute acceleration per sensor-position group of recordings."""
    report = {}
    for position, recordings in groups.items():
        if not recordings:
            raise ValueError(f"no recordings for position {position!r}")
        report[position] = max(
            float(np.max(np.abs(rec.channels))) if rec.n_samples else 0.0
            for rec in recordings
        )
    return report
