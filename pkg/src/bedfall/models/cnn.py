"""Spectrogram classifier: one valid-convolution layer, ReLU, max-pooling,
then a dense sigmoid unit.

Convolution is plain cross-correlation (no kernel flip), stride one, no
padding.  Gradients are exact reverse-mode derivatives; max-pooling routes its
gradient to the first maximal element of each region so the backward pass is
deterministic under ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DataError, TrainingError
from . import losses
from .optim import adam_init, adam_step, sgd_step

OPTIMIZERS = ("adam", "sgd")


@dataclass
class ConvLayer:
    filters: np.ndarray  # (K, kh, kw)
    biases: np.ndarray  # (K,)

    def __post_init__(self):
        self.filters = np.asarray(self.filters, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.filters.ndim != 3:
            raise ValueError("filters must have shape (K, kh, kw)")
        if self.biases.shape != (self.filters.shape[0],):
            raise ValueError("need one bias per filter")


@dataclass
class CnnModel:
    conv: ConvLayer
    pool: tuple
    dense_w: np.ndarray
    dense_b: float
    input_shape: tuple
    threshold: float | None = None
    # Per-dataset input standardization baked in at training time; identity
    # (0, 1) feeds spectrograms through unchanged.
    input_mean: float = 0.0
    input_std: float = 1.0

    def __post_init__(self):
        self.dense_w = np.asarray(self.dense_w, dtype=np.float64)
        self.dense_b = float(self.dense_b)
        if self.input_std <= 0:
            raise ValueError("input_std must be positive")
        if self.dense_w.shape != (self.flatten_len(),):
            raise ValueError(
                f"dense weights must have length {self.flatten_len()}, got {self.dense_w.shape}"
            )

    def has_identity_scaling(self) -> bool:
        return self.input_mean == 0.0 and self.input_std == 1.0

    def conv_output_shape(self) -> tuple:
        k, kh, kw = self.conv.filters.shape
        h, w = self.input_shape
        return (k, h - kh + 1, w - kw + 1)

    def pooled_shape(self) -> tuple:
        k, h, w = self.conv_output_shape()
        ph, pw = self.pool
        return (k, h // ph, w // pw)

    def flatten_len(self) -> int:
        k, h, w = self.pooled_shape()
        return k * h * w

    def parameter_count(self) -> int:
        return self.conv.filters.size + self.conv.biases.size + self.dense_w.size + 1


def conv2d_forward(x: np.ndarray, layer: ConvLayer) -> np.ndarray:
    """Valid cross-correlation of a (H, W) input with every filter, plus bias.

    Output shape is (K, H - kh + 1, W - kw + 1).
    """
    x = np.asarray(x, dtype=np.float64)
    k, kh, kw = layer.filters.shape
    h, w = x.shape
    if kh > h or kw > w:
        raise ValueError(f"kernel ({kh}, {kw}) larger than input ({h}, {w})")
    windows = sliding_window_view(x, (kh, kw))  # (H', W', kh, kw)
    hp, wp = windows.shape[:2]
    flat = windows.reshape(hp * wp, kh * kw)
    out = (flat @ layer.filters.reshape(k, -1).T).T.reshape(k, hp, wp)
    return out + layer.biases[:, None, None]


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _pool_regions(maps: np.ndarray, region: tuple):
    k, h, w = maps.shape
    ph, pw = region
    hp, wp = h // ph, w // pw
    crop = maps[:, : hp * ph, : wp * pw]
    regions = crop.reshape(k, hp, ph, wp, pw).transpose(0, 1, 3, 2, 4).reshape(k, hp, wp, ph * pw)
    return regions, hp, wp


def maxpool2d(maps: np.ndarray, region: tuple = (1, 4)) -> np.ndarray:
    """Max over each (ph, pw) region; trailing remainder columns/rows dropped."""
    regions, _, _ = _pool_regions(np.asarray(maps, dtype=np.float64), region)
    return regions.max(axis=-1)


def _forward_cache(model: CnnModel, x: np.ndarray):
    if not model.has_identity_scaling():
        x = (x - model.input_mean) / model.input_std
    z = conv2d_forward(x, model.conv)
    a = relu(z)
    regions, hp, wp = _pool_regions(a, model.pool)
    idx = regions.argmax(axis=-1)  # first maximum on ties
    pooled = np.take_along_axis(regions, idx[..., None], axis=-1)[..., 0]
    flat = pooled.reshape(-1)
    logit = float(model.dense_w @ flat + model.dense_b)
    score = losses.sigmoid(logit)
    return score, {"z": z, "idx": idx, "flat": flat, "hp": hp, "wp": wp}


def cnn_forward(model: CnnModel, x: np.ndarray) -> float:
    """Classification score in (0, 1) for one spectrogram matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != tuple(model.input_shape):
        raise ValueError(f"expected input {tuple(model.input_shape)}, got {x.shape}")
    score, _ = _forward_cache(model, x)
    return score


def _backward(model: CnnModel, x: np.ndarray, cache: dict, dlogit: float) -> dict:
    if not model.has_identity_scaling():
        x = (x - model.input_mean) / model.input_std
    k, kh, kw = model.conv.filters.shape
    ph, pw = model.pool
    hp, wp = cache["hp"], cache["wp"]
    d_dense_w = dlogit * cache["flat"]
    d_dense_b = dlogit
    dpool = (dlogit * model.dense_w).reshape(k, hp, wp)
    # Scatter each pooled gradient back to the argmax position of its region.
    da = np.zeros_like(cache["z"])
    q = cache["idx"]
    rows = np.arange(hp)[None, :, None] * ph + q // pw
    cols = np.arange(wp)[None, None, :] * pw + q % pw
    da[np.arange(k)[:, None, None], rows, cols] = dpool
    dz = da * (cache["z"] > 0)
    windows = sliding_window_view(np.asarray(x, dtype=np.float64), (kh, kw))
    hc, wc = windows.shape[:2]
    d_filters = (dz.reshape(k, hc * wc) @ windows.reshape(hc * wc, kh * kw)).reshape(k, kh, kw)
    d_biases = dz.sum(axis=(1, 2))
    return {
        "filters": d_filters,
        "biases": d_biases,
        "dense_w": d_dense_w,
        "dense_b": np.asarray(d_dense_b, dtype=np.float64),
    }


def cnn_backward(model: CnnModel, x: np.ndarray, label, loss_kind: str = losses.LOSS_BCE) -> dict:
    """Exact gradients of the per-example loss for every parameter tensor."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != tuple(model.input_shape):
        raise ValueError(f"expected input {tuple(model.input_shape)}, got {x.shape}")
    score, cache = _forward_cache(model, x)
    dlogit = losses.gradient(loss_kind, score, label)
    return _backward(model, x, cache, dlogit)


def init_cnn(
    input_shape: tuple = (63, 251),
    n_filters: int = 240,
    kernel: tuple = (63, 145),
    pool: tuple = (1, 4),
    seed: int = 0,
) -> CnnModel:
    """Seeded He-style uniform initialization (scaled by fan-in), zero biases."""
    rng = np.random.default_rng(seed)
    kh, kw = kernel
    h, w = input_shape
    if kh > h or kw > w:
        raise ValueError(f"kernel ({kh}, {kw}) larger than input ({h}, {w})")
    hp = (h - kh + 1) // pool[0]
    wp = (w - kw + 1) // pool[1]
    flat = n_filters * hp * wp
    if flat < 1:
        raise ValueError("pooling region larger than the convolution output")
    lim = math.sqrt(6.0 / (kh * kw))
    filters = rng.uniform(-lim, lim, size=(n_filters, kh, kw))
    conv = ConvLayer(filters=filters, biases=np.zeros(n_filters))
    lim2 = math.sqrt(6.0 / flat)
    dense_w = rng.uniform(-lim2, lim2, size=flat)
    return CnnModel(
        conv=conv,
        pool=tuple(pool),
        dense_w=dense_w,
        dense_b=0.0,
        input_shape=tuple(input_shape),
    )


@dataclass
class TrainConfig:
    loss: str = losses.LOSS_BCE
    learning_rate: float = 0.01
    epochs: int = 75
    batch_size: int = 32
    optimizer: str = "adam"
    seed: int = 0
    standardize: bool = False  # bake training-set input statistics into the model

    def __post_init__(self):
        if self.loss not in losses.LOSS_KINDS:
            raise ValueError(f"loss must be one of {losses.LOSS_KINDS}")
        # lr 0 is allowed so no-op training stays testable.
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")


@dataclass
class TrainResult:
    model: CnnModel
    loss_history: list
    val_loss_history: list | None = None
    best_epoch: int | None = None


def _params_of(model: CnnModel) -> dict:
    return {
        "filters": model.conv.filters.copy(),
        "biases": model.conv.biases.copy(),
        "dense_w": model.dense_w.copy(),
        "dense_b": np.asarray(float(model.dense_b)),
    }


def _model_with(model: CnnModel, params: dict) -> CnnModel:
    return CnnModel(
        conv=ConvLayer(filters=params["filters"].copy(), biases=params["biases"].copy()),
        pool=tuple(model.pool),
        dense_w=params["dense_w"].copy(),
        dense_b=float(params["dense_b"]),
        input_shape=tuple(model.input_shape),
        threshold=model.threshold,
        input_mean=model.input_mean,
        input_std=model.input_std,
    )


def train_cnn(
    inputs,
    labels,
    config: TrainConfig,
    model: CnnModel,
    validation=None,
    early_stop_patience: int | None = None,
) -> TrainResult:
    """Minibatch training from the given starting parameters.

    The input model is not mutated.  When ``validation`` (inputs, labels) is
    supplied, the parameters with the best validation loss are returned and
    ``early_stop_patience`` epochs without improvement end training early.
    Shuffling and everything downstream is deterministic given ``config.seed``.

    With ``config.standardize`` the training-set mean and deviation are baked
    into the returned model; a model that already carries statistics (a
    fine-tuning start point) keeps them.
    """
    X = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if X.ndim != 3 or len(X) != len(y):
        raise ValueError("inputs must be (n, H, W) with matching labels")
    if X.shape[1:] != tuple(model.input_shape):
        raise ValueError(f"inputs {X.shape[1:]} do not match model {model.input_shape}")
    if len(np.unique(y)) < 2:
        raise DataError("training data must contain both classes")

    if config.standardize and model.has_identity_scaling():
        std = float(X.std())
        model = replace(model, input_mean=float(X.mean()), input_std=std if std > 0 else 1.0)
    params = _params_of(model)
    state = adam_init(params) if config.optimizer == "adam" else None
    rng = np.random.default_rng(config.seed)
    n = len(X)
    work = _model_with(model, params)

    def mean_val_loss(m):
        vx, vy = validation
        per = [losses.loss(config.loss, cnn_forward(m, v), t) for v, t in zip(vx, vy)]
        return math.fsum(per) / len(per)

    history = []
    val_history = [] if validation is not None else None
    best = None  # (val_loss, params, epoch)
    stale = 0
    for epoch in range(config.epochs):
        perm = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, config.batch_size):
            batch = perm[start : start + config.batch_size]
            gsum = None
            for i in batch:
                score, cache = _forward_cache(work, X[i])
                epoch_losses.append(losses.loss(config.loss, score, y[i]))
                g = _backward(work, X[i], cache, losses.gradient(config.loss, score, y[i]))
                if gsum is None:
                    gsum = g
                else:
                    for key in gsum:
                        gsum[key] = gsum[key] + g[key]
            gmean = {k: v / len(batch) for k, v in gsum.items()}
            if config.optimizer == "adam":
                params, state = adam_step(params, gmean, state, config.learning_rate)
            else:
                params = sgd_step(params, gmean, config.learning_rate)
            work = _model_with(model, params)
        epoch_loss = math.fsum(epoch_losses) / n
        if not math.isfinite(epoch_loss):
            raise TrainingError(f"non-finite training loss in epoch {epoch}")
        history.append(epoch_loss)
        if validation is not None:
            vl = mean_val_loss(work)
            val_history.append(vl)
            if best is None or vl < best[0]:
                best = (vl, {k: np.copy(v) for k, v in params.items()}, epoch)
                stale = 0
            else:
                stale += 1
                if early_stop_patience is not None and stale >= early_stop_patience:
                    break

    if best is not None:
        final = _model_with(model, best[1])
        return TrainResult(final, history, val_history, best_epoch=best[2])
    return TrainResult(work, history, val_history)
