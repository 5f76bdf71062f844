"""Logistic-regression prefilter: bias plus one weight per window feature.

Features are standardized inside training (mean/std of the training data) and
the statistics travel with the model so prediction sees the same scaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..signal import FeatureVector
from .losses import LOSS_BCE, mean_loss, sigmoid


@dataclass
class LogRegModel:
    beta: np.ndarray
    feature_mean: np.ndarray
    feature_std: np.ndarray
    threshold: float = 0.5

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=np.float64)
        self.feature_mean = np.asarray(self.feature_mean, dtype=np.float64)
        self.feature_std = np.asarray(self.feature_std, dtype=np.float64)
        if not np.all(np.isfinite(self.beta)):
            raise ValueError("coefficients must be finite")
        p = len(self.beta) - 1
        if len(self.feature_mean) != p or len(self.feature_std) != p:
            raise ValueError("standardization statistics must match the feature count")

    @classmethod
    def from_beta(cls, beta, threshold: float = 0.5) -> "LogRegModel":
        """Model with identity standardization (raw features)."""
        beta = np.asarray(beta, dtype=np.float64)
        p = len(beta) - 1
        return cls(beta=beta, feature_mean=np.zeros(p), feature_std=np.ones(p), threshold=threshold)

    @property
    def n_features(self) -> int:
        return len(self.beta) - 1


def logreg_predict(model: LogRegModel, features):
    """Event probability for one feature vector or an (n, p) matrix."""
    if isinstance(features, FeatureVector):
        features = features.as_array()
    f = np.asarray(features, dtype=np.float64)
    single = f.ndim == 1
    f = np.atleast_2d(f)
    if f.shape[1] != model.n_features:
        raise ValueError(
            f"expected {model.n_features} features, got {f.shape[1]}"
        )
    std = np.where(model.feature_std == 0, 1.0, model.feature_std)
    z = model.beta[0] + (f - model.feature_mean) / std @ model.beta[1:]
    scores = sigmoid(z)
    return float(scores[0]) if single else scores


def logreg_train(
    features,
    labels,
    lr: float = 0.1,
    epochs: int = 500,
    seed: int = 0,
) -> tuple[LogRegModel, list[float]]:
    """Full-batch gradient descent on the cross-entropy loss.

    Deterministic (zero initialization); ``seed`` is accepted for interface
    symmetry with the other trainers.  Returns the model and the per-epoch
    loss history (evaluated before each update).
    """
    del seed
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("features must be (n, p) with matching labels")
    if len(np.unique(y)) < 2:
        raise DataError("training data must contain both classes")
    if lr < 0:
        raise ValueError("lr must be >= 0")
    n, p = X.shape
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0, 1.0, std)
    Xs = (X - mean) / std
    beta = np.zeros(p + 1)
    history = []
    for _ in range(max(1, int(epochs))):
        scores = sigmoid(beta[0] + Xs @ beta[1:])
        history.append(mean_loss(LOSS_BCE, scores, y))
        resid = scores - y
        beta[0] -= lr * float(resid.mean())
        beta[1:] -= lr * (Xs.T @ resid) / n
    model = LogRegModel(beta=beta, feature_mean=mean, feature_std=std)
    return model, history


def logreg_accuracy(model: LogRegModel, features, labels) -> float:
    scores = logreg_predict(model, features)
    preds = np.asarray(scores) >= model.threshold
    return float(np.mean(preds == np.asarray(labels).astype(bool)))
