"""Binary classification losses and their logit gradients.

All three losses act on a sigmoid output.  ``binary-focal`` is the
alpha-balanced focal loss (alpha 0.25, gamma 2); ``sigmoid-focal`` is the same
shape without class weighting (alpha 1).  Scores are clamped away from 0 and 1
by 1e-12 before taking logs.
"""

from __future__ import annotations

import numpy as np

LOSS_BCE = "binary-cross-entropy"
LOSS_BINARY_FOCAL = "binary-focal"
LOSS_SIGMOID_FOCAL = "sigmoid-focal"
LOSS_KINDS = (LOSS_BCE, LOSS_BINARY_FOCAL, LOSS_SIGMOID_FOCAL)

EPS = 1e-12
FOCAL_GAMMA = 2.0
FOCAL_ALPHA = 0.25


def sigmoid(z):
    """Numerically stable logistic function; scalar in, scalar out."""
    arr = np.asarray(z, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ez = np.exp(arr[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out[0]) if scalar else out


def _focal_terms(score, label, kind, gamma, alpha):
    p = np.clip(np.asarray(score, dtype=np.float64), EPS, 1.0 - EPS)
    y = np.asarray(label, dtype=np.float64)
    p_t = np.where(y == 1, p, 1.0 - p)
    if kind == LOSS_SIGMOID_FOCAL:
        a_t = np.ones_like(p_t)
    else:
        a_t = np.where(y == 1, alpha, 1.0 - alpha)
    return p, y, p_t, a_t


def loss(kind, score, label, gamma=FOCAL_GAMMA, alpha=FOCAL_ALPHA):
    """Per-example loss value (scalar or elementwise array)."""
    scalar = np.ndim(score) == 0 and np.ndim(label) == 0
    if kind == LOSS_BCE:
        p = np.clip(np.asarray(score, dtype=np.float64), EPS, 1.0 - EPS)
        y = np.asarray(label, dtype=np.float64)
        out = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    elif kind in (LOSS_BINARY_FOCAL, LOSS_SIGMOID_FOCAL):
        _, _, p_t, a_t = _focal_terms(score, label, kind, gamma, alpha)
        out = -a_t * (1.0 - p_t) ** gamma * np.log(p_t)
    else:
        raise ValueError(f"unknown loss kind {kind!r}")
    return float(out) if scalar else out


def gradient(kind, score, label, gamma=FOCAL_GAMMA, alpha=FOCAL_ALPHA):
    """d loss / d logit, where score = sigmoid(logit)."""
    scalar = np.ndim(score) == 0 and np.ndim(label) == 0
    if kind == LOSS_BCE:
        p = np.clip(np.asarray(score, dtype=np.float64), EPS, 1.0 - EPS)
        y = np.asarray(label, dtype=np.float64)
        out = p - y
    elif kind in (LOSS_BINARY_FOCAL, LOSS_SIGMOID_FOCAL):
        _, y, p_t, a_t = _focal_terms(score, label, kind, gamma, alpha)
        sign = np.where(y == 1, 1.0, -1.0)
        out = a_t * sign * (
            gamma * p_t * (1.0 - p_t) ** gamma * np.log(p_t) - (1.0 - p_t) ** (gamma + 1.0)
        )
    else:
        raise ValueError(f"unknown loss kind {kind!r}")
    return float(out) if scalar else out


def mean_loss(kind, scores, labels, gamma=FOCAL_GAMMA, alpha=FOCAL_ALPHA) -> float:
    return float(np.mean(loss(kind, scores, labels, gamma, alpha)))
