"""Dataset balancing: duplication and three-sigma event amplification.

Amplification isolates event samples with an iterative three-sigma rule on the
window's noise, multiplies only those samples by one uniform factor per
window, and leaves every noise sample untouched bit for bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import LABEL_HUMAN, LabeledDataset, Provenance
from .signal import Window

# Mask threshold when the estimated noise deviation is zero (noiseless
# synthetic windows with isolated spikes).
SIGMA_FLOOR_G = 1e-6

MAX_NOISE_ITERATIONS = 10


@dataclass
class NoiseStats:
    mu: float
    sigma: float
    iterations_used: int
    degenerate: bool = False
    inlier_mask: np.ndarray | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class AmplifyConfig:
    g_lo: float
    g_hi: float
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.g_lo <= self.g_hi:
            raise ValueError("require 0 < g_lo <= g_hi")


def estimate_noise_stats(window: Window | np.ndarray) -> NoiseStats:
    """Iterative three-sigma noise statistics.

    Starting from all samples, (mu, sigma) are recomputed and samples with
    |x - mu| > 3 sigma reclassified as outliers until the inlier set is stable
    or 10 iterations have run.  If every sample would be an outlier the global
    statistics are returned with ``degenerate`` set.
    """
    x = window.samples if isinstance(window, Window) else np.asarray(window, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least 2 samples to estimate noise statistics")
    inliers = np.ones(x.size, dtype=bool)
    for iteration in range(1, MAX_NOISE_ITERATIONS + 1):
        mu = float(x[inliers].mean())
        sigma = float(x[inliers].std())
        new = np.abs(x - mu) <= 3.0 * sigma
        if not new.any():
            return NoiseStats(
                mu=float(x.mean()),
                sigma=float(x.std()),
                iterations_used=iteration,
                degenerate=True,
                inlier_mask=np.ones(x.size, dtype=bool),
            )
        if np.array_equal(new, inliers):
            return NoiseStats(mu, sigma, iteration, inlier_mask=inliers)
        inliers = new
    mu = float(x[inliers].mean())
    sigma = float(x[inliers].std())
    return NoiseStats(mu, sigma, MAX_NOISE_ITERATIONS, inlier_mask=inliers)


def amplify(window: Window, stats: NoiseStats, config: AmplifyConfig) -> Window:
    """Scale only the event samples of a window by one random factor.

    The window is centered on the noise mean, samples beyond three noise
    deviations are multiplied by g ~ Uniform[g_lo, g_hi], and the mean is
    re-added.  Samples inside the noise band are never touched, and g == 1
    returns the input samples unchanged (no float round trip).
    """
    g = float(np.random.default_rng(config.seed).uniform(config.g_lo, config.g_hi))
    out = np.array(window.samples, dtype=np.float64, copy=True)
    if g != 1.0:
        threshold = 3.0 * stats.sigma if stats.sigma > 0 else SIGMA_FLOOR_G
        centered = out - stats.mu
        mask = np.abs(centered) > threshold
        out[mask] = centered[mask] * g + stats.mu
    return Window(samples=out, t_start=window.t_start, source_axis=window.source_axis)


def duplicate(dataset: LabeledDataset, target_class: str, copies: int) -> LabeledDataset:
    """Append ``copies`` identical copies of every target-class window.

    Output order: all originals first, then the copies grouped by source
    index.  ``copies=0`` is the identity.
    """
    if copies < 0:
        raise ValueError("copies must be >= 0")
    windows = list(dataset.windows)
    labels = list(dataset.labels)
    meta = [replace(m) for m in dataset.meta]
    provenance = list(dataset.provenance)
    for i in range(len(dataset)):
        if dataset.labels[i] != target_class:
            continue
        src = dataset.windows[i]
        for c in range(copies):
            windows.append(Window(src.samples.copy(), src.t_start, src.source_axis))
            labels.append(dataset.labels[i])
            meta.append(replace(dataset.meta[i]))
            provenance.append(Provenance(source=i, method="duplication", copy=c))
    return LabeledDataset(windows=windows, labels=labels, meta=meta, provenance=provenance)


@dataclass(frozen=True)
class Duplication:
    copies: int

    def describe(self) -> str:
        return f"duplication:d={self.copies}"


@dataclass(frozen=True)
class Amplification:
    g_lo: float
    g_hi: float
    copies: int | None = None  # None balances the classes

    def describe(self) -> str:
        copies = "balance" if self.copies is None else str(self.copies)
        return f"amplification:g=[{self.g_lo},{self.g_hi}],copies={copies}"


def _balance_copies(n_pos: int, n_other: int) -> int:
    return max(n_other // n_pos - 1, 0)


def augment_dataset(dataset: LabeledDataset, method, seed: int = 0) -> LabeledDataset:
    """Apply an augmentation method to the human-fall class.

    Duplication adds exact copies; amplification adds per-window amplified
    variants with order-independent derived seeds.  Every added window carries
    a provenance tag pointing at its source index.
    """
    if isinstance(method, Duplication):
        return duplicate(dataset, LABEL_HUMAN, method.copies)
    if not isinstance(method, Amplification):
        raise TypeError(f"unknown augmentation method {method!r}")

    pos = dataset.indices_of(LABEL_HUMAN)
    if len(pos) == 0:
        warnings.warn("no human-fall windows to augment; dataset unchanged")
        return LabeledDataset(
            windows=list(dataset.windows),
            labels=list(dataset.labels),
            meta=[replace(m) for m in dataset.meta],
            provenance=list(dataset.provenance),
        )
    copies = method.copies
    if copies is None:
        copies = _balance_copies(len(pos), len(dataset) - len(pos))
    windows = list(dataset.windows)
    labels = list(dataset.labels)
    meta = [replace(m) for m in dataset.meta]
    provenance = list(dataset.provenance)
    for i in pos:
        stats = estimate_noise_stats(dataset.windows[i])
        for c in range(copies):
            child = int(np.random.SeedSequence([seed, int(i), c]).generate_state(1)[0])
            cfg = AmplifyConfig(method.g_lo, method.g_hi, seed=child)
            windows.append(amplify(dataset.windows[i], stats, cfg))
            labels.append(dataset.labels[i])
            meta.append(replace(dataset.meta[i]))
            provenance.append(Provenance(source=int(i), method="amplification", copy=c))
    return LabeledDataset(windows=windows, labels=labels, meta=meta, provenance=provenance)
