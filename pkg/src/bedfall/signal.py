"""Windowing of raw recordings and the statistics fed to the event prefilter.

A recording is cut into fixed-length windows (default 10 s at 1600 Hz, i.e.
16000 samples).  Each window is zero-meaned and squared, and five order
statistics of the result form the feature vector of the first detection stage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

AXES = ("x", "y", "z", "magnitude")

DEFAULT_SAMPLE_RATE = 1600.0
DEFAULT_WINDOW_SECONDS = 10.0

FEATURE_NAMES = ("max", "median", "mean", "q25", "q75")


@dataclass
class Recording:
    """Tri-axial acceleration record; ``channels`` has shape (3, n) in g.

    ``scale``, ``version`` and ``timestamps_us`` are carried along so binary
    logs survive a parse/write round trip bit for bit.
    """

    sample_rate: float
    channels: np.ndarray
    t0_us: int = 0
    scale: float = 0.001
    version: int = 1
    timestamps_us: np.ndarray | None = None

    def __post_init__(self):
        self.channels = np.asarray(self.channels, dtype=np.float64)
        if self.channels.ndim != 2 or self.channels.shape[0] != 3:
            raise ValueError(f"channels must have shape (3, n), got {self.channels.shape}")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate

    @property
    def x(self) -> np.ndarray:
        return self.channels[0]

    @property
    def y(self) -> np.ndarray:
        return self.channels[1]

    @property
    def z(self) -> np.ndarray:
        return self.channels[2]


@dataclass
class Window:
    """Fixed-length slice of one acceleration series; the unit of classification.

    ``samples`` may be a view into the parent recording.
    """

    samples: np.ndarray
    t_start: float = 0.0
    source_axis: str = "z"

    def __len__(self) -> int:
        return len(self.samples)


@dataclass
class FeatureVector:
    """Five statistics of the zero-meaned, squared window (units g^2)."""

    max: float
    median: float
    mean: float
    q25: float
    q75: float

    def as_array(self) -> np.ndarray:
        return np.array([self.max, self.median, self.mean, self.q25, self.q75])


def axis_series(recording: Recording, axis: str = "z") -> np.ndarray:
    """Return one channel, or the Euclidean magnitude of all three."""
    if axis == "magnitude":
        return np.sqrt(np.sum(recording.channels**2, axis=0))
    try:
        return recording.channels[AXES.index(axis)]
    except ValueError:
        raise ValueError(f"unknown axis {axis!r}, expected one of {AXES}") from None


def make_windows(
    recording: Recording,
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    step_seconds: float | None = None,
    axis: str = "z",
) -> list[Window]:
    """Cut a recording into consecutive windows starting at 0, step, 2*step, ...

    Durations are given in seconds and rounded to whole samples.  A trailing
    segment shorter than one window is discarded, never padded.
    """
    if step_seconds is None:
        step_seconds = window_seconds
    if not window_seconds > 0 or not step_seconds > 0:
        raise ValueError("window_seconds and step_seconds must be positive")
    w = int(round(window_seconds * recording.sample_rate))
    s = int(round(step_seconds * recording.sample_rate))
    if w < 1 or s < 1:
        raise ValueError("window and step must be at least one sample")
    series = axis_series(recording, axis)
    n = len(series)
    if n < w:
        raise DataError(
            f"recording of {n} samples is shorter than one window ({w} samples)"
        )
    count = (n - w) // s + 1
    return [
        Window(series[i * s : i * s + w], t_start=i * s / recording.sample_rate, source_axis=axis)
        for i in range(count)
    ]


def zero_mean_square(samples: np.ndarray) -> np.ndarray:
    """Subtract the mean, then square, elementwise."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise DataError("cannot transform an empty window")
    centered = x - x.mean()
    return centered * centered


def extract_features(window: Window | np.ndarray) -> FeatureVector:
    """Compute the five prefilter statistics of a window.

    Quantiles interpolate linearly between closest ranks.
    """
    samples = window.samples if isinstance(window, Window) else window
    t = zero_mean_square(samples)
    return FeatureVector(
        max=float(t.max()),
        median=float(np.median(t)),
        mean=float(t.mean()),
        q25=float(np.quantile(t, 0.25)),
        q75=float(np.quantile(t, 0.75)),
    )


def feature_matrix(windows) -> np.ndarray:
    """Stack per-window feature vectors into an (n, 5) array."""
    return np.array([extract_features(w).as_array() for w in windows])
