"""Short-time Fourier transform and spectrogram generation.

The default configuration (segment 500, hop 250, Hann taper, one-sided bins,
log power) turns a 16000-sample window into a (63, 251) matrix: 63 time frames
by 251 frequency bins.  The transform itself is delegated to numpy's FFT; the
test suite pins it against a naive O(n^2) DFT.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .signal import Window

WINDOW_FNS = ("hann", "rectangular")


def hann(length: int) -> np.ndarray:
    """Symmetric Hann taper; [1] for length 1 by convention."""
    if length < 1:
        raise ValueError("length must be >= 1")
    if length == 1:
        return np.ones(1)
    n = np.arange(length)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * n / (length - 1)))


@dataclass(frozen=True)
class StftConfig:
    segment_len: int = 500
    hop: int = 250
    window_fn: str = "hann"
    one_sided: bool = True
    log_power: bool = True
    log_floor: float = 1e-12

    def __post_init__(self):
        if not 0 < self.hop <= self.segment_len:
            raise ValueError("require 0 < hop <= segment_len")
        if self.window_fn not in WINDOW_FNS:
            raise ValueError(f"window_fn must be one of {WINDOW_FNS}")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")


@dataclass
class Spectrogram:
    """Power (or log-power) matrix of shape (frames, bins) with axis labels."""

    values: np.ndarray
    frame_times: np.ndarray
    bin_freqs: np.ndarray

    @property
    def shape(self):
        return self.values.shape


def _taper(config: StftConfig) -> np.ndarray:
    if config.window_fn == "hann":
        return hann(config.segment_len)
    return np.ones(config.segment_len)


def stft(samples: np.ndarray | Window, config: StftConfig | None = None) -> np.ndarray:
    """Complex STFT coefficients, shape (frames, bins).

    Frame count is floor((n - segment_len) / hop) + 1; each frame is the DFT
    of the tapered segment.  One-sided output keeps bins 0..segment_len//2.
    """
    if config is None:
        config = StftConfig()
    x = samples.samples if isinstance(samples, Window) else np.asarray(samples, dtype=np.float64)
    n = len(x)
    L, H = config.segment_len, config.hop
    if n < L:
        raise DataError(f"signal of {n} samples is shorter than one segment ({L})")
    frames = (n - L) // H + 1
    taper = _taper(config)
    segs = np.empty((frames, L))
    for i in range(frames):
        segs[i] = x[i * H : i * H + L]
    segs *= taper
    if config.one_sided:
        return np.fft.rfft(segs, axis=1)
    return np.fft.fft(segs, axis=1)


def spectrogram(
    window: Window | np.ndarray,
    config: StftConfig | None = None,
    sample_rate: float = 1600.0,
) -> Spectrogram:
    """Squared STFT magnitudes concatenated over time; optionally log-scaled."""
    if config is None:
        config = StftConfig()
    coeffs = stft(window, config)
    power = np.abs(coeffs) ** 2
    values = np.log(power + config.log_floor) if config.log_power else power
    t0 = window.t_start if isinstance(window, Window) else 0.0
    frames = coeffs.shape[0]
    frame_times = t0 + (np.arange(frames) * config.hop + config.segment_len / 2) / sample_rate
    bins = coeffs.shape[1]
    if config.one_sided:
        bin_freqs = np.arange(bins) * sample_rate / config.segment_len
    else:
        bin_freqs = np.fft.fftfreq(config.segment_len, d=1.0 / sample_rate)
    return Spectrogram(values=values, frame_times=frame_times, bin_freqs=bin_freqs)


def spectrogram_csv(values: np.ndarray) -> str:
    """Matrix as CSV text, one row per time frame."""
    buf = io.StringIO()
    np.savetxt(buf, np.asarray(values), delimiter=",", fmt="%.17g")
    return buf.getvalue()


def spectrogram_pgm(values: np.ndarray) -> bytes:
    """8-bit binary portable graymap for quick visual inspection.

    Rows run from the highest frequency bin (top) to DC (bottom), columns are
    time frames; intensities are min/max normalized.
    """
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        img = np.rint((v - lo) / (hi - lo) * 255.0)
    else:
        img = np.zeros_like(v)
    pixels = img.T[::-1].astype(np.uint8)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    return header + pixels.tobytes()
