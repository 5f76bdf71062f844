"""Seeded synthetic recordings: Gaussian floor noise plus damped impact events.

Object impacts are a single short high-frequency burst; human falls are a
train of two or more softer, lower-frequency impacts (body segments striking
in sequence).  All generators are pure functions of their seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import LABEL_HUMAN, LABEL_NOISE, LABEL_OBJECT, LabeledDataset, WindowMeta
from .ingest import ManifestEntry, save_recording, write_manifest
from .signal import DEFAULT_SAMPLE_RATE, DEFAULT_WINDOW_SECONDS, Recording, make_windows

KIND_OBJECT = "object-impact"
KIND_HUMAN = "human-fall"

DEFAULT_NOISE_SIGMA_G = 0.002

# Relative amplitude of each lab setting (floor type, storey, distance, room).
SETTING_AMPLITUDE = {1: 1.0, 2: 0.85, 3: 0.95, 4: 0.8, 5: 0.7, 6: 0.6, 7: 0.65, 8: 0.55}

HUMAN_EVENT_ID = 11
OBJECT_EVENT_IDS = tuple(i for i in range(1, 16) if i != HUMAN_EVENT_ID)


@dataclass(frozen=True)
class EventSpec:
    kind: str
    peak_g: float
    decay_tau_s: float
    freq_hz: float
    impact_count: int = 1
    inter_impact_s: float = 0.25

    def __post_init__(self):
        if self.peak_g <= 0 or self.decay_tau_s <= 0 or self.freq_hz <= 0:
            raise ValueError("peak_g, decay_tau_s and freq_hz must be positive")
        if self.impact_count < 1:
            raise ValueError("impact_count must be >= 1")
        if self.inter_impact_s < 0:
            raise ValueError("inter_impact_s must be >= 0")

    @property
    def duration_s(self) -> float:
        return (self.impact_count - 1) * self.inter_impact_s + 5 * self.decay_tau_s


@dataclass(frozen=True)
class EventRanges:
    """Uniform draw bounds for each event parameter."""

    peak_g: tuple = (0.1, 1.0)
    decay_tau_s: tuple = (0.02, 0.08)
    freq_hz: tuple = (80.0, 400.0)
    impact_count: tuple = (1, 1)
    inter_impact_s: tuple = (0.2, 0.2)


OBJECT_RANGES = EventRanges()
HUMAN_RANGES = EventRanges(
    peak_g=(0.3, 1.0),
    decay_tau_s=(0.10, 0.30),
    freq_hz=(20.0, 80.0),
    impact_count=(2, 4),
    inter_impact_s=(0.15, 0.45),
)


def gen_noise(
    duration_s: float,
    sigma_g: float = DEFAULT_NOISE_SIGMA_G,
    seed: int = 0,
    sample_rate: float = DEFAULT_SAMPLE_RATE,
) -> Recording:
    """Zero-mean Gaussian floor noise on all three axes."""
    if sigma_g < 0:
        raise ValueError("sigma_g must be >= 0")
    n = int(round(duration_s * sample_rate))
    if sigma_g == 0:
        channels = np.zeros((3, n))
    else:
        channels = np.random.default_rng(seed).normal(0.0, sigma_g, size=(3, n))
    return Recording(sample_rate=sample_rate, channels=channels)


def gen_event(
    spec: EventSpec, seed: int = 0, sample_rate: float = DEFAULT_SAMPLE_RATE
) -> np.ndarray:
    """Event waveform: a sum of damped sinusoid bursts, one per impact.

    Later impacts are weaker and slightly detuned (seeded jitter).  The sum is
    rescaled so the absolute peak equals ``peak_g`` exactly.
    """
    if spec.freq_hz >= sample_rate / 2:
        raise ValueError("freq_hz must be below the Nyquist frequency")
    rng = np.random.default_rng(seed)
    n = max(1, int(round(spec.duration_s * sample_rate)))
    t = np.arange(n) / sample_rate
    waveform = np.zeros(n)
    amp = 1.0
    for i in range(spec.impact_count):
        freq = spec.freq_hz if i == 0 else spec.freq_hz * rng.uniform(0.9, 1.1)
        if i:
            amp *= rng.uniform(0.45, 0.7)
        tt = t - i * spec.inter_impact_s
        m = tt >= 0
        waveform[m] += amp * np.exp(-tt[m] / spec.decay_tau_s) * np.sin(
            2.0 * np.pi * freq * tt[m]
        )
    peak = np.abs(waveform).max()
    if peak > 0:
        waveform *= spec.peak_g / peak
    return waveform


def draw_event_spec(rng: np.random.Generator, kind: str, ranges: EventRanges) -> EventSpec:
    return EventSpec(
        kind=kind,
        peak_g=float(rng.uniform(*ranges.peak_g)),
        decay_tau_s=float(rng.uniform(*ranges.decay_tau_s)),
        freq_hz=float(rng.uniform(*ranges.freq_hz)),
        impact_count=int(rng.integers(ranges.impact_count[0], ranges.impact_count[1] + 1)),
        inter_impact_s=float(rng.uniform(*ranges.inter_impact_s)),
    )


def _inject(channels: np.ndarray, start: int, waveform: np.ndarray, rng: np.random.Generator):
    """Add an event to the vertical axis plus attenuated copies sideways."""
    end = start + len(waveform)
    channels[2, start:end] += waveform
    channels[0, start:end] += 0.25 * rng.uniform(0.5, 1.0) * waveform
    channels[1, start:end] += 0.25 * rng.uniform(0.5, 1.0) * waveform


@dataclass
class SyntheticData:
    """In-memory dataset plus the recordings/manifest it was built from."""

    recordings: list[Recording]
    entries: list[ManifestEntry]
    dataset: LabeledDataset

    def write(self, out_dir) -> str:
        """Save all recordings and the manifest; returns the manifest path."""
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for rec, entry in zip(self.recordings, self.entries):
            save_recording(rec, out / entry.path, entry.format)
        manifest_path = out / "manifest.jsonl"
        manifest_path.write_text(write_manifest(self.entries))
        return str(manifest_path)


def _event_start(rng, window_start, window_seconds, duration_s, jitter_s, margin=0.2):
    """Uniform start offset inside a window; ``jitter_s`` narrows the draw to
    a band around the centered position (controlled-drop protocol)."""
    lo = window_start + margin
    hi = window_start + window_seconds - duration_s - margin
    if hi < lo:
        raise ValueError(
            f"event of {duration_s:.2f}s does not fit a {window_seconds:.2f}s window"
        )
    if jitter_s is not None:
        center = window_start + (window_seconds - duration_s) / 2
        lo = max(lo, center - jitter_s)
        hi = min(hi, center + jitter_s)
    return float(rng.uniform(lo, hi))


def gen_dataset(
    n_noise: int,
    n_object: int,
    n_human: int,
    seed: int = 0,
    sigma_g: float = DEFAULT_NOISE_SIGMA_G,
    sample_rate: float = DEFAULT_SAMPLE_RATE,
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    object_ranges: EventRanges = OBJECT_RANGES,
    human_ranges: EventRanges = HUMAN_RANGES,
    event_jitter_s: float | None = None,
) -> SyntheticData:
    """Labeled desk-scale dataset, fully reproducible from the seed.

    Noise recordings are one window long.  Event recordings are three windows
    long with the event placed at a uniform offset inside the middle window,
    so each contributes one labeled event window plus two noise windows.
    ``event_jitter_s`` restricts placement to a band around the window center.
    """
    if min(n_noise, n_object, n_human) < 0:
        raise ValueError("counts must be >= 0")
    rng = np.random.default_rng(seed)
    recordings, entries = [], []
    windows, labels, metas = [], [], []

    def add_windows(rec, entry, event_window=None):
        wins = make_windows(rec, window_seconds, window_seconds, axis="z")
        for i, w in enumerate(wins):
            windows.append(w)
            if event_window is not None and i == event_window:
                labels.append(entry.label)
                metas.append(WindowMeta(entry.event_id, entry.setting_id))
            else:
                labels.append(LABEL_NOISE)
                metas.append(WindowMeta(None, entry.setting_id))

    for i in range(n_noise):
        rec = gen_noise(window_seconds, sigma_g, seed=int(rng.integers(2**31)), sample_rate=sample_rate)
        entry = ManifestEntry(
            path=f"noise_{i:04d}.fds",
            format="binary",
            label=LABEL_NOISE,
            setting_id=int(rng.integers(1, 9)),
        )
        recordings.append(rec)
        entries.append(entry)
        add_windows(rec, entry)

    def add_events(count, kind, label, ranges, tag):
        for i in range(count):
            setting = int(rng.integers(1, 9))
            spec = draw_event_spec(rng, kind, ranges)
            scaled = EventSpec(
                kind=spec.kind,
                peak_g=spec.peak_g * SETTING_AMPLITUDE[setting],
                decay_tau_s=spec.decay_tau_s,
                freq_hz=spec.freq_hz,
                impact_count=spec.impact_count,
                inter_impact_s=spec.inter_impact_s,
            )
            rec = gen_noise(
                3 * window_seconds, sigma_g, seed=int(rng.integers(2**31)), sample_rate=sample_rate
            )
            waveform = gen_event(scaled, seed=int(rng.integers(2**31)), sample_rate=sample_rate)
            start_s = _event_start(
                rng, window_seconds, window_seconds, scaled.duration_s, event_jitter_s
            )
            _inject(rec.channels, int(round(start_s * sample_rate)), waveform, rng)
            event_id = HUMAN_EVENT_ID if label == LABEL_HUMAN else int(rng.choice(OBJECT_EVENT_IDS))
            entry = ManifestEntry(
                path=f"{tag}_{i:04d}.fds",
                format="binary",
                label=label,
                event_id=event_id,
                setting_id=setting,
                event_time_s=start_s,
            )
            recordings.append(rec)
            entries.append(entry)
            add_windows(rec, entry, event_window=1)

    add_events(n_object, KIND_OBJECT, LABEL_OBJECT, object_ranges, "object")
    add_events(n_human, KIND_HUMAN, LABEL_HUMAN, human_ranges, "human")

    return SyntheticData(
        recordings=recordings,
        entries=entries,
        dataset=LabeledDataset(windows=windows, labels=labels, meta=metas),
    )


@dataclass(frozen=True)
class TruthEvent:
    window_index: int
    label: str
    time_s: float


def gen_scenario(
    duration_s: float,
    n_object: int,
    n_human: int,
    seed: int = 0,
    sigma_g: float = DEFAULT_NOISE_SIGMA_G,
    sample_rate: float = DEFAULT_SAMPLE_RATE,
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    object_ranges: EventRanges = OBJECT_RANGES,
    human_ranges: EventRanges = HUMAN_RANGES,
    event_jitter_s: float | None = None,
) -> tuple[Recording, list[TruthEvent]]:
    """Long recording with events injected into distinct windows, plus truth.

    Each event sits wholly inside its window (0.2 s margins), so a
    non-overlapping replay sees exactly one event per listed window index.
    """
    rng = np.random.default_rng(seed)
    n_events = n_object + n_human
    n_windows = int(duration_s // window_seconds)
    if n_events > n_windows:
        raise ValueError("more events than windows")
    rec = gen_noise(duration_s, sigma_g, seed=int(rng.integers(2**31)), sample_rate=sample_rate)
    indices = rng.choice(n_windows, size=n_events, replace=False)
    kinds = [LABEL_OBJECT] * n_object + [LABEL_HUMAN] * n_human
    rng.shuffle(kinds)
    truths = []
    for w_idx, label in zip(indices, kinds):
        ranges = human_ranges if label == LABEL_HUMAN else object_ranges
        kind = KIND_HUMAN if label == LABEL_HUMAN else KIND_OBJECT
        spec = draw_event_spec(rng, kind, ranges)
        time_s = _event_start(rng, w_idx * window_seconds, window_seconds,
                              spec.duration_s, event_jitter_s)
        waveform = gen_event(spec, seed=int(rng.integers(2**31)), sample_rate=sample_rate)
        _inject(rec.channels, int(round(time_s * sample_rate)), waveform, rng)
        truths.append(TruthEvent(window_index=int(w_idx), label=label, time_s=time_s))
    truths.sort(key=lambda ev: ev.window_index)
    return rec, truths
