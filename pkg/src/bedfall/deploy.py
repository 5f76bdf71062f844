"""Streaming replay of a recording through the two-stage cascade.

Every window gets a prefilter score; only windows at or above the stage-1
threshold are transformed and classified by the CNN, which keeps transform and
inference counts equal to the number of stage-1 positives.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from .dsp import StftConfig, spectrogram
from .errors import ParseError
from .models.cnn import CnnModel, cnn_forward
from .models.logreg import LogRegModel, logreg_predict
from .signal import Recording, extract_features, make_windows

VERDICT_NOISE = "noise"
VERDICT_EVENT = "event-nonfall"
VERDICT_HUMAN = "human-fall"
VERDICTS = (VERDICT_NOISE, VERDICT_EVENT, VERDICT_HUMAN)

_LOG_KEYS = ("window_index", "t_start", "stage1_score", "stage2_score", "verdict")


@dataclass
class DetectionEvent:
    window_index: int
    t_start: float
    stage1_score: float
    stage2_score: float | None
    verdict: str


def detect_stream(
    recording: Recording,
    logreg: LogRegModel,
    cnn: CnnModel,
    tau1: float = 0.5,
    tau2: float | None = None,
    window_seconds: float = 10.0,
    step_seconds: float | None = None,
    axis: str = "z",
    stft_config: StftConfig | None = None,
    realtime: bool = False,
) -> list[DetectionEvent]:
    """One DetectionEvent per window, in chronological order.

    ``tau2`` defaults to the threshold stored with the CNN model (falling back
    to 0.5).  Spectrograms are computed lazily, only for stage-1 positives.
    ``realtime`` throttles the replay to wall clock (one step per step
    duration) for demonstrations; results are unchanged.
    """
    if stft_config is None:
        stft_config = StftConfig()
    if tau2 is None:
        tau2 = cnn.threshold if cnn.threshold is not None else 0.5
    pace = (step_seconds if step_seconds is not None else window_seconds) if realtime else None
    started = time.monotonic()
    events = []
    for i, window in enumerate(make_windows(recording, window_seconds, step_seconds, axis)):
        if pace is not None:
            behind = (i + 1) * pace - (time.monotonic() - started)
            if behind > 0:
                time.sleep(behind)
        s1 = logreg_predict(logreg, extract_features(window))
        if s1 >= tau1:
            spec = spectrogram(window, stft_config, recording.sample_rate)
            s2 = cnn_forward(cnn, spec.values)
            verdict = VERDICT_HUMAN if s2 >= tau2 else VERDICT_EVENT
        else:
            s2 = None
            verdict = VERDICT_NOISE
        events.append(
            DetectionEvent(
                window_index=i,
                t_start=window.t_start,
                stage1_score=float(s1),
                stage2_score=None if s2 is None else float(s2),
                verdict=verdict,
            )
        )
    return events


def write_event_log(events, path=None) -> str:
    """Serialize events as NDJSON; returns the text (and writes it if a path
    is given).  The formatting is canonical so rewrites are byte-identical."""
    lines = []
    for ev in events:
        lines.append(
            json.dumps(
                {
                    "window_index": ev.window_index,
                    "t_start": ev.t_start,
                    "stage1_score": ev.stage1_score,
                    "stage2_score": ev.stage2_score,
                    "verdict": ev.verdict,
                },
                sort_keys=True,
            )
        )
    text = "\n".join(lines) + ("\n" if lines else "")
    if path is not None:
        Path(path).write_text(text)
    return text


def read_event_log(text: str) -> list[DetectionEvent]:
    """Parse NDJSON event lines; errors name the offending line."""
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise ParseError(f"line {lineno}: expected a JSON object")
        missing = [k for k in _LOG_KEYS if k not in obj]
        if missing:
            raise ParseError(f"line {lineno}: missing keys {missing}")
        unknown = set(obj) - set(_LOG_KEYS)
        if unknown:
            raise ParseError(f"line {lineno}: unknown keys {sorted(unknown)}")
        if obj["verdict"] not in VERDICTS:
            raise ParseError(f"line {lineno}: unknown verdict {obj['verdict']!r}")
        s2 = obj["stage2_score"]
        if (obj["verdict"] == VERDICT_NOISE) != (s2 is None):
            raise ParseError(
                f"line {lineno}: stage2_score must be present exactly for non-noise verdicts"
            )
        events.append(
            DetectionEvent(
                window_index=int(obj["window_index"]),
                t_start=float(obj["t_start"]),
                stage1_score=float(obj["stage1_score"]),
                stage2_score=None if s2 is None else float(s2),
                verdict=obj["verdict"],
            )
        )
    return events
