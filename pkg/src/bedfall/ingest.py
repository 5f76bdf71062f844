"""Recording parsers and dataset manifests.

Binary log layout (little-endian throughout):

    header  4s  magic "FDS1"
            u16 version (1)
            u32 sample rate, Hz
            u8  axis count (3)
            f32 scale, g per raw count
    record  u64 timestamp, microseconds since epoch (strictly increasing)
            i16 i16 i16 raw x, y, z counts

CSV recordings use the header line ``t,ax,ay,az`` with ``t`` in seconds and
accelerations in g.  Manifests are JSON lines with the keys ``path``,
``format``, ``label``, ``event_id``, ``setting_id``, ``event_time_s`` and an
optional ``provenance`` tag on augmented dumps.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .dataset import CLASSES, LABEL_NOISE, LabeledDataset, Provenance, WindowMeta
from .errors import DataError, ParseError
from .signal import Recording, make_windows

MAGIC = b"FDS1"
_HEADER = struct.Struct("<4sHIBf")
_RECORD_DTYPE = np.dtype([("ts", "<u8"), ("ax", "<i2"), ("ay", "<i2"), ("az", "<i2")])
RECORD_SIZE = _RECORD_DTYPE.itemsize  # 14 bytes

FORMATS = ("binary", "csv")


def parse_binary(data: bytes) -> Recording:
    """Decode a binary log; errors name the offending byte offset."""
    if len(data) < _HEADER.size:
        raise ParseError(f"truncated header: {len(data)} bytes, need {_HEADER.size}")
    magic, version, sample_rate, axis_count, scale = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ParseError(f"bad magic {magic!r} at offset 0")
    if version != 1:
        raise ParseError(f"unsupported version {version} at offset 4")
    if sample_rate == 0:
        raise ParseError("sample rate must be positive (offset 6)")
    if axis_count != 3:
        raise ParseError(f"expected 3 axes, got {axis_count} (offset 10)")
    if not scale > 0:
        raise ParseError(f"scale must be positive, got {scale} (offset 11)")
    body = data[_HEADER.size :]
    if len(body) % RECORD_SIZE != 0:
        whole = len(body) // RECORD_SIZE
        raise ParseError(
            f"truncated record at offset {_HEADER.size + whole * RECORD_SIZE}"
        )
    records = np.frombuffer(body, dtype=_RECORD_DTYPE)
    scale = float(np.float32(scale))
    if len(records):
        ts = records["ts"].astype(np.uint64)
        bad = np.nonzero(np.diff(ts.astype(np.int64)) <= 0)[0]
        if len(bad):
            offset = _HEADER.size + (int(bad[0]) + 1) * RECORD_SIZE
            raise ParseError(f"non-monotonic timestamp at offset {offset}")
        channels = np.stack(
            [records["ax"], records["ay"], records["az"]]
        ).astype(np.float64) * scale
        t0 = int(ts[0])
    else:
        ts = np.zeros(0, dtype=np.uint64)
        channels = np.zeros((3, 0))
        t0 = 0
    return Recording(
        sample_rate=float(sample_rate),
        channels=channels,
        t0_us=t0,
        scale=scale,
        version=int(version),
        timestamps_us=ts,
    )


def write_binary(recording: Recording) -> bytes:
    """Encode a recording; inverse of :func:`parse_binary` bit for bit."""
    scale = float(np.float32(recording.scale))
    header = _HEADER.pack(
        MAGIC, recording.version, int(round(recording.sample_rate)), 3, scale
    )
    n = recording.n_samples
    raw = np.rint(recording.channels / scale)
    if np.any(np.abs(raw) > 32767):
        raise DataError("acceleration exceeds the int16 range at this scale")
    if recording.timestamps_us is not None and len(recording.timestamps_us) == n:
        ts = np.asarray(recording.timestamps_us, dtype=np.uint64)
    else:
        period = 1e6 / recording.sample_rate
        ts = (recording.t0_us + np.rint(np.arange(n) * period)).astype(np.uint64)
    out = np.empty(n, dtype=_RECORD_DTYPE)
    out["ts"] = ts
    out["ax"], out["ay"], out["az"] = raw.astype(np.int16)
    return header + out.tobytes()


def parse_csv(text: str) -> Recording:
    """Decode a ``t,ax,ay,az`` recording; the rate is inferred from the median
    sample spacing and spacing jitter above 1% is rejected."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "t,ax,ay,az":
        raise ParseError("line 1: expected header 't,ax,ay,az'")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError(f"line {lineno}: expected 4 columns, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric cell") from None
    if len(rows) < 2:
        raise DataError("need at least 2 rows to infer the sample rate")
    arr = np.array(rows)
    t = arr[:, 0]
    dt = np.diff(t)
    med = float(np.median(dt))
    if med <= 0:
        raise DataError("time column must be strictly increasing")
    worst = int(np.argmax(np.abs(dt - med)))
    if abs(dt[worst] - med) > 0.01 * med:
        raise DataError(
            f"sample spacing jitter above 1% near line {worst + 3}: "
            f"dt={dt[worst]:.6g} vs median {med:.6g}"
        )
    return Recording(
        sample_rate=float(round(1.0 / med)),
        channels=arr[:, 1:4].T.copy(),
        t0_us=int(round(t[0] * 1e6)),
    )


def write_csv(recording: Recording) -> str:
    t0 = recording.t0_us / 1e6
    lines = ["t,ax,ay,az"]
    for i in range(recording.n_samples):
        t = t0 + i / recording.sample_rate
        x, y, z = (float(v) for v in recording.channels[:, i])
        lines.append(f"{t!r},{x!r},{y!r},{z!r}")
    return "\n".join(lines) + "\n"


def save_recording(recording: Recording, path, fmt: str | None = None):
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "binary"
    if fmt == "csv":
        path.write_text(write_csv(recording))
    else:
        path.write_bytes(write_binary(recording))


def load_recording(path, fmt: str | None = None) -> Recording:
    path = Path(path)
    if not path.exists():
        raise DataError(f"recording file not found: {path}")
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "binary"
    if fmt == "csv":
        return parse_csv(path.read_text())
    return parse_binary(path.read_bytes())


@dataclass
class ManifestEntry:
    path: str
    format: str
    label: str
    event_id: int | None = None
    setting_id: int | None = None
    event_time_s: float | None = None
    provenance: Provenance | None = None


_MANIFEST_KEYS = {
    "path", "format", "label", "event_id", "setting_id", "event_time_s", "provenance",
}


def _validate_entry(entry: ManifestEntry, where: str):
    if entry.format not in FORMATS:
        raise ParseError(f"{where}: format must be one of {FORMATS}")
    if entry.label not in CLASSES:
        raise ParseError(f"{where}: label must be one of {CLASSES}")
    if entry.event_id is not None and not 1 <= entry.event_id <= 15:
        raise ParseError(f"{where}: event_id must be in 1..15")
    if entry.setting_id is not None and not 1 <= entry.setting_id <= 8:
        raise ParseError(f"{where}: setting_id must be in 1..8")
    if entry.event_time_s is not None and entry.event_time_s < 0:
        raise ParseError(f"{where}: event_time_s must be >= 0")


def read_manifest(text: str) -> list[ManifestEntry]:
    """Parse JSON-lines manifest text; unknown keys are rejected."""
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise ParseError(f"line {lineno}: expected a JSON object")
        unknown = set(obj) - _MANIFEST_KEYS
        if unknown:
            raise ParseError(f"line {lineno}: unknown keys {sorted(unknown)}")
        for req in ("path", "format", "label"):
            if req not in obj:
                raise ParseError(f"line {lineno}: missing key {req!r}")
        prov = obj.get("provenance")
        if prov is not None:
            try:
                prov = Provenance(
                    source=int(prov["source"]),
                    method=str(prov["method"]),
                    copy=int(prov["copy"]),
                )
            except (TypeError, KeyError):
                raise ParseError(f"line {lineno}: malformed provenance tag") from None
        entry = ManifestEntry(
            path=str(obj["path"]),
            format=str(obj["format"]),
            label=str(obj["label"]),
            event_id=None if obj.get("event_id") is None else int(obj["event_id"]),
            setting_id=None if obj.get("setting_id") is None else int(obj["setting_id"]),
            event_time_s=None
            if obj.get("event_time_s") is None
            else float(obj["event_time_s"]),
            provenance=prov,
        )
        _validate_entry(entry, f"line {lineno}")
        entries.append(entry)
    return entries


def write_manifest(entries) -> str:
    lines = []
    for entry in entries:
        obj = asdict(entry)
        if entry.provenance is None:
            del obj["provenance"]
        lines.append(json.dumps(obj, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


def load_manifest(path) -> list[ManifestEntry]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    return read_manifest(path.read_text())


def load_dataset(
    entries,
    window_seconds: float = 10.0,
    step_seconds: float | None = None,
    axis: str = "z",
    base_dir=None,
) -> LabeledDataset:
    """Window every manifest recording and attach labels.

    Noise recordings contribute all their windows labeled noise.  Event
    recordings contribute the window containing ``event_time_s`` with the
    manifest label and the remaining windows as noise.  Event entries without
    a time are replay material and are skipped.
    """
    if step_seconds is None:
        step_seconds = window_seconds
    base = Path(base_dir) if base_dir is not None else None
    windows, labels, metas = [], [], []
    for entry in entries:
        path = Path(entry.path)
        if base is not None and not path.is_absolute():
            path = base / path
        rec = load_recording(path, entry.format)
        wins = make_windows(rec, window_seconds, step_seconds, axis)
        if entry.label == LABEL_NOISE:
            for w in wins:
                windows.append(w)
                labels.append(LABEL_NOISE)
                metas.append(WindowMeta(event_id=None, setting_id=entry.setting_id))
            continue
        if entry.event_time_s is None:
            # Roughly labeled replay material: never training data.
            continue
        t = entry.event_time_s
        if t > rec.duration_s:
            raise DataError(
                f"{entry.path}: event_time_s {t} is outside the {rec.duration_s:.1f} s recording"
            )
        hits = [
            i for i, w in enumerate(wins) if w.t_start <= t < w.t_start + window_seconds
        ]
        if not hits:
            raise DataError(
                f"{entry.path}: event_time_s {t} is not contained in any window"
            )
        for i, w in enumerate(wins):
            windows.append(w)
            if i in hits:
                labels.append(entry.label)
                metas.append(WindowMeta(event_id=entry.event_id, setting_id=entry.setting_id))
            else:
                labels.append(LABEL_NOISE)
                metas.append(WindowMeta(event_id=None, setting_id=entry.setting_id))
    return LabeledDataset(windows=windows, labels=labels, meta=metas)
