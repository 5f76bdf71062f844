import json
import struct

import numpy as np
import pytest

from bedfall.dataset import LABEL_HUMAN, LABEL_NOISE
from bedfall.errors import DataError, ParseError
from bedfall.ingest import (
    RECORD_SIZE,
    ManifestEntry,
    load_dataset,
    parse_binary,
    parse_csv,
    read_manifest,
    save_recording,
    write_binary,
    write_csv,
    write_manifest,
)
from bedfall.signal import Recording


def make_header(sample_rate=1600, scale=0.001, version=1, axis_count=3, magic=b"FDS1"):
    return struct.pack("<4sHIBf", magic, version, sample_rate, axis_count, scale)


def make_record(ts, ax, ay, az):
    return struct.pack("<Qhhh", ts, ax, ay, az)


class TestParseBinary:
    def test_scale_arithmetic(self):
        data = make_header(1600, 0.001) + make_record(0, 1000, 0, -1000)
        rec = parse_binary(data)
        scale = float(np.float32(0.001))
        assert rec.channels[:, 0].tolist() == [1000 * scale, 0.0, -1000 * scale]
        assert rec.sample_rate == 1600.0
        assert rec.t0_us == 0

    def test_empty_payload_accepted(self):
        rec = parse_binary(make_header())
        assert rec.n_samples == 0

    def test_bad_magic(self):
        with pytest.raises(ParseError, match="magic"):
            parse_binary(make_header(magic=b"XXXX") + make_record(0, 0, 0, 0))

    def test_truncated_record_offset(self):
        data = make_header() + make_record(0, 1, 2, 3) + b"\x00\x01"
        with pytest.raises(ParseError, match=str(15 + RECORD_SIZE)):
            parse_binary(data)

    def test_non_monotonic_timestamp_offset(self):
        data = make_header() + make_record(100, 0, 0, 0) + make_record(100, 0, 0, 0)
        with pytest.raises(ParseError, match=str(15 + RECORD_SIZE)):
            parse_binary(data)

    def test_bad_version(self):
        with pytest.raises(ParseError, match="version"):
            parse_binary(make_header(version=2))


class TestBinaryRoundTrip:
    def test_uniform_grid_round_trip(self):
        data = make_header() + b"".join(
            make_record(625 * i, i, -i, 2 * i) for i in range(100)
        )
        assert write_binary(parse_binary(data)) == data

    def test_arbitrary_timestamps_round_trip(self):
        rng = np.random.default_rng(0)
        ts = np.cumsum(rng.integers(1, 2000, size=50)).astype(np.uint64)
        data = make_header(800, 0.004) + b"".join(
            make_record(int(t), int(rng.integers(-30000, 30000)), 0, 5) for t in ts
        )
        assert write_binary(parse_binary(data)) == data

    def test_write_synthesizes_uniform_timestamps(self):
        rec = Recording(sample_rate=1600.0, channels=np.zeros((3, 4)), t0_us=1000)
        parsed = parse_binary(write_binary(rec))
        assert parsed.timestamps_us.tolist() == [1000, 1625, 2250, 2875]

    def test_out_of_range_value_rejected(self):
        rec = Recording(sample_rate=1600.0, channels=np.full((3, 1), 40.0), scale=0.001)
        with pytest.raises(DataError):
            write_binary(rec)


class TestParseCsv:
    def test_rate_from_spacing(self):
        lines = ["t,ax,ay,az"] + [f"{i * 0.000625},0.0,0.0,0.0" for i in range(16001)]
        rec = parse_csv("\n".join(lines))
        assert rec.sample_rate == 1600.0
        assert rec.n_samples == 16001

    def test_two_rows(self):
        rec = parse_csv("t,ax,ay,az\n0.0,1.0,2.0,3.0\n0.5,4.0,5.0,6.0\n")
        assert rec.sample_rate == 2.0
        assert rec.channels[:, 1].tolist() == [4.0, 5.0, 6.0]

    def test_non_numeric_cell_names_line(self):
        with pytest.raises(ParseError, match="line 3"):
            parse_csv("t,ax,ay,az\n0.0,0,0,0\n0.5,oops,0,0\n")

    def test_jitter_rejected(self):
        text = "t,ax,ay,az\n0.0,0,0,0\n1.0,0,0,0\n2.5,0,0,0\n3.5,0,0,0\n"
        with pytest.raises(DataError, match="jitter"):
            parse_csv(text)

    def test_missing_header(self):
        with pytest.raises(ParseError, match="line 1"):
            parse_csv("time,x,y,z\n0,0,0,0\n")

    def test_single_row_rejected(self):
        with pytest.raises(DataError):
            parse_csv("t,ax,ay,az\n0.0,0,0,0\n")

    def test_csv_write_read_round_trip(self):
        rng = np.random.default_rng(2)
        rec = Recording(sample_rate=1600.0, channels=rng.normal(size=(3, 20)))
        back = parse_csv(write_csv(rec))
        assert back.sample_rate == rec.sample_rate
        assert np.array_equal(back.channels, rec.channels)

    def test_binary_and_csv_agree_within_quantization(self):
        rng = np.random.default_rng(3)
        channels = rng.uniform(-1, 1, size=(3, 64))
        rec = Recording(sample_rate=1600.0, channels=channels, scale=0.001)
        quantized = parse_binary(write_binary(rec))
        exact = parse_csv(write_csv(rec))
        scale = float(np.float32(0.001))
        assert np.max(np.abs(quantized.channels - exact.channels)) <= scale / 2


class TestManifest:
    def entry(self, **kw):
        base = dict(path="a.fds", format="binary", label=LABEL_NOISE)
        base.update(kw)
        return ManifestEntry(**base)

    def test_round_trip(self):
        entries = [
            self.entry(),
            self.entry(path="h.fds", label=LABEL_HUMAN, event_id=11, setting_id=3, event_time_s=12.5),
        ]
        assert read_manifest(write_manifest(entries)) == entries

    def test_unknown_key_rejected(self):
        line = json.dumps({"path": "a", "format": "binary", "label": "noise", "foo": 1})
        with pytest.raises(ParseError, match="unknown keys"):
            read_manifest(line)

    def test_bad_event_id(self):
        line = json.dumps({"path": "a", "format": "binary", "label": "noise", "event_id": 16})
        with pytest.raises(ParseError, match="event_id"):
            read_manifest(line)

    def test_bad_label(self):
        line = json.dumps({"path": "a", "format": "binary", "label": "cat"})
        with pytest.raises(ParseError, match="label"):
            read_manifest(line)

    def test_line_number_in_error(self):
        text = write_manifest([self.entry()]) + "{not json}\n"
        with pytest.raises(ParseError, match="line 2"):
            read_manifest(text)


class TestLoadDataset:
    def write_recording(self, tmp_path, name, seconds, event_time=None, peak=1.0):
        n = int(seconds * 1600)
        channels = np.zeros((3, n))
        if event_time is not None:
            channels[2, int(event_time * 1600)] = peak
        rec = Recording(sample_rate=1600.0, channels=channels, scale=0.001)
        save_recording(rec, tmp_path / name, "binary")

    def test_noise_recording_all_windows(self, tmp_path):
        self.write_recording(tmp_path, "n.fds", 30)
        entries = [ManifestEntry(path="n.fds", format="binary", label=LABEL_NOISE)]
        data = load_dataset(entries, base_dir=tmp_path)
        assert len(data) == 3
        assert set(data.labels) == {LABEL_NOISE}

    def test_event_recording_labels_containing_window(self, tmp_path):
        self.write_recording(tmp_path, "h.fds", 30, event_time=12.0)
        entries = [
            ManifestEntry(path="h.fds", format="binary", label=LABEL_HUMAN, event_id=11, event_time_s=12.0)
        ]
        data = load_dataset(entries, base_dir=tmp_path)
        assert data.labels == [LABEL_NOISE, LABEL_HUMAN, LABEL_NOISE]
        assert data.meta[1].event_id == 11
        assert data.meta[0].event_id is None

    def test_empty_manifest(self):
        data = load_dataset([])
        assert len(data) == 0

    def test_missing_file(self, tmp_path):
        entries = [ManifestEntry(path="gone.fds", format="binary", label=LABEL_NOISE)]
        with pytest.raises(DataError, match="not found"):
            load_dataset(entries, base_dir=tmp_path)

    def test_event_time_outside_recording(self, tmp_path):
        self.write_recording(tmp_path, "h.fds", 30, event_time=5.0)
        entries = [
            ManifestEntry(path="h.fds", format="binary", label=LABEL_HUMAN, event_time_s=99.0)
        ]
        with pytest.raises(DataError, match="outside"):
            load_dataset(entries, base_dir=tmp_path)

    def test_unlabeled_replay_entries_skipped(self, tmp_path):
        self.write_recording(tmp_path, "r.fds", 30)
        entries = [
            ManifestEntry(path="r.fds", format="binary", label=LABEL_HUMAN, event_time_s=None)
        ]
        assert len(load_dataset(entries, base_dir=tmp_path)) == 0
