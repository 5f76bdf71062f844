import numpy as np
import pytest

from bedfall.dsp import (
    StftConfig,
    hann,
    spectrogram,
    spectrogram_csv,
    spectrogram_pgm,
    stft,
)
from bedfall.errors import DataError
from bedfall.signal import Window

from conftest import naive_dft, rel_err


class TestHann:
    def test_length_three(self):
        assert np.allclose(hann(3), [0.0, 1.0, 0.0])

    def test_length_four(self):
        assert np.allclose(hann(4), [0.0, 0.75, 0.75, 0.0])

    def test_degenerate_length_one(self):
        assert np.array_equal(hann(1), [1.0])

    def test_symmetry_and_endpoints(self):
        w = hann(33)
        assert w[0] == 0.0 and w[-1] == 0.0
        assert np.allclose(w, w[::-1])


class TestStft:
    def test_default_shape(self):
        coeffs = stft(np.random.default_rng(0).normal(size=16000))
        assert coeffs.shape == (63, 251)

    def test_frame_count_formula(self):
        cfg = StftConfig(segment_len=8, hop=4, window_fn="rectangular", log_power=False)
        for n in (8, 9, 12, 16, 40):
            assert stft(np.zeros(n), cfg).shape[0] == (n - 8) // 4 + 1

    def test_constant_signal_rectangular_is_dc_only(self):
        cfg = StftConfig(segment_len=16, hop=16, window_fn="rectangular")
        coeffs = stft(np.full(64, 2.5), cfg)
        assert np.allclose(coeffs[:, 0], 2.5 * 16)
        assert np.max(np.abs(coeffs[:, 1:])) < 1e-9

    def test_single_frame_equals_plain_dft(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=8)
        cfg = StftConfig(segment_len=8, hop=8, window_fn="rectangular", one_sided=False)
        frame = stft(x, cfg)[0]
        assert rel_err(frame, naive_dft(x)) <= 1e-9

    def test_matches_naive_dft_with_taper_and_hops(self):
        rng = np.random.default_rng(42)
        for trial in range(20):
            n = int(rng.integers(12, 65))
            seg = int(rng.integers(4, n + 1))
            hop = int(rng.integers(1, seg + 1))
            x = rng.normal(size=n)
            for window_fn in ("hann", "rectangular"):
                cfg = StftConfig(segment_len=seg, hop=hop, window_fn=window_fn, one_sided=False)
                coeffs = stft(x, cfg)
                taper = hann(seg) if window_fn == "hann" else np.ones(seg)
                for i in range(coeffs.shape[0]):
                    expected = naive_dft(x[i * hop : i * hop + seg] * taper)
                    assert rel_err(coeffs[i], expected) <= 1e-9

    def test_one_sided_matches_two_sided_prefix(self):
        x = np.random.default_rng(3).normal(size=32)
        one = stft(x, StftConfig(segment_len=16, hop=8, one_sided=True))
        two = stft(x, StftConfig(segment_len=16, hop=8, one_sided=False))
        assert np.allclose(one, two[:, :9])

    def test_signal_shorter_than_segment(self):
        with pytest.raises(DataError):
            stft(np.zeros(10), StftConfig(segment_len=16, hop=8))

    def test_parseval_rectangular_single_frame(self):
        x = np.random.default_rng(11).normal(size=64)
        cfg = StftConfig(segment_len=64, hop=64, window_fn="rectangular", one_sided=False)
        coeffs = stft(x, cfg)[0]
        time_energy = float(np.sum(x**2))
        freq_energy = float(np.sum(np.abs(coeffs) ** 2)) / 64
        assert abs(time_energy - freq_energy) <= 1e-9 * time_energy

    def test_hop_shift_moves_frames_by_one(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=4000)
        cfg = StftConfig(segment_len=500, hop=250)
        a = stft(x, cfg)
        b = stft(x[250:], cfg)
        assert np.array_equal(b[: a.shape[0] - 1], a[1:])


class TestSpectrogram:
    def test_default_shape_16000(self):
        w = Window(np.random.default_rng(0).normal(size=16000), t_start=30.0)
        spec = spectrogram(w)
        assert spec.values.shape == (63, 251)
        assert spec.frame_times[0] == pytest.approx(30.0 + 250 / 1600)
        assert spec.bin_freqs[-1] == pytest.approx(800.0)

    def test_zero_signal_without_log(self):
        cfg = StftConfig(log_power=False)
        spec = spectrogram(np.zeros(16000), cfg)
        assert np.array_equal(spec.values, np.zeros((63, 251)))

    def test_power_nonnegative_pre_log(self):
        cfg = StftConfig(log_power=False)
        spec = spectrogram(np.random.default_rng(9).normal(size=16000), cfg)
        assert np.all(spec.values >= 0)

    def test_bin_center_sinusoid_peaks_at_bin(self):
        # f = k fs / L lands exactly on bin k; the taper spreads symmetric
        # leakage to k +- 1 only, so argmax stays at k in every frame.
        fs, L, k = 1600.0, 500, 40
        f = k * fs / L
        t = np.arange(16000) / fs
        x = np.sin(2 * np.pi * f * t)
        for window_fn in ("rectangular", "hann"):
            cfg = StftConfig(window_fn=window_fn, log_power=False)
            spec = spectrogram(x, cfg)
            assert np.array_equal(np.argmax(spec.values, axis=1), np.full(63, k))

    def test_log_power_floor(self):
        spec = spectrogram(np.zeros(16000), StftConfig(log_power=True, log_floor=1e-12))
        assert np.allclose(spec.values, np.log(1e-12))


class TestExports:
    def test_csv_shape(self):
        spec = spectrogram(np.random.default_rng(0).normal(size=16000))
        lines = spectrogram_csv(spec.values).strip().split("\n")
        assert len(lines) == 63
        assert all(len(line.split(",")) == 251 for line in lines)

    def test_csv_round_trip_values(self):
        values = np.random.default_rng(1).normal(size=(4, 6))
        parsed = np.array(
            [[float(v) for v in line.split(",")] for line in spectrogram_csv(values).strip().split("\n")]
        )
        assert np.allclose(parsed, values, rtol=1e-15)

    def test_pgm_header_and_size(self):
        values = np.arange(12.0).reshape(3, 4)
        data = spectrogram_pgm(values)
        assert data.startswith(b"P5\n3 4\n255\n")
        assert len(data) == len(b"P5\n3 4\n255\n") + 12

    def test_pgm_constant_input(self):
        data = spectrogram_pgm(np.full((2, 2), 7.0))
        assert data.endswith(bytes(4))


class TestConfigValidation:
    def test_hop_bounds(self):
        with pytest.raises(ValueError):
            StftConfig(segment_len=8, hop=0)
        with pytest.raises(ValueError):
            StftConfig(segment_len=8, hop=9)

    def test_window_fn_name(self):
        with pytest.raises(ValueError):
            StftConfig(window_fn="hamming")
