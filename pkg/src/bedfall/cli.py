"""Command-line entry point.

One executable with subcommands; shared settings may come from a key=value
configuration file (--config), with command-line flags taking precedence.
Exit codes: 0 ok, 2 detect found a human fall, 64 usage error, 65 data error,
70 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import augment as aug
from . import deploy, dsp, evaluate, ingest, synth
from .dataset import LABEL_HUMAN, LABEL_NOISE, LabeledDataset
from .errors import BedfallError, ConfigError, DataError
from .models import (
    TrainConfig,
    init_cnn,
    load_model,
    logreg_accuracy,
    logreg_train,
    save_model,
)
from .models.losses import LOSS_BCE, LOSS_KINDS
from .signal import AXES, FEATURE_NAMES, extract_features, feature_matrix, make_windows

EXIT_OK = 0
EXIT_FALL = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


SCHEMA = {
    "sample_rate": dict(type=float, default=1600.0, help="sampling rate in Hz"),
    "window_seconds": dict(type=float, default=10.0, help="classification window length"),
    "step_seconds": dict(type=float, default=None, help="window step (default: window length)"),
    "axis": dict(type=str, default="z", choices=AXES, help="axis fed to the detector"),
    "segment_len": dict(type=int, default=500, help="transform segment length in samples"),
    "hop": dict(type=int, default=250, help="transform hop in samples"),
    "window_fn": dict(type=str, default="hann", choices=dsp.WINDOW_FNS, help="transform taper"),
    "log_power": dict(type=_parse_bool, default=True, help="log-scale spectrogram power"),
    "log_floor": dict(type=float, default=1e-12, help="additive floor before the log"),
    "seed": dict(type=int, default=0, help="seed for all randomness in the command"),
    "tau1": dict(type=float, default=0.5, help="stage-1 score threshold"),
    "tau2": dict(type=float, default=None, help="stage-2 threshold (default: stored with model)"),
    "logreg_model": dict(type=str, default=None, help="path of the stage-1 model file"),
    "cnn_model": dict(type=str, default=None, help="path of the stage-2 model file"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_schema_flags(parser, keys):
    for key in keys:
        spec = SCHEMA[key]
        kwargs = dict(type=spec["type"], default=None, help=spec["help"])
        if "choices" in spec:
            kwargs["choices"] = spec["choices"]
        parser.add_argument("--" + key.replace("_", "-"), dest=key, **kwargs)


def load_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected KEY=VALUE")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in SCHEMA:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if raw.lower() == "none" or raw == "":
            values[key] = None
            continue
        try:
            value = SCHEMA[key]["type"](raw)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
        choices = SCHEMA[key].get("choices")
        if choices and value not in choices:
            raise ConfigError(f"{path}:{lineno}: {key} must be one of {choices}")
        values[key] = value
    return values


class Settings:
    """Flag value, else config-file value, else schema default."""

    def __init__(self, args, file_values):
        self.args = args
        self.file_values = file_values

    def get(self, key):
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        if key in self.file_values and self.file_values[key] is not None:
            return self.file_values[key]
        return SCHEMA[key]["default"]

    def stft_config(self) -> dsp.StftConfig:
        return dsp.StftConfig(
            segment_len=self.get("segment_len"),
            hop=self.get("hop"),
            window_fn=self.get("window_fn"),
            one_sided=True,
            log_power=self.get("log_power"),
            log_floor=self.get("log_floor"),
        )


def _load_labeled(args, cfg: Settings, events_only: bool) -> LabeledDataset:
    manifest_path = Path(args.manifest)
    entries = ingest.load_manifest(manifest_path)
    data = ingest.load_dataset(
        entries,
        window_seconds=cfg.get("window_seconds"),
        step_seconds=cfg.get("step_seconds"),
        axis=cfg.get("axis"),
        base_dir=manifest_path.parent,
    )
    if events_only:
        keep = [i for i, lab in enumerate(data.labels) if lab != LABEL_NOISE]
        data = data.subset(keep)
    if not len(data):
        raise DataError("manifest produced an empty dataset")
    return data


def _parse_method(text: str):
    parts = text.split(":")
    if parts[0] in ("duplicate", "duplication") and len(parts) == 2:
        return aug.Duplication(copies=int(parts[1]))
    if parts[0] in ("amplify", "amplification") and len(parts) in (3, 4):
        copies = int(parts[3]) if len(parts) == 4 else None
        return aug.Amplification(g_lo=float(parts[1]), g_hi=float(parts[2]), copies=copies)
    raise ConfigError(
        f"bad augmentation method {text!r}; use duplicate:D or amplify:LO:HI[:COPIES]"
    )


# ---------------------------------------------------------------- commands


def cmd_synth(args, cfg: Settings) -> int:
    seed = cfg.get("seed")
    rate = cfg.get("sample_rate")
    if args.dataset_dir:
        data = synth.gen_dataset(
            args.noise, args.objects, args.humans, seed=seed,
            sigma_g=args.sigma_g, sample_rate=rate,
            window_seconds=cfg.get("window_seconds"),
        )
        manifest = data.write(args.dataset_dir)
        counts = data.dataset.class_counts()
        print(f"wrote {len(data.recordings)} recordings and {manifest}")
        print(f"windows by class: {counts}")
        return EXIT_OK
    if args.out is None:
        raise ConfigError("recording mode needs --out (or use --dataset-dir)")
    duration = args.duration_s if args.duration_s is not None else (args.hours or 0.0) * 3600.0
    if duration <= 0:
        raise ConfigError("give a positive --duration-s or --hours")
    recording, truths = synth.gen_scenario(
        duration, args.objects, args.humans, seed=seed,
        sigma_g=args.sigma_g, sample_rate=rate,
        window_seconds=cfg.get("window_seconds"),
    )
    ingest.save_recording(recording, args.out)
    print(f"wrote {args.out}: {recording.duration_s:.0f} s at {recording.sample_rate:.0f} Hz, "
          f"{len(truths)} injected events")
    if args.truth:
        lines = [
            json.dumps(
                {"window_index": ev.window_index, "label": ev.label, "time_s": ev.time_s},
                sort_keys=True,
            )
            for ev in truths
        ]
        Path(args.truth).write_text("\n".join(lines) + ("\n" if lines else ""))
    return EXIT_OK


def cmd_ingest(args, cfg: Settings) -> int:
    recording = ingest.load_recording(args.input, args.format)
    peaks = np.max(np.abs(recording.channels), axis=1) if recording.n_samples else np.zeros(3)
    print(f"samples: {recording.n_samples}")
    print(f"sample_rate: {recording.sample_rate:.6g} Hz")
    print(f"duration: {recording.duration_s:.6g} s")
    print(f"peak |acceleration| (x, y, z): {peaks[0]:.6g}, {peaks[1]:.6g}, {peaks[2]:.6g} g")
    if args.out:
        ingest.save_recording(recording, args.out, args.to)
        print(f"converted to {args.out}")
    return EXIT_OK


def cmd_features(args, cfg: Settings) -> int:
    recording = ingest.load_recording(args.input)
    windows = make_windows(
        recording, cfg.get("window_seconds"), cfg.get("step_seconds"), cfg.get("axis")
    )
    lines = ["window_index,t_start," + ",".join(FEATURE_NAMES)]
    for i, window in enumerate(windows):
        fv = extract_features(window)
        lines.append(
            f"{i},{float(window.t_start)!r}," + ",".join(repr(float(v)) for v in fv.as_array())
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_spectrogram(args, cfg: Settings) -> int:
    recording = ingest.load_recording(args.input)
    windows = make_windows(
        recording, cfg.get("window_seconds"), cfg.get("step_seconds"), cfg.get("axis")
    )
    if not 0 <= args.window_index < len(windows):
        raise DataError(f"window index {args.window_index} out of range 0..{len(windows) - 1}")
    spec = dsp.spectrogram(windows[args.window_index], cfg.stft_config(), recording.sample_rate)
    csv_text = dsp.spectrogram_csv(spec.values)
    if args.csv:
        Path(args.csv).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    if args.pgm:
        Path(args.pgm).write_bytes(dsp.spectrogram_pgm(spec.values))
    print(f"spectrogram shape: {spec.values.shape[0]} frames x {spec.values.shape[1]} bins",
          file=sys.stderr)
    return EXIT_OK


def cmd_train_logreg(args, cfg: Settings) -> int:
    data = _load_labeled(args, cfg, events_only=False)
    X = feature_matrix(data.windows)
    y = data.binary_labels(positive=tuple(c for c in data.class_counts() if c != LABEL_NOISE))
    model, history = logreg_train(X, y, lr=args.lr, epochs=args.epochs, seed=cfg.get("seed"))
    save_model(model, args.out)
    acc = logreg_accuracy(model, X, y)
    print(f"trained on {len(y)} windows: loss {history[0]:.4f} -> {history[-1]:.4f}, "
          f"train accuracy {acc:.3f}")
    print(f"saved {args.out}")
    return EXIT_OK


def _train_cnn_on(data: LabeledDataset, args, cfg: Settings):
    from .models.cnn import cnn_forward, train_cnn

    stft_config = cfg.stft_config()
    rate = cfg.get("sample_rate")
    X = np.stack([dsp.spectrogram(w, stft_config, rate).values for w in data.windows])
    y = data.binary_labels(LABEL_HUMAN)
    seed = cfg.get("seed")
    counts = np.bincount(y, minlength=2)
    k = max(2, int(round(1.0 / args.val_fraction))) if args.val_fraction > 0 else 0
    config = TrainConfig(
        loss=args.loss, learning_rate=args.lr, epochs=args.epochs,
        batch_size=args.batch_size, optimizer="adam", seed=seed,
        standardize=args.standardize,
    )
    model = init_cnn(X.shape[1:], args.filters, (X.shape[1], args.kernel_width), seed=seed)
    if k and counts.min() >= k:
        train_idx, val_idx = evaluate.stratified_kfold(y, k, seed)[0]
        result = train_cnn(
            X[train_idx], y[train_idx], config, model,
            validation=(X[val_idx], y[val_idx]),
        )
        scores = np.array([cnn_forward(result.model, x) for x in X[val_idx]])
        threshold, prec = evaluate.select_threshold(scores, y[val_idx])
        result.model.threshold = threshold
        print(f"validation precision at recall 1: {prec:.3f} (threshold {threshold:.4f})")
    else:
        result = train_cnn(X, y, config, model)
        scores = np.array([cnn_forward(result.model, x) for x in X])
        threshold, _ = evaluate.select_threshold(scores, y)
        result.model.threshold = threshold
        print("dataset too small for a validation split; threshold from training scores")
    print(f"training loss {result.loss_history[0]:.4f} -> {result.loss_history[-1]:.4f}")
    return result.model


def cmd_train_cnn(args, cfg: Settings) -> int:
    data = _load_labeled(args, cfg, events_only=not args.include_noise)
    model = _train_cnn_on(data, args, cfg)
    save_model(model, args.out)
    print(f"saved {args.out}")
    return EXIT_OK


def cmd_augment(args, cfg: Settings) -> int:
    data = _load_labeled(args, cfg, events_only=False)
    method = _parse_method(args.method)
    augmented = aug.augment_dataset(data, method, seed=cfg.get("seed"))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rate = cfg.get("sample_rate")
    window_seconds = cfg.get("window_seconds")
    entries = []
    for i, (window, label, meta, prov) in enumerate(
        zip(augmented.windows, augmented.labels, augmented.meta, augmented.provenance)
    ):
        channels = np.zeros((3, len(window.samples)))
        channels[2] = window.samples
        rec = ingest.Recording(sample_rate=rate, channels=channels)
        name = f"window_{i:05d}.fds"
        ingest.save_recording(rec, out / name, "binary")
        entries.append(
            ingest.ManifestEntry(
                path=name,
                format="binary",
                label=label,
                event_id=meta.event_id,
                setting_id=meta.setting_id,
                event_time_s=None if label == LABEL_NOISE else window_seconds / 2,
                provenance=prov,
            )
        )
    (out / "manifest.jsonl").write_text(ingest.write_manifest(entries))
    print(f"{method.describe()}: {len(data)} -> {len(augmented)} windows, wrote {out}/manifest.jsonl")
    return EXIT_OK


def cmd_evaluate(args, cfg: Settings) -> int:
    data = _load_labeled(args, cfg, events_only=not args.include_noise)
    method = _parse_method(args.augment)
    config = TrainConfig(
        loss=args.loss, learning_rate=args.lr, epochs=args.epochs,
        batch_size=args.batch_size, optimizer="adam", seed=cfg.get("seed"),
        standardize=args.standardize,
    )
    report = evaluate.run_experiment(
        data, method, config,
        n_filters=args.filters, kernel_width=args.kernel_width,
        k=args.k, seed=cfg.get("seed"),
        stft_config=cfg.stft_config(), sample_rate=cfg.get("sample_rate"),
        jobs=args.jobs,
    )
    if args.report:
        Path(args.report).write_text(report.jsonl())
    if args.summary:
        Path(args.summary).write_text(report.csv_summary())
    for variant in evaluate.VARIANTS:
        per_fold = ", ".join(f"{fold[variant].precision:.3f}" for fold in report.folds)
        print(f"{variant:>15}: mean precision {report.means[variant]:.3f} (folds: {per_fold})")
    return EXIT_OK


def cmd_tune(args, cfg: Settings) -> int:
    data = _load_labeled(args, cfg, events_only=not args.include_noise)
    space = evaluate.SearchSpace()
    if args.filters:
        space = evaluate.SearchSpace(filters=tuple(int(v) for v in args.filters.split(",")),
                                     kernel_widths=space.kernel_widths,
                                     losses=space.losses, learning_rates=space.learning_rates)
    if args.kernel_widths:
        space = evaluate.SearchSpace(filters=space.filters,
                                     kernel_widths=tuple(int(v) for v in args.kernel_widths.split(",")),
                                     losses=space.losses, learning_rates=space.learning_rates)
    result = evaluate.successive_halving_tune(
        space, data,
        n_configs=args.n_configs, max_epochs=args.max_epochs, reduction=args.reduction,
        seed=cfg.get("seed"), batch_size=args.batch_size,
        stft_config=cfg.stft_config(), sample_rate=cfg.get("sample_rate"),
        standardize=args.standardize, jobs=args.jobs,
    )
    if args.trial_log:
        lines = [json.dumps(rec.as_dict(), sort_keys=True) for rec in result.trials]
        with open(args.trial_log, "a") as handle:
            handle.write("\n".join(lines) + "\n")
    best = result.best
    summary = {
        "n_filters": best.n_filters,
        "kernel_width": best.kernel_width,
        "loss": best.loss,
        "learning_rate": best.learning_rate,
    }
    if args.out:
        Path(args.out).write_text(json.dumps(summary, sort_keys=True) + "\n")
    print("best configuration: " + json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_detect(args, cfg: Settings) -> int:
    logreg_path = cfg.get("logreg_model")
    cnn_path = cfg.get("cnn_model")
    if not logreg_path or not cnn_path:
        raise ConfigError("detect needs --logreg-model and --cnn-model")
    logreg = load_model(logreg_path)
    cnn = load_model(cnn_path)
    recording = ingest.load_recording(args.input)
    events = deploy.detect_stream(
        recording, logreg, cnn,
        tau1=cfg.get("tau1"), tau2=cfg.get("tau2"),
        window_seconds=cfg.get("window_seconds"), step_seconds=cfg.get("step_seconds"),
        axis=cfg.get("axis"), stft_config=cfg.stft_config(),
        realtime=args.realtime,
    )
    text = deploy.write_event_log(events, args.out)
    if args.out is None:
        sys.stdout.write(text)
    stage1 = sum(1 for ev in events if ev.stage2_score is not None)
    falls = sum(1 for ev in events if ev.verdict == deploy.VERDICT_HUMAN)
    print(
        f"{len(events)} windows, {stage1} stage-1 events, {falls} human-fall verdicts",
        file=sys.stderr,
    )
    return EXIT_FALL if falls else EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> _Parser:
    parser = _Parser(prog="bedfall", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text, schema_keys):
        p = sub.add_parser(name, help=help_text, parents=[],
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.add_argument("--config", default=None, help="key=value configuration file")
        _add_schema_flags(p, schema_keys)
        p.set_defaults(func=func)
        return p

    p = command("synth", cmd_synth, "generate synthetic recordings or a labeled dataset",
                ("sample_rate", "seed", "window_seconds"))
    p.add_argument("--out", default=None, help="recording output path (.fds binary or .csv)")
    p.add_argument("--hours", type=float, default=None, help="recording length in hours")
    p.add_argument("--duration-s", type=float, default=None, help="recording length in seconds")
    p.add_argument("--objects", type=int, default=0, help="object-impact events to inject")
    p.add_argument("--humans", type=int, default=0, help="human-fall events to inject")
    p.add_argument("--sigma-g", type=float, default=synth.DEFAULT_NOISE_SIGMA_G,
                   help="noise standard deviation in g")
    p.add_argument("--truth", default=None, help="write injected-event truth NDJSON here")
    p.add_argument("--dataset-dir", default=None, help="write a labeled dataset to this directory")
    p.add_argument("--noise", type=int, default=0, help="noise windows (dataset mode)")

    p = command("ingest", cmd_ingest, "parse a recording and print a summary", ())
    p.add_argument("--in", dest="input", required=True, help="recording path")
    p.add_argument("--format", choices=ingest.FORMATS, default=None, help="override format sniffing")
    p.add_argument("--out", default=None, help="convert the recording to this path")
    p.add_argument("--to", choices=ingest.FORMATS, default=None, help="conversion format")

    p = command("features", cmd_features, "per-window prefilter features as CSV",
                ("window_seconds", "step_seconds", "axis"))
    p.add_argument("--in", dest="input", required=True, help="recording path")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")

    p = command("spectrogram", cmd_spectrogram, "export one window's spectrogram",
                ("window_seconds", "step_seconds", "axis", "segment_len", "hop",
                 "window_fn", "log_power", "log_floor"))
    p.add_argument("--in", dest="input", required=True, help="recording path")
    p.add_argument("--window-index", type=int, default=0, help="which window to export")
    p.add_argument("--csv", default=None, help="CSV output path (default stdout)")
    p.add_argument("--pgm", default=None, help="also write an 8-bit graymap here")

    p = command("train-logreg", cmd_train_logreg, "train the stage-1 prefilter",
                ("window_seconds", "step_seconds", "axis", "seed"))
    p.add_argument("--manifest", required=True, help="dataset manifest path")
    p.add_argument("--out", required=True, help="model output path")
    p.add_argument("--lr", type=float, default=0.5, help="learning rate")
    p.add_argument("--epochs", type=int, default=500, help="full-batch epochs")

    p = command("train-cnn", cmd_train_cnn, "train the stage-2 classifier",
                ("window_seconds", "step_seconds", "axis", "seed", "sample_rate",
                 "segment_len", "hop", "window_fn", "log_power", "log_floor"))
    p.add_argument("--manifest", required=True, help="dataset manifest path")
    p.add_argument("--out", required=True, help="model output path")
    p.add_argument("--filters", type=int, default=240, help="convolution filter count")
    p.add_argument("--kernel-width", type=int, default=145, help="kernel width in bins")
    p.add_argument("--loss", choices=LOSS_KINDS, default=LOSS_BCE, help="training loss")
    p.add_argument("--lr", type=float, default=0.01, help="learning rate")
    p.add_argument("--epochs", type=int, default=75, help="training epochs")
    p.add_argument("--batch-size", type=int, default=32, help="minibatch size")
    p.add_argument("--val-fraction", type=float, default=0.2,
                   help="validation share for checkpoint and threshold selection")
    p.add_argument("--standardize", action="store_true",
                   help="bake training-set input statistics into the model")
    p.add_argument("--include-noise", action="store_true",
                   help="train on noise windows too (default: event windows only)")

    p = command("augment", cmd_augment, "augment a dataset and dump it with provenance",
                ("window_seconds", "step_seconds", "axis", "seed", "sample_rate"))
    p.add_argument("--manifest", required=True, help="dataset manifest path")
    p.add_argument("--method", required=True, help="duplicate:D or amplify:LO:HI[:COPIES]")
    p.add_argument("--out-dir", required=True, help="output directory")

    p = command("evaluate", cmd_evaluate, "cross-validated four-variant experiment",
                ("window_seconds", "step_seconds", "axis", "seed", "sample_rate",
                 "segment_len", "hop", "window_fn", "log_power", "log_floor"))
    p.add_argument("--manifest", required=True, help="dataset manifest path")
    p.add_argument("--augment", required=True, help="duplicate:D or amplify:LO:HI[:COPIES]")
    p.add_argument("--k", type=int, default=5, help="cross-validation folds")
    p.add_argument("--filters", type=int, default=8, help="convolution filter count")
    p.add_argument("--kernel-width", type=int, default=15, help="kernel width in bins")
    p.add_argument("--loss", choices=LOSS_KINDS, default=LOSS_BCE, help="training loss")
    p.add_argument("--lr", type=float, default=0.01, help="learning rate")
    p.add_argument("--epochs", type=int, default=15, help="training epochs")
    p.add_argument("--batch-size", type=int, default=16, help="minibatch size")
    p.add_argument("--report", default=None, help="write the JSON-lines report here")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for independent folds or trials")
    p.add_argument("--standardize", action="store_true",
                   help="bake training-set input statistics into the model")
    p.add_argument("--summary", default=None, help="write the CSV summary here")
    p.add_argument("--include-noise", action="store_true",
                   help="use noise windows too (default: event windows only)")

    p = command("tune", cmd_tune, "successive-halving hyperparameter search",
                ("window_seconds", "step_seconds", "axis", "seed", "sample_rate",
                 "segment_len", "hop", "window_fn", "log_power", "log_floor"))
    p.add_argument("--manifest", required=True, help="dataset manifest path")
    p.add_argument("--n-configs", type=int, default=9, help="configurations to sample")
    p.add_argument("--max-epochs", type=int, default=20, help="epoch budget of the last rung")
    p.add_argument("--reduction", type=int, default=3, help="survivor reduction per rung")
    p.add_argument("--batch-size", type=int, default=32, help="minibatch size")
    p.add_argument("--filters", default=None, help="comma list overriding the filter grid")
    p.add_argument("--kernel-widths", default=None, help="comma list overriding the width grid")
    p.add_argument("--trial-log", default=None, help="write the trial log NDJSON here")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for independent folds or trials")
    p.add_argument("--standardize", action="store_true",
                   help="bake training-set input statistics into the model")
    p.add_argument("--out", default=None, help="write the best configuration JSON here")
    p.add_argument("--include-noise", action="store_true",
                   help="use noise windows too (default: event windows only)")

    p = command("detect", cmd_detect, "replay a recording through the two-stage cascade",
                ("window_seconds", "step_seconds", "axis", "sample_rate",
                 "segment_len", "hop", "window_fn", "log_power", "log_floor",
                 "tau1", "tau2", "logreg_model", "cnn_model"))
    p.add_argument("--in", dest="input", required=True, help="recording path")
    p.add_argument("--out", default=None, help="event log path (default stdout)")
    p.add_argument("--realtime", action="store_true",
                   help="throttle the replay to wall clock (demo pacing)")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        file_values = load_config_file(args.config) if args.config else {}
        return args.func(args, Settings(args, file_values))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BedfallError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # invariant violations still exit cleanly
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
