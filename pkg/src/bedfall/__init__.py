"""Bed-vibration fall detection: windowed two-stage classification and tooling.

Submodules:
    signal    windowing and prefilter feature extraction
    ingest    binary/CSV recording parsers, manifests, dataset loading
    synth     seeded synthetic recordings, events, and datasets
    dsp       short-time Fourier transform and spectrograms
    models    logistic regression and the convolutional classifier
    augment   duplication and event-amplification dataset balancing
    evaluate  metrics, thresholding, cross-validation pipeline, tuner
    deploy    streaming two-stage replay and event logs
    cli       command-line entry point
"""

__version__ = "0.1.0"
