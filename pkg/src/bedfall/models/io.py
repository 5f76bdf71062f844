"""Versioned binary model container (magic "FDM1", little-endian, f64 params).

Layout after the 7-byte prefix (magic, u16 version, u8 model type):

    type 1, prefilter:  u32 p | f64[p+1] beta | f64[p] mean | f64[p] std
                        | f64 threshold
    type 2, classifier: u32 H W K kh kw ph pw | f64[K*kh*kw] filters
                        | f64[K] biases | u32 flat | f64[flat] dense weights
                        | f64 dense bias | f64 input mean | f64 input std
                        | f64 threshold

A missing threshold is stored as NaN.  Round trips are bit-exact.
"""

from __future__ import annotations

import math
import struct
from pathlib import Path

import numpy as np

from ..errors import ParseError
from .cnn import CnnModel, ConvLayer
from .logreg import LogRegModel

MAGIC = b"FDM1"
VERSION = 1
_TYPE_LOGREG = 1
_TYPE_CNN = 2
_PREFIX = struct.Struct("<4sHB")


def _f64(arr) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def _threshold_bytes(threshold) -> bytes:
    return struct.pack("<d", math.nan if threshold is None else float(threshold))


def model_to_bytes(model) -> bytes:
    if isinstance(model, LogRegModel):
        p = model.n_features
        return b"".join(
            [
                _PREFIX.pack(MAGIC, VERSION, _TYPE_LOGREG),
                struct.pack("<I", p),
                _f64(model.beta),
                _f64(model.feature_mean),
                _f64(model.feature_std),
                _threshold_bytes(model.threshold),
            ]
        )
    if isinstance(model, CnnModel):
        h, w = model.input_shape
        k, kh, kw = model.conv.filters.shape
        ph, pw = model.pool
        return b"".join(
            [
                _PREFIX.pack(MAGIC, VERSION, _TYPE_CNN),
                struct.pack("<7I", h, w, k, kh, kw, ph, pw),
                _f64(model.conv.filters),
                _f64(model.conv.biases),
                struct.pack("<I", model.dense_w.size),
                _f64(model.dense_w),
                struct.pack("<d", float(model.dense_b)),
                struct.pack("<dd", float(model.input_mean), float(model.input_std)),
                _threshold_bytes(model.threshold),
            ]
        )
    raise TypeError(f"cannot serialize {type(model).__name__}")


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.data):
            raise ParseError(f"truncated model data at offset {self.off}")
        out = self.data[self.off : self.off + n]
        self.off += n
        return out

    def u32(self, count: int = 1):
        vals = struct.unpack(f"<{count}I", self.take(4 * count))
        return vals[0] if count == 1 else vals

    def f64_array(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]


def model_from_bytes(data: bytes):
    r = _Reader(data)
    magic, version, mtype = _PREFIX.unpack(r.take(_PREFIX.size))
    if magic != MAGIC:
        raise ParseError(f"bad model magic {magic!r} at offset 0")
    if version != VERSION:
        raise ParseError(f"unsupported model version {version}")
    if mtype == _TYPE_LOGREG:
        p = r.u32()
        beta = r.f64_array(p + 1)
        mean = r.f64_array(p)
        std = r.f64_array(p)
        thr = r.f64()
        return LogRegModel(beta=beta, feature_mean=mean, feature_std=std, threshold=thr)
    if mtype == _TYPE_CNN:
        h, w, k, kh, kw, ph, pw = r.u32(7)
        filters = r.f64_array(k * kh * kw).reshape(k, kh, kw)
        biases = r.f64_array(k)
        flat = r.u32()
        dense_w = r.f64_array(flat)
        dense_b = r.f64()
        input_mean = r.f64()
        input_std = r.f64()
        thr = r.f64()
        return CnnModel(
            conv=ConvLayer(filters=filters, biases=biases),
            pool=(ph, pw),
            dense_w=dense_w,
            dense_b=dense_b,
            input_shape=(h, w),
            threshold=None if math.isnan(thr) else thr,
            input_mean=input_mean,
            input_std=input_std,
        )
    raise ParseError(f"unknown model type {mtype}")


def save_model(model, path):
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path):
    path = Path(path)
    if not path.exists():
        raise ParseError(f"model file not found: {path}")
    return model_from_bytes(path.read_bytes())
