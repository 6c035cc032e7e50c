"""Flat-file serialisation for weight and index vectors.

Binary layout: an 8-byte little-endian unsigned length header followed by the
payload (little-endian float32/float64 for weights, int64 for index vectors).
The element width of a weight file is recovered from the file size, so the
precision round-trips without a separate flag.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .weights import WeightVector

__all__ = [
    "save_weights",
    "load_weights",
    "save_weights_csv",
    "save_trajectory_csv",
    "save_indices",
    "load_indices",
    "save_indices_csv",
]

_HEADER = struct.Struct("<Q")


def save_weights(path, w: WeightVector) -> None:
    data = np.ascontiguousarray(w.values, dtype="<f4" if w.precision == "single" else "<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(len(data)))
        fh.write(data.tobytes())


def load_weights(path) -> WeightVector:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated weight file")
    (n,) = _HEADER.unpack_from(raw)
    body = len(raw) - _HEADER.size
    if n == 0 or body % n:
        raise ValueError(f"{path}: payload of {body} bytes does not fit {n} elements")
    width = body // n
    if width == 4:
        values = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size, count=n)
        return WeightVector(values.copy(), "single")
    if width == 8:
        values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=n)
        return WeightVector(values.copy(), "double")
    raise ValueError(f"{path}: unsupported element width {width}")


def save_weights_csv(path, w: WeightVector) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "weight"])
        for i, v in enumerate(w.values):
            writer.writerow([i, repr(float(v))])


def save_trajectory_csv(path, truth, observations) -> None:
    truth = np.asarray(truth, dtype=np.float64)
    observations = np.asarray(observations, dtype=np.float64)
    if len(truth) != len(observations):
        raise ValueError("truth and observations must have equal length")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "truth", "observation"])
        for t, (x, z) in enumerate(zip(truth, observations), start=1):
            writer.writerow([t, repr(float(x)), repr(float(z))])


def save_indices(path, indices) -> None:
    data = np.ascontiguousarray(indices, dtype="<i8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(len(data)))
        fh.write(data.tobytes())


def load_indices(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated index file")
    (n,) = _HEADER.unpack_from(raw)
    if len(raw) - _HEADER.size != 8 * n:
        raise ValueError(f"{path}: payload does not match header length {n}")
    return np.frombuffer(raw, dtype="<i8", offset=_HEADER.size, count=n).astype(np.int64)


def save_indices_csv(path, indices, column="value") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([column])
        for v in indices:
            writer.writerow([int(v)])
