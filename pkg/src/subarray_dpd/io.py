"""File formats: CSV tables, JSON reports, raw waveforms and PA model files."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import ConfigurationError
from .pa import PHModel
from .signals import ComplexSignal, as_samples


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_csv(path, header, rows):
    """Write rows with a header line; floats use their shortest round-trip repr."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no infinities; keep them readable
        return v if math.isfinite(v) else str(v)
    return obj


def write_json(path, obj):
    """Deterministic JSON: sorted keys, complex as [re, im], non-finite floats as strings."""
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_waveform(path, sig: ComplexSignal, seed: int | None = None):
    """Little-endian float64 interleaved re/im samples plus a ``.json`` sidecar."""
    path = Path(path)
    x = as_samples(sig)
    inter = np.empty(2 * x.size, dtype="<f8")
    inter[0::2] = x.real
    inter[1::2] = x.imag
    path.write_bytes(inter.tobytes())
    write_json(path.with_suffix(".json"), {"sample_rate_hz": sig.sample_rate_hz, "seed": seed,
                                           "num_samples": int(x.size)})
    return path


def read_waveform(path) -> ComplexSignal:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    raw = np.frombuffer(path.read_bytes(), dtype="<f8")
    if raw.size % 2:
        raise ConfigurationError(f"{path}: odd number of float64 values")
    return ComplexSignal(raw[0::2] + 1j * raw[1::2], meta["sample_rate_hz"])


def write_models(path, models):
    """PA population file: a JSON list of model objects."""
    return write_json(path, [m.to_dict() for m in models])


def read_models(path) -> list[PHModel]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = [data]
    return [PHModel.from_dict(d) for d in data]
