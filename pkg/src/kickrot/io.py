"""Result files: CSV, JSON, raw float64 arrays with JSON sidecars.

Every file is written to a temporary sibling and renamed into place, so a
reader never observes a partial file. Floats are printed with 17
significant digits, enough to round-trip a 64-bit value exactly.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np


def atomic_write(path, data: str | bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "", "encoding": "utf-8"})) as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header: list[str], columns) -> Path:
    """Write equal-length ``columns`` under ``header``."""
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(header):
        raise ValueError("one column per header field")
    if len({len(c) for c in cols}) > 1:
        raise ValueError("columns differ in length")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*cols):
        w.writerow([fmt(v) for v in row])
    return atomic_write(path, buf.getvalue())


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    header, body = rows[0], rows[1:]
    return {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(header)}


def to_jsonable(obj):
    """Plain Python types for ``json``; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        # strict JSON has no inf/nan
        return float(obj) if np.isfinite(obj) else None
    return obj


def write_json(path, obj) -> Path:
    return atomic_write(path, json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_wavefunction(path, psi: np.ndarray, meta: dict) -> Path:
    """Interleaved little-endian ``(re, im)`` float64 pairs plus ``<path>.json``."""
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    raw = np.empty(2 * psi.size, dtype="<f8")
    raw[0::2] = psi.real.ravel()
    raw[1::2] = psi.imag.ravel()
    write_json(sidecar_path(path), {**meta, "shape": list(psi.shape)})
    return atomic_write(path, raw.tobytes())


def read_wavefunction(path) -> tuple[np.ndarray, dict]:
    meta = read_json(sidecar_path(path))
    raw = np.fromfile(path, dtype="<f8")
    psi = (raw[0::2] + 1j * raw[1::2]).reshape(meta.get("shape", [-1]))
    return psi, meta


def write_density(path, weights: np.ndarray, meta: dict) -> Path:
    """Row-major little-endian float64 ``N x N`` grid plus ``<path>.json``."""
    w = np.ascontiguousarray(weights, dtype="<f8")
    write_json(sidecar_path(path), meta)
    return atomic_write(path, w.tobytes())


def read_density(path) -> tuple[np.ndarray, dict]:
    meta = read_json(sidecar_path(path))
    N = int(meta["N"])
    return np.fromfile(path, dtype="<f8").reshape(N, N), meta
