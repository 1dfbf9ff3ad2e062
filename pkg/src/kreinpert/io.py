"""Structured-text (JSON) documents for matrices, block operators and reports.

A matrix is stored as::

    {"rows": 2, "cols": 1, "entries": [[re, im], [re, im]]}

with ``entries`` in row-major order.  Python's ``repr`` of a float is the
shortest string that round-trips, so doubles survive a write/read cycle
bit for bit.
"""
from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from kreinpert.linalg import as_cmatrix


def matrix_to_doc(m) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        m = np.atleast_2d(m)
    flat = m.reshape(-1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_doc(doc: dict) -> np.ndarray:
    try:
        rows = int(doc["rows"])
        cols = int(doc["cols"])
        entries = doc["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"not a matrix document: {exc}") from None
    if len(entries) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, found {len(entries)}")
    data = np.empty(rows * cols, dtype=np.complex128)
    for k, pair in enumerate(entries):
        if isinstance(pair, (int, float)):
            data[k] = complex(pair)
        else:
            re, im = pair
            data[k] = complex(float(re), float(im))
    return as_cmatrix(data.reshape(rows, cols))


def _encode(value):
    if isinstance(value, np.ndarray):
        if value.ndim == 2:
            return matrix_to_doc(value)
        if np.iscomplexobj(value):
            return [[float(z.real), float(z.imag)] for z in value.ravel()]
        return [_encode(v) for v in value.tolist()]
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: _encode(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(value, (np.complexfloating, complex)):
        return [float(value.real), float(value.imag)]
    return value


def to_document(obj) -> dict | list:
    """JSON-ready form of a result object; 2-D arrays become matrix documents."""
    return _encode(obj)


def dumps(obj) -> str:
    return json.dumps(to_document(obj), indent=2)


def write_document(obj, path) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def read_matrix(path) -> np.ndarray:
    return matrix_from_doc(read_json(path))


def write_matrix(m, path) -> None:
    Path(path).write_text(json.dumps(matrix_to_doc(m)) + "\n")
