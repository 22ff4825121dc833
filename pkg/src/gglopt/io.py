"""Plain-text matrix, edge-list and manifest files.

Matrices: comma-separated, one row per line, no header, shortest round-trip
float repr.  Edge lists: ``i<TAB>j<TAB>value``, 0-based, upper triangle only.
Manifests and reports: JSON.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np


def _atomic_write(path, text):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text(path, text):
    _atomic_write(path, text)


def format_matrix(A):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    # float.__repr__ is the shortest string that round-trips exactly; +0.0 avoids "-0.0"
    return "".join(",".join(repr(float(x) + 0.0) for x in row) + "\n" for row in A)


def write_matrix(path, A):
    _atomic_write(path, format_matrix(A))


def read_matrix(path):
    with open(path) as fh:
        rows = [line.strip() for line in fh if line.strip()]
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    data = [[float(x) for x in r.split(",")] for r in rows]
    widths = {len(r) for r in data}
    if len(widths) != 1:
        raise ValueError(f"{path}: ragged rows")
    return np.array(data, dtype=float)


def write_edges(path, theta, tol=1e-8):
    theta = np.asarray(theta)
    iu = np.triu_indices(theta.shape[0], 1)
    lines = [f"{i}\t{j}\t{float(theta[i, j])!r}\n" for i, j in zip(*iu) if abs(theta[i, j]) > tol]
    _atomic_write(path, "".join(lines))


def read_edges(path):
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                i, j, v = line.rstrip("\n").split("\t")
                out.append((int(i), int(j), float(v)))
    return out


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, obj):
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"not JSON serializable: {type(o)!r}")
