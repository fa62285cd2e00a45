"""Atomic CSV emission; floats are written with repr so output is reproducible."""

from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    return repr(float(x))


def write_csv_atomic(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(c) for c in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [[float(c) for c in row] for row in r]
