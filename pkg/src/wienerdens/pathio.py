"""CSV interchange for sample paths: header ``id,t0,...,t{T-1}``, one path per row."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError

__all__ = ["write_paths", "read_paths", "write_labels", "read_labels", "fmt17"]


def fmt17(x) -> str:
    return format(float(x), ".17g")


def write_paths(path, paths, ids=None) -> None:
    arr = np.atleast_2d(np.asarray(paths, dtype=float))
    ids = list(range(arr.shape[0])) if ids is None else list(ids)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id"] + [f"t{k}" for k in range(arr.shape[1])])
        for i, row in zip(ids, arr):
            w.writerow([i] + [fmt17(v) for v in row])


def read_paths(path):
    """Read a path file; returns ``(ids, array of shape (n, T))``.

    Raises :class:`ValidationError` naming the file, line and field for any
    malformed entry or a path that does not start at 0.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"{path}: no such file")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}, line 1: empty file") from None
        T = len(header) - 1
        if header[:1] != ["id"] or header[1:] != [f"t{k}" for k in range(T)] or T < 2:
            raise ValidationError(f"{path}, line 1: header must be 'id,t0,...,t{{T-1}}' with T >= 2")
        ids, rows = [], []
        for line_no, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != T + 1:
                raise ValidationError(f"{path}, line {line_no}: expected {T + 1} fields, got {len(rec)}")
            vals = []
            for name, cell in zip(header[1:], rec[1:]):
                try:
                    v = float(cell)
                except ValueError:
                    raise ValidationError(f"{path}, line {line_no}: field {name}: not a number: {cell!r}") from None
                if not math.isfinite(v):
                    raise ValidationError(f"{path}, line {line_no}: field {name}: non-finite value")
                vals.append(v)
            if vals[0] != 0.0:
                raise ValidationError(f"{path}, line {line_no}: field t0: paths must start at 0, got {rec[1]}")
            ids.append(rec[0])
            rows.append(vals)
    if not rows:
        raise ValidationError(f"{path}: no paths")
    return ids, np.array(rows)


def write_labels(path, labels, ids=None) -> None:
    labels = list(labels)
    ids = list(range(len(labels))) if ids is None else list(ids)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label"])
        w.writerows(zip(ids, (int(v) for v in labels)))


def read_labels(path) -> dict:
    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["id", "label"]:
            raise ValidationError(f"{path}, line 1: header must be 'id,label'")
        for line_no, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 2 or rec[1] not in ("0", "1"):
                raise ValidationError(f"{path}, line {line_no}: field label: expected 0 or 1")
            out[rec[0]] = int(rec[1])
    return out
