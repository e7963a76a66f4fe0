"""CSV and JSON input/output shared by the command line tools."""
from __future__ import annotations

import csv
import json
from importlib import metadata
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def toolkit_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0"


def _fmt(x):
    return repr(float(x))


def write_points_csv(path, points):
    """Complex points as a two-column ``re,im`` CSV."""
    pts = np.asarray(points, dtype=complex).ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re", "im"])
        for z in pts:
            w.writerow([_fmt(z.real), _fmt(z.imag)])


def read_points_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["re", "im"]:
        raise ValueError(f"{path}: expected a header row 're,im'")
    out = []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ValueError(f"{path}:{i}: expected two columns")
        try:
            out.append(complex(float(row[0]), float(row[1])))
        except ValueError as exc:
            raise ValueError(f"{path}:{i}: {exc}") from None
    return np.array(out, dtype=complex)


def write_columns_csv(path, header, columns):
    cols = [np.asarray(c).ravel() for c in columns]
    fmts = [str if np.issubdtype(c.dtype, np.integer) else _fmt for c in cols]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([f(x) for f, x in zip(fmts, row)])


def write_cdf_csv(path, t, F):
    write_columns_csv(path, ["t", "F"], [t, F])


def read_values_csv(path):
    """First numeric column of a CSV with a header row."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    try:
        return np.array([float(r[0]) for r in rows[1:] if r], dtype=float)
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: {exc}") from None


def write_matrix_csv(path, matrix):
    """Complex matrix as CSV with re/im columns per entry, row-major."""
    m = np.asarray(matrix, dtype=complex)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "re", "im"])
        for (i, j), v in np.ndenumerate(m):
            w.writerow([i, j, _fmt(v.real), _fmt(v.imag)])


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, obj):
    data = dict(obj)
    data.setdefault("schema_version", SCHEMA_VERSION)
    data.setdefault("toolkit_version", toolkit_version())
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, default=_default) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
