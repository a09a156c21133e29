"""Readers and writers for panel CSVs and pipeline artifacts.

Floats are written with ``repr`` so every file reads back bit for bit.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import math
from pathlib import Path as FsPath

import numpy as np

from .clustering import ClusterAssignment, Dendrogram, Merge
from .errors import PipelineError
from .metrics import DistanceMatrix
from .sde import Path


def _fmt(x: float) -> str:
    return repr(float(x))


def _check_index(cell: str, row: int):
    try:
        int(cell)
        return
    except ValueError:
        pass
    try:
        dt.date.fromisoformat(cell.strip())
    except ValueError:
        raise PipelineError(
            f"row {row}: first column must be an ISO-8601 date or integer index, got {cell!r}"
        ) from None


def interpolate_missing(values: np.ndarray) -> np.ndarray:
    """Linear interpolation of interior NaN runs; ends take the nearest value."""
    values = np.asarray(values, dtype=np.float64)
    ok = ~np.isnan(values)
    if ok.all():
        return values.copy()
    idx = np.arange(values.size)
    return np.interp(idx, idx[ok], values[ok])


def ingest_csv(file, delta=1.0) -> list[Path]:
    """Read a panel CSV into one path per series column.

    Empty cells are missing values and get filled by :func:`interpolate_missing`.
    """
    file = FsPath(file)
    try:
        with open(file, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise PipelineError(f"cannot read {file}: {exc}") from exc
    rows = [r for r in rows if r]
    if len(rows) < 3 or len(rows[0]) < 2:
        raise PipelineError(f"{file}: need a header, two data rows and one series")
    header = rows[0]
    labels = [h.strip() for h in header[1:]]
    data = np.full((len(rows) - 1, len(labels)), np.nan)
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise PipelineError(f"{file}: row {r} has {len(row)} cells, expected {len(header)}")
        _check_index(row[0], r)
        for c, cell in enumerate(row[1:]):
            cell = cell.strip()
            if cell == "":
                continue
            try:
                v = float(cell)
            except ValueError:
                raise PipelineError(
                    f"{file}: non-numeric cell {cell!r} at row {r}, column {c + 2}") from None
            if not math.isfinite(v):
                raise PipelineError(f"{file}: non-finite cell at row {r}, column {c + 2}")
            data[r - 2, c] = v
    paths = []
    for c, label in enumerate(labels):
        col = data[:, c]
        n_ok = int(np.sum(~np.isnan(col)))
        if n_ok == 0:
            raise PipelineError(f"{file}: series {label!r} has no values")
        if n_ok < 2:
            raise PipelineError(f"{file}: series {label!r} has fewer than two values")
        paths.append(Path(interpolate_missing(col), delta, label))
    return paths


def write_paths_csv(paths, file):
    paths = list(paths)
    n = len(paths[0])
    if any(len(p) != n for p in paths):
        raise PipelineError("paths must share a length to be written as a panel")
    with open(file, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [p.label for p in paths])
        for i in range(n):
            w.writerow([i] + [_fmt(p.values[i]) for p in paths])


def write_distance_csv(m: DistanceMatrix, file):
    with open(file, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([m.metric_name] + list(m.labels))
        for label, row in zip(m.labels, m.d):
            w.writerow([label] + [_fmt(v) for v in row])


def read_distance_csv(file) -> DistanceMatrix:
    try:
        with open(file, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise PipelineError(f"cannot read {file}: {exc}") from exc
    metric, labels = rows[0][0], rows[0][1:]
    if [r[0] for r in rows[1:]] != labels:
        raise PipelineError(f"{file}: row labels do not match column labels")
    try:
        d = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    except ValueError as exc:
        raise PipelineError(f"{file}: {exc}") from exc
    return DistanceMatrix(labels, d, metric)


def dendrogram_to_dict(d: Dendrogram) -> dict:
    return {
        "labels": list(d.leaf_labels),
        "merges": [{"left": m.left, "right": m.right, "height": m.height}
                   for m in d.merges],
    }


def write_dendrogram_json(d: Dendrogram, file):
    with open(file, "w") as fh:
        json.dump(dendrogram_to_dict(d), fh, indent=2)
        fh.write("\n")


def read_dendrogram_json(file) -> Dendrogram:
    with open(file) as fh:
        obj = json.load(fh)
    merges = tuple(Merge(int(m["left"]), int(m["right"]), float(m["height"]))
                   for m in obj["merges"])
    return Dendrogram(merges, tuple(obj["labels"]))


def write_clusters_csv(labels, assignment: ClusterAssignment, file):
    with open(file, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "cluster"])
        for label in labels:
            w.writerow([label, assignment.labels[label]])


def read_clusters_csv(file) -> ClusterAssignment:
    with open(file, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    return ClusterAssignment({r[0]: int(r[1]) for r in rows})


def write_mds_csv(embedding, assignment, file):
    with open(file, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "x", "y", "cluster"])
        for label, (x, y) in zip(embedding.labels, embedding.coords):
            cluster = assignment.labels[label] if assignment else ""
            w.writerow([label, _fmt(x), _fmt(y), cluster])


def read_mds_csv(file):
    with open(file, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    labels = [r[0] for r in rows]
    coords = np.array([[float(r[1]), float(r[2])] for r in rows])
    clusters = [int(r[3]) if r[3] else None for r in rows]
    return labels, coords, clusters


def write_hulls_json(hulls: dict, assignment: ClusterAssignment, file):
    out = []
    for cluster in sorted(hulls):
        members = [k for k, v in assignment.labels.items() if v == cluster]
        out.append({"cluster": cluster, "members": members, **hulls[cluster].as_dict()})
    with open(file, "w") as fh:
        json.dump({"hulls": out}, fh, indent=2)
        fh.write("\n")


def read_hulls_json(file) -> list:
    with open(file) as fh:
        return json.load(fh)["hulls"]
