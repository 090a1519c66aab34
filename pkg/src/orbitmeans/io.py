"""Reading and writing partition files.

JSON forms::

    {"l": 2, "m": 3, "rows": [[1, 0.5, 0], [0, 0.5, 1]]}   # soft
    {"labels": [0, 0, 1], "l": 2}                            # hard

A bundle is a JSON list of such objects. CSV files hold one row per cluster.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import Partition, from_labels, validate
from .errors import PartitionError, ShapeMismatch


class MalformedFile(PartitionError):
    pass


def partition_from_obj(obj) -> Partition:
    if not isinstance(obj, dict):
        raise MalformedFile(f"expected a JSON object, got {type(obj).__name__}")
    if "labels" in obj:
        labels = obj["labels"]
        if "l" in obj:
            ell = obj["l"]
        elif labels:
            ell = max(labels) + 1
        else:
            ell = 1
        if not isinstance(ell, int) or not all(isinstance(v, int) for v in labels):
            raise MalformedFile("labels and l must be integers")
        return Partition(from_labels(labels, ell))
    if "rows" in obj:
        rows = obj["rows"]
        try:
            X = np.asarray(rows, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise MalformedFile(f"rows are not a numeric matrix: {exc}") from None
        X = validate(X)
        if "l" in obj and obj["l"] != X.shape[0]:
            raise ShapeMismatch(f"declared l={obj['l']} but found {X.shape[0]} rows")
        if "m" in obj and obj["m"] != X.shape[1]:
            raise ShapeMismatch(f"declared m={obj['m']} but found {X.shape[1]} columns")
        return Partition(X)
    raise MalformedFile("partition object needs 'rows' or 'labels'")


def partition_to_obj(X: Partition) -> dict:
    if X.is_hard:
        return {"l": X.n_clusters, "labels": X.labels().tolist()}
    return {"l": X.n_clusters, "m": X.n_points, "rows": X.canonical.tolist()}


def _read_csv(path: Path) -> Partition:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    try:
        X = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise MalformedFile(f"{path}: {exc}") from None
    if X.ndim != 2:
        raise MalformedFile(f"{path}: rows have unequal lengths")
    return Partition(X)


def load_partitions(path) -> list[Partition]:
    """Partitions stored in ``path``: one for a partition file, several for a bundle."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return [_read_csv(path)]
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{path}: {exc}") from None
    if isinstance(obj, list):
        return [partition_from_obj(o) for o in obj]
    return [partition_from_obj(obj)]


def load_partition(path) -> Partition:
    parts = load_partitions(path)
    if len(parts) != 1:
        raise MalformedFile(f"{path} holds {len(parts)} partitions, expected one")
    return parts[0]


def dump_bundle(parts, path=None) -> str:
    text = json.dumps([partition_to_obj(X) for X in parts]) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
