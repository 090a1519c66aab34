"""Partition matrices, orbits under cluster relabeling, and canonical forms.

A partition of ``m`` points into at most ``l`` clusters is stored as an
``l x m`` membership matrix whose columns sum to one. Row permutations of the
matrix describe the same partition; :class:`Partition` identifies all of them
by keeping a single canonical representative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ColumnSumViolation,
    EmptyInput,
    EntryOutOfRange,
    LabelOutOfRange,
    ShapeMismatch,
)

ATOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


def validate(entries) -> np.ndarray:
    """Check that ``entries`` is a valid partition matrix.

    Returns a read-only float64 copy. Raises :class:`EntryOutOfRange` for the
    first entry outside ``[0, 1]`` and :class:`ColumnSumViolation` for the
    first column whose sum differs from one by more than ``1e-12``.
    """
    X = np.asarray(entries, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeMismatch(f"expected a 2-d matrix, got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise EmptyInput("a partition matrix needs at least one row and one column")
    bad = ~np.isfinite(X) | (X < -ATOL) | (X > 1 + ATOL)
    if bad.any():
        k, j = np.argwhere(bad)[0]
        raise EntryOutOfRange(int(k), int(j), float(X[k, j]))
    sums = X.sum(axis=0)
    off = np.abs(sums - 1.0) > ATOL
    if off.any():
        j = int(np.argmax(off))
        raise ColumnSumViolation(j, float(sums[j]))
    return _frozen(np.clip(X, 0.0, 1.0))


def from_labels(labels: Sequence[int], n_clusters: int) -> np.ndarray:
    """Indicator matrix of a hard partition: column j is e_{labels[j]}."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise EmptyInput("label sequence is empty")
    if n_clusters < 1:
        raise LabelOutOfRange(0, labels.flat[0], n_clusters)
    for j, lab in enumerate(labels.tolist()):
        if lab != int(lab) or not 0 <= lab < n_clusters:
            raise LabelOutOfRange(j, lab, n_clusters)
    labels = labels.astype(np.intp)
    X = np.zeros((n_clusters, labels.size))
    X[labels, np.arange(labels.size)] = 1.0
    return _frozen(X)


def to_labels(X) -> np.ndarray:
    """Per-column argmax; ties go to the lowest row index."""
    return np.argmax(np.asarray(X), axis=0)


@dataclass(frozen=True)
class Permutation:
    """Row relabeling: output row ``k`` takes input row ``mapping[k]``."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        mapping = tuple(int(i) for i in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise ValueError(f"{mapping} is not a permutation of 0..{len(mapping) - 1}")
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))

    def __len__(self):
        return len(self.mapping)

    def apply(self, X) -> np.ndarray:
        return np.asarray(X)[list(self.mapping)]

    def inverse(self) -> Permutation:
        return Permutation(tuple(np.argsort(self.mapping)))


def canonical_order(X: np.ndarray) -> np.ndarray:
    """Row order that sorts ``X`` lexicographically non-increasing (stable)."""
    # np.lexsort treats its last key as primary
    return np.lexsort((-X)[:, ::-1].T)


class Partition:
    """An orbit ``[X]`` of partition matrices under row permutations.

    Construct from any representative; the canonical matrix (rows in
    non-increasing lexicographic order) is stored read-only.
    """

    __slots__ = ("canonical", "is_hard")

    def __init__(self, entries, *, _trusted: bool = False):
        X = np.asarray(entries, dtype=np.float64) if _trusted else validate(entries)
        C = X[canonical_order(X)]
        C.flags.writeable = False
        self.canonical = C
        self.is_hard = bool(np.all((np.abs(C) <= ATOL) | (np.abs(C - 1.0) <= ATOL)))

    @classmethod
    def from_labels(cls, labels: Sequence[int], n_clusters: int) -> Partition:
        return cls(from_labels(labels, n_clusters), _trusted=True)

    @property
    def n_clusters(self) -> int:
        return self.canonical.shape[0]

    @property
    def n_points(self) -> int:
        return self.canonical.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.canonical.shape

    def labels(self) -> np.ndarray:
        return to_labels(self.canonical)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.shape == other.shape and bool(
            np.all(np.abs(self.canonical - other.canonical) <= ATOL)
        )

    __hash__ = None

    def __repr__(self):
        kind = "hard" if self.is_hard else "soft"
        return f"Partition({kind}, l={self.n_clusters}, m={self.n_points})"


def canonicalize(X) -> Partition:
    """Project a partition matrix onto its orbit."""
    if isinstance(X, Partition):
        return X
    return Partition(X)


def as_partition(X) -> Partition:
    return X if isinstance(X, Partition) else Partition(X)


def check_same_shape(X: Partition, Y: Partition) -> None:
    if X.shape != Y.shape:
        raise ShapeMismatch(f"shapes differ: {X.shape} vs {Y.shape}")


def is_hard(X) -> bool:
    return as_partition(X).is_hard


def orbit_equal(X, Y, atol: float = ATOL) -> bool:
    """True iff some row permutation maps X onto Y entrywise within ``atol``.

    Decided as a bipartite matching: row k of X may pair with row l of Y when
    their max-abs difference is within tolerance.
    """
    from .align import solve_assignment

    X, Y = as_partition(X), as_partition(Y)
    check_same_shape(X, Y)
    A, B = X.canonical, Y.canonical
    if np.all(np.abs(A - B) <= atol):
        return True
    gap = np.abs(A[:, None, :] - B[None, :, :]).max(axis=2)
    return solve_assignment((gap > atol).astype(float)).objective == 0.0


def random_partition(
    rng: np.random.Generator, n_clusters: int, n_points: int, hard: bool = False
) -> np.ndarray:
    """Random valid partition matrix (uniform labels, or Dirichlet(1) columns)."""
    if hard:
        return from_labels(rng.integers(0, n_clusters, size=n_points), n_clusters)
    X = rng.dirichlet(np.ones(n_clusters), size=n_points).T
    X /= X.sum(axis=0)
    return _frozen(X)
