"""l_p distances between partitions, geodesic midpoints and set distances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .align import _check_order, optimal_alignment
from .core import Partition, as_partition, check_same_shape
from .errors import EmptySet


@dataclass(frozen=True)
class MetricSpec:
    p: float = 2.0

    def __post_init__(self):
        _check_order(self.p)


def _order(spec) -> float:
    if isinstance(spec, MetricSpec):
        return spec.p
    _check_order(spec)
    return float(spec)


def delta_p(X, Y, spec: MetricSpec | float = 2.0) -> float:
    """Minimum l_p distance between any representatives of X and Y."""
    p = _order(spec)
    cost = optimal_alignment(X, Y, p).objective
    return float(max(cost, 0.0) ** (1.0 / p))


def midpoint(X, Y) -> Partition:
    """One geodesic midpoint under delta_2: average of optimally aligned representatives."""
    X, Y = as_partition(X), as_partition(Y)
    check_same_shape(X, Y)
    perm = optimal_alignment(X, Y, 2.0).permutation
    M = 0.5 * (X.canonical + perm.apply(Y.canonical))
    return Partition(M)


def set_distance(U: Sequence, V: Sequence, spec: MetricSpec | float = 2.0) -> float:
    """One-sided distance ``max_{X in U} min_{Y in V} delta_p(X, Y)``."""
    if len(U) == 0 or len(V) == 0:
        raise EmptySet("set distance needs two non-empty sets")
    U = [as_partition(X) for X in U]
    V = [as_partition(Y) for Y in V]
    return max(min(delta_p(X, Y, spec) for Y in V) for X in U)


def pairwise_distances(parts: Sequence, spec: MetricSpec | float = 2.0) -> np.ndarray:
    parts = [as_partition(X) for X in parts]
    n = len(parts)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = delta_p(parts[i], parts[j], spec)
    return D
