"""Exact minimization over cluster relabelings.

Because a row permutation moves whole rows, ``||X - P Y||_p^p`` splits into
per-row costs ``c[k, l] = ||x_k - y_l||_p^p`` and the minimum over all
permutations is a linear assignment problem. Ties are always resolved towards
the lexicographically smallest mapping so that results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from math import factorial

import numpy as np

from .core import Partition, Permutation, as_partition, check_same_shape
from .errors import InvalidOrder, NonFiniteCost, ShapeMismatch, TooManyClusters

BRUTE_FORCE_MAX = 8


@dataclass(frozen=True)
class AssignmentResult:
    permutation: Permutation
    objective: float


def _tie_tol(value: float) -> float:
    return 1e-12 * max(1.0, abs(value))


def _hungarian(cost: np.ndarray) -> tuple[np.ndarray, float]:
    """Shortest augmenting path with potentials, O(n^3). Returns (col_of_row, value)."""
    n = cost.shape[0]
    INF = float("inf")
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.intp)  # p[j]: row matched to column j (1-based, 0 = none)
    way = np.zeros(n + 1, dtype=np.intp)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, INF)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], INF)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = np.empty(n, dtype=np.intp)
    col_of_row[p[1:] - 1] = np.arange(n)
    return col_of_row, float(cost[np.arange(n), col_of_row].sum())


def _check_cost(cost) -> np.ndarray:
    C = np.asarray(cost, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] == 0:
        raise ShapeMismatch(f"cost matrix must be square and non-empty, got {C.shape}")
    if not np.all(np.isfinite(C)):
        raise NonFiniteCost("cost matrix contains NaN or infinite entries")
    return C


def solve_assignment(cost, sense: str = "minimize") -> AssignmentResult:
    """Optimal assignment of rows to columns.

    Args:
        cost: square finite matrix; row ``k`` assigned to column ``mapping[k]``.
        sense: ``"minimize"`` or ``"maximize"``.

    Returns:
        The lexicographically smallest optimal mapping and its objective
        (computed on the original, un-negated costs).
    """
    C = _check_cost(cost)
    if sense not in ("minimize", "maximize"):
        raise ValueError(f"unknown sense {sense!r}")
    work = -C if sense == "maximize" else C
    n = work.shape[0]
    _, best = _hungarian(work)
    tol = _tie_tol(best)

    # Fix rows in order, taking the smallest column that still admits an optimum.
    mapping = []
    rows = list(range(n))
    cols = list(range(n))
    fixed = 0.0
    for k in range(n - 1):
        rest_rows = rows[1:]
        for j in cols:
            rest_cols = [c for c in cols if c != j]
            sub = work[np.ix_(rest_rows, rest_cols)]
            _, sub_best = _hungarian(sub)
            if fixed + work[k, j] + sub_best <= best + tol:
                mapping.append(j)
                fixed += work[k, j]
                cols = rest_cols
                break
        else:  # pragma: no cover - the optimum always extends
            raise AssertionError("tie-break failed to extend optimal assignment")
        rows = rest_rows
    mapping.append(cols[0])
    objective = float(C[np.arange(n), mapping].sum())
    return AssignmentResult(Permutation(tuple(mapping)), objective)


def _check_order(p: float) -> None:
    if not p >= 1:
        raise InvalidOrder(f"order p must be >= 1, got {p}")


def row_costs(A: np.ndarray, B: np.ndarray, p: float) -> np.ndarray:
    """``c[k, l] = sum_j |A[k, j] - B[l, j]|^p``."""
    diff = np.abs(A[:, None, :] - B[None, :, :])
    if p == 1:
        return diff.sum(axis=2)
    if p == 2:
        return (diff * diff).sum(axis=2)
    return (diff**p).sum(axis=2)


def optimal_alignment(X, Y, p: float = 2.0) -> AssignmentResult:
    """Relabeling ``P`` of Y's canonical form minimizing ``||X_c - P Y_c||_p``.

    The objective is reported as the p-th power cost.
    """
    _check_order(p)
    X, Y = as_partition(X), as_partition(Y)
    check_same_shape(X, Y)
    return solve_assignment(row_costs(X.canonical, Y.canonical, p))


def brute_force_alignment(X, Y, p: float = 2.0) -> AssignmentResult:
    """Same contract as :func:`optimal_alignment`, by enumerating all l! relabelings."""
    _check_order(p)
    X, Y = as_partition(X), as_partition(Y)
    check_same_shape(X, Y)
    n = X.n_clusters
    if n > BRUTE_FORCE_MAX:
        raise TooManyClusters(f"brute force limited to {BRUTE_FORCE_MAX} clusters, got {n}")
    A, B = X.canonical, Y.canonical
    best, best_perm = None, None
    for perm in permutations(range(n)):
        value = float((np.abs(A - B[list(perm)]) ** p).sum())
        if best is None or value < best - _tie_tol(best):
            best, best_perm = value, perm
    return AssignmentResult(Permutation(best_perm), best)


@lru_cache(maxsize=None)
def _perm_table(n: int) -> np.ndarray:
    return np.array(list(permutations(range(n))), dtype=np.intp).reshape(-1, n)


_ENUM_BUDGET = 4_000_000


def batch_align(stack: np.ndarray, target: np.ndarray, p: float = 2.0):
    """Align every matrix in ``stack`` (n, l, m) to ``target`` (l, m).

    Returns ``(mappings, costs)`` where ``stack[i][mappings[i]]`` is the
    optimally relabeled member and ``costs[i]`` its p-th power distance to the
    target. Tie-breaking matches :func:`solve_assignment`.
    """
    stack = np.asarray(stack, dtype=np.float64)
    n, ell, _ = stack.shape
    diff = np.abs(target[None, :, None, :] - stack[:, None, :, :])
    cost = (diff * diff if p == 2 else diff**p).sum(axis=3)  # (n, k, l)
    if n * factorial(ell) * ell <= _ENUM_BUDGET:
        table = _perm_table(ell)
        totals = cost[:, np.arange(ell)[None, :], table].sum(axis=2)  # (n, ell!)
        best = totals.min(axis=1)
        tol = 1e-12 * np.maximum(1.0, np.abs(best))
        choice = np.argmax(totals <= (best + tol)[:, None], axis=1)
        mappings = table[choice]
        costs = cost[np.arange(n)[:, None], np.arange(ell)[None, :], mappings].sum(axis=1)
        return mappings, costs
    mappings = np.empty((n, ell), dtype=np.intp)
    costs = np.empty(n)
    for i in range(n):
        res = solve_assignment(cost[i])
        mappings[i] = res.permutation.mapping
        costs[i] = res.objective
    return mappings, costs


def align_to(X: Partition, target: np.ndarray, p: float = 2.0) -> tuple[Permutation, np.ndarray]:
    """Relabel X's canonical form to best match the matrix ``target``."""
    res = solve_assignment(row_costs(np.asarray(target), X.canonical, p))
    return res.permutation, res.permutation.apply(X.canonical)
