"""Frechet functions and mean-partition solvers.

``mean_partition_l2`` handles the squared delta_2 consensus function by
alternating optimal relabeling of each member with averaging of the relabeled
matrices. Every other dissimilarity goes through ``mean_partition_search``, a
local search over hard partitions. ``brute_force_mean`` enumerates all hard
partitions at desk scale and serves as the reference for both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .align import batch_align
from .core import ATOL, Partition, Permutation, as_partition, from_labels
from .criteria import Criterion, CriterionSpec, dissimilarity
from .errors import EmptySample, InvalidParameter, ShapeMismatch, TooLarge
from .metrics import delta_p

MAX_INIT_CANDIDATES = 64


@dataclass(frozen=True)
class FrechetSpec:
    """Dissimilarity used inside the Frechet function.

    ``rho="delta"`` means ``delta_p(X, Z) ** loss_exponent``; any criterion
    name means that criterion oriented as a dissimilarity.
    """

    rho: str = "delta"
    p: float = 2.0
    loss_exponent: float = 2.0
    paper_normalizer: bool = False

    def __post_init__(self):
        if self.rho != "delta":
            Criterion(self.rho)
        if not self.loss_exponent >= 1:
            raise InvalidParameter(f"loss exponent must be >= 1, got {self.loss_exponent}")
        if not self.p >= 1:
            raise InvalidParameter(f"order p must be >= 1, got {self.p}")

    @classmethod
    def parse(cls, text: str, paper_normalizer: bool = False) -> FrechetSpec:
        presets = {"l2sq": (2.0, 2.0), "l2": (2.0, 1.0), "l1": (1.0, 1.0)}
        if text in presets:
            p, q = presets[text]
            return cls("delta", p, q, paper_normalizer)
        return cls(text, paper_normalizer=paper_normalizer)

    @property
    def is_metric(self) -> bool:
        return self.rho == "delta"

    @property
    def is_l2sq(self) -> bool:
        return self.is_metric and self.p == 2 and self.loss_exponent == 2

    @property
    def label(self) -> str:
        if self.is_l2sq:
            return "l2sq"
        if self.is_metric:
            return f"delta_{self.p:g}^{self.loss_exponent:g}"
        return self.rho

    def __call__(self, X, Z) -> float:
        if self.is_metric:
            return delta_p(X, Z, self.p) ** self.loss_exponent
        return dissimilarity(X, Z, CriterionSpec(self.rho), self.paper_normalizer)


L2SQ = FrechetSpec()


@dataclass
class ConsensusResult:
    mean: Partition
    variation: float
    alignments: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    restarts_used: int = 0
    converged: bool = True
    metadata: dict = field(default_factory=dict)
    hardened: Partition | None = None
    hardened_variation: float | None = None

    def to_dict(self) -> dict:
        out = {
            "mean": self.mean.canonical.tolist(),
            "l": self.mean.n_clusters,
            "m": self.mean.n_points,
            "variation": self.variation,
            "trace": list(self.trace),
            "alignments": [list(a.mapping) for a in self.alignments],
            "restarts_used": self.restarts_used,
            "converged": self.converged,
            "metadata": dict(self.metadata),
        }
        if self.hardened is not None:
            out["hardened"] = self.hardened.canonical.tolist()
            out["hardened_variation"] = self.hardened_variation
        return out


def as_sample(members: Sequence) -> list[Partition]:
    members = [as_partition(X) for X in members]
    if not members:
        raise EmptySample("sample has no members")
    shape = members[0].shape
    for X in members[1:]:
        if X.shape != shape:
            raise ShapeMismatch(f"sample mixes shapes {shape} and {X.shape}")
    return members


def _stack(sample: list[Partition]) -> np.ndarray:
    return np.stack([X.canonical for X in sample])


def frechet_value(sample: Sequence, Z, spec: FrechetSpec = L2SQ) -> float:
    """Mean dissimilarity between the sample members and the candidate ``Z``."""
    sample = as_sample(sample)
    Z = as_partition(Z)
    if Z.shape != sample[0].shape:
        raise ShapeMismatch(f"candidate shape {Z.shape} differs from sample {sample[0].shape}")
    if spec.is_metric:
        _, costs = batch_align(_stack(sample), Z.canonical, spec.p)
        dist = np.maximum(costs, 0.0) ** (1.0 / spec.p)
        return float(np.mean(dist**spec.loss_exponent))
    return float(np.mean([spec(X, Z) for X in sample]))


def _better(value: float, Z: np.ndarray, best_value: float, best_Z: np.ndarray) -> bool:
    """Merge order for restarts: lower value, then lexicographically smaller matrix."""
    tol = 1e-12 * max(1.0, abs(best_value))
    if value < best_value - tol:
        return True
    if value > best_value + tol:
        return False
    a, b = Z.ravel(), best_Z.ravel()
    diff = np.nonzero(np.abs(a - b) > ATOL)[0]
    return bool(diff.size) and a[diff[0]] < b[diff[0]]


def _harden(Z: np.ndarray) -> Partition:
    return Partition.from_labels(np.argmax(Z, axis=0), Z.shape[0])


def _mm_run(stack: np.ndarray, Z: np.ndarray, max_iter: int, tol: float):
    n = stack.shape[0]
    rows = np.arange(n)[:, None]
    trace: list[float] = []
    prev = None
    converged = False
    for _ in range(max_iter):
        maps, costs = batch_align(stack, Z, 2.0)
        trace.append(float(costs.mean()))
        if prev is not None and (np.array_equal(maps, prev) or trace[-2] - trace[-1] < tol):
            converged = True
            break
        prev = maps
        Z = stack[rows, maps].mean(axis=0)
    return Z, maps, trace, converged


def mean_partition_l2(
    sample: Sequence,
    restarts: int = 10,
    max_iter: int = 100,
    tol: float = 1e-9,
    seed: int = 0,
    harden: bool = False,
) -> ConsensusResult:
    """Mean partition under squared delta_2 by align-then-average iterations.

    Initial points are the best ``ceil(restarts / 2)`` sample members by
    Frechet value (scored on at most 64 seeded candidates) and random convex
    mixtures of members for the remaining restarts. The best run wins; the
    returned mean is soft in general.
    """
    sample = as_sample(sample)
    if restarts < 1:
        raise InvalidParameter("restarts must be >= 1")
    stack = _stack(sample)
    n = len(sample)
    rng = np.random.default_rng(seed)

    cand = np.arange(n)
    if n > MAX_INIT_CANDIDATES:
        cand = np.sort(rng.choice(n, MAX_INIT_CANDIDATES, replace=False))
    scores = np.array([batch_align(stack, stack[i], 2.0)[1].mean() for i in cand])
    order = cand[np.argsort(scores, kind="stable")]
    n_members = min(math.ceil(restarts / 2), len(order))
    inits = [stack[i] for i in order[:n_members]]
    while len(inits) < restarts:
        k = min(n, 3)
        picks = rng.choice(n, k, replace=False)
        w = rng.dirichlet(np.ones(k))
        inits.append(np.tensordot(w, stack[picks], axes=1))

    best = None
    finals = []
    for Z0 in inits:
        Z, maps, trace, converged = _mm_run(stack, Z0, max_iter, tol)
        finals.append((trace[-1], Z))
        if best is None or _better(trace[-1], Z, best[0], best[1]):
            best = (trace[-1], Z, maps, trace, converged)
    value, Z, maps, trace, converged = best

    mean = Partition(Z)
    order_rows = np.lexsort((-Z)[:, ::-1].T)
    alignments = [Permutation(tuple(mp[order_rows])) for mp in maps]
    tol_v = 1e-9 * max(1.0, abs(value))
    rivals = sum(
        1 for v, W in finals
        if abs(v - value) <= tol_v and np.abs(Partition(W).canonical - mean.canonical).max() > 1e-6
    )
    result = ConsensusResult(
        mean=mean,
        variation=value,
        alignments=alignments,
        trace=trace,
        restarts_used=len(inits),
        converged=converged,
        metadata={"solver": "mm_l2sq", "rho": "l2sq", "distinct_optima_seen": rivals,
                  "note": "mean partitions need not be unique; best found is reported"},
    )
    if harden:
        H = _harden(mean.canonical)
        result.hardened = H
        result.hardened_variation = frechet_value(sample, H, L2SQ)
    return result


def _canon_labels(labels: np.ndarray) -> tuple[int, ...]:
    """Relabel in order of first appearance (orbit key of a hard partition)."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(int(v), len(seen)) for v in labels)


class _Objective:
    def __init__(self, sample: list[Partition], spec: FrechetSpec):
        self.sample, self.spec = sample, spec
        self.ell = sample[0].n_clusters
        self.cache: dict[tuple, float] = {}
        self.evaluations = 0

    def __call__(self, labels) -> float:
        key = _canon_labels(labels)
        hit = self.cache.get(key)
        if hit is None:
            Z = Partition(from_labels(labels, self.ell), _trusted=True)
            hit = frechet_value(self.sample, Z, self.spec)
            self.cache[key] = hit
            self.evaluations += 1
        return hit


def _local_search(F: _Objective, labels: np.ndarray, rng, max_moves: int):
    labels = labels.copy()
    m, ell = labels.size, F.ell
    current = F(labels)
    trace = [current]
    moves = [(j, c) for j in range(m) for c in range(ell)]
    for _ in range(max_moves):
        best_value, best_move = current, None
        for idx in rng.permutation(len(moves)):
            j, c = moves[idx]
            if labels[j] == c:
                continue
            old = labels[j]
            labels[j] = c
            value = F(labels)
            labels[j] = old
            if value < best_value - 1e-12 * max(1.0, abs(best_value)):
                best_value, best_move = value, (j, c)
        if best_move is None:
            return labels, trace, True
        labels[best_move[0]] = best_move[1]
        current = best_value
        trace.append(current)
    return labels, trace, False


def mean_partition_search(
    sample: Sequence,
    spec: FrechetSpec,
    restarts: int = 10,
    seed: int = 0,
    max_moves: int = 1000,
) -> ConsensusResult:
    """Best-improvement local search over hard partitions for any dissimilarity.

    A move reassigns one point to another cluster. Starts are the hardened
    sample members with the lowest Frechet values, followed by uniformly random
    hard partitions.
    """
    sample = as_sample(sample)
    if restarts < 1:
        raise InvalidParameter("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    F = _Objective(sample, spec)
    ell, m = sample[0].shape

    starts, seen = [], set()
    for X in sample:
        lab = X.labels()
        key = _canon_labels(lab)
        if key not in seen:
            seen.add(key)
            starts.append(lab)
    starts.sort(key=F)
    starts = starts[: math.ceil(restarts / 2)]
    while len(starts) < restarts:
        starts.append(rng.integers(0, ell, size=m))

    best = None
    for lab in starts:
        labels, trace, converged = _local_search(F, lab, rng, max_moves)
        Z = from_labels(labels, ell)
        if best is None or _better(trace[-1], Partition(Z).canonical, best[0], best[1].canonical):
            best = (trace[-1], Partition(Z, _trusted=True), trace, converged)
    value, mean, trace, converged = best
    return ConsensusResult(
        mean=mean,
        variation=value,
        trace=trace,
        restarts_used=len(starts),
        converged=converged,
        metadata={"solver": "local_search", "rho": spec.label,
                  "evaluations": F.evaluations,
                  "note": "mean partitions need not be unique; best found is reported"},
    )


def hard_partitions(n_points: int, max_clusters: int) -> Iterator[np.ndarray]:
    """All restricted growth strings of length ``n_points`` with values < ``max_clusters``.

    Each hard partition into at most ``max_clusters`` blocks appears once.
    """
    labels = [0] * n_points

    def rec(j: int, used: int):
        if j == n_points:
            yield np.array(labels)
            return
        for c in range(min(used + 1, max_clusters)):
            labels[j] = c
            yield from rec(j + 1, max(used, c + 1))

    yield from rec(1, 1) if n_points > 0 else iter(())


def brute_force_mean(
    sample: Sequence, spec: FrechetSpec, max_points: int = 8, max_clusters: int = 3
) -> ConsensusResult:
    """Exact minimizer of the Frechet function over all hard partitions."""
    sample = as_sample(sample)
    ell, m = sample[0].shape
    if m > max_points or ell > max_clusters:
        raise TooLarge(f"brute force limited to m <= {max_points}, l <= {max_clusters}; "
                       f"got m={m}, l={ell}")
    best_value, best_labels, count = math.inf, None, 0
    for labels in hard_partitions(m, ell):
        count += 1
        Z = Partition(from_labels(labels, ell), _trusted=True)
        value = frechet_value(sample, Z, spec)
        if value < best_value - 1e-12 * max(1.0, abs(value)):
            best_value, best_labels = value, labels
    return ConsensusResult(
        mean=Partition.from_labels(best_labels, ell),
        variation=best_value,
        trace=[best_value],
        restarts_used=0,
        metadata={"solver": "brute_force", "rho": spec.label, "evaluated": count},
    )


def variation(sample: Sequence, spec: FrechetSpec = L2SQ, **opts) -> float:
    """Attained Frechet value from the solver suited to ``spec``."""
    if spec.is_l2sq:
        return mean_partition_l2(sample, **opts).variation
    return mean_partition_search(sample, spec, **opts).variation
