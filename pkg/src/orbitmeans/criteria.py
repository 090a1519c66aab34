"""Cluster-comparison criteria extended from hard to soft partitions.

Three families are provided:

* pair counting, built on the generalized confusion counts m11, m10, m01, m00
  obtained from compatibility matrices ``C_X = X^T X``;
* cluster matching, built on cluster masses and pairwise overlaps;
* information theoretic measures over the same masses and overlaps.

On hard partitions every quantity reduces to its classical counting value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .align import solve_assignment
from .core import as_partition, check_same_shape
from .errors import DegeneratePartition, PointCountMismatch, SinglePoint


class Criterion(str, Enum):
    WALLACE1 = "wallace1"
    WALLACE2 = "wallace2"
    RAND = "rand"
    FOWLKES_MALLOWS = "fowlkes_mallows"
    JACCARD = "jaccard"
    MIRKIN = "mirkin"
    MEILA_HECKERMAN = "meila_heckerman"
    VAN_DONGEN = "van_dongen"
    MUTUAL_INFO = "mutual_info"
    NMI = "nmi"


PAIR_KINDS = {Criterion.WALLACE1, Criterion.WALLACE2, Criterion.RAND,
              Criterion.FOWLKES_MALLOWS, Criterion.JACCARD}
MATCH_KINDS = {Criterion.MIRKIN, Criterion.MEILA_HECKERMAN, Criterion.VAN_DONGEN}
INFO_KINDS = {Criterion.MUTUAL_INFO, Criterion.NMI}
DISSIMILARITIES = {Criterion.MIRKIN, Criterion.VAN_DONGEN}


@dataclass(frozen=True)
class CriterionSpec:
    kind: Criterion
    orientation: str = ""

    def __post_init__(self):
        kind = Criterion(self.kind)
        object.__setattr__(self, "kind", kind)
        native = "dissimilarity" if kind in DISSIMILARITIES else "similarity"
        if not self.orientation:
            object.__setattr__(self, "orientation", native)
        elif self.orientation != native:
            raise ValueError(f"{kind.value} is a {native}, not a {self.orientation}")


@dataclass(frozen=True)
class ConfusionCounts:
    m11: float
    m10: float
    m01: float
    m00: float
    n_pairs: float

    def as_tuple(self):
        return (self.m11, self.m10, self.m01, self.m00)


@dataclass(frozen=True)
class MatchCounts:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    m: int


@dataclass(frozen=True)
class InfoMeasures:
    h_x: float
    h_y: float
    h_joint: float
    h_x_given_y: float
    mutual_info: float


def compatibility_matrix(X) -> np.ndarray:
    """``C_X = X^T X``; entry (r, s) is the co-membership strength of points r, s."""
    A = as_partition(X).canonical
    return A.T @ A


def chi(A: np.ndarray, B: np.ndarray) -> float:
    """Inner product of the strictly upper triangular parts of A and B."""
    iu = np.triu_indices(A.shape[0], k=1)
    return float(np.dot(A[iu], B[iu]))


def _pair(X, Y):
    X, Y = as_partition(X), as_partition(Y)
    if X.n_points != Y.n_points:
        raise PointCountMismatch(f"point counts differ: {X.n_points} vs {Y.n_points}")
    if X.n_points < 2:
        raise SinglePoint("pair counts need at least two points")
    return X, Y


def confusion(X, Y, materialize: bool = False) -> ConfusionCounts:
    """Generalized confusion counts of two partitions over the same points.

    With ``materialize=False`` the chi sums are evaluated from l x l overlaps
    and per-point norms, never forming the m x m compatibility matrices.
    """
    X, Y = _pair(X, Y)
    m = X.n_points
    N = m * (m - 1) / 2
    A, B = X.canonical, Y.canonical
    if materialize:
        CX, CY = A.T @ A, B.T @ B
        ones = np.ones_like(CX)
        m11 = chi(CX, CY)
        m10 = chi(CX, ones - CY)
        m01 = chi(ones - CX, CY)
        m00 = chi(ones - CX, ones - CY)
    else:
        dx = (A * A).sum(axis=0)  # diagonal of C_X
        dy = (B * B).sum(axis=0)
        z = A @ B.T
        m11 = 0.5 * (float((z * z).sum()) - float(dx @ dy))
        sx = 0.5 * (float((A.sum(axis=1) ** 2).sum()) - float(dx.sum()))
        sy = 0.5 * (float((B.sum(axis=1) ** 2).sum()) - float(dy.sum()))
        m10 = sx - m11
        m01 = sy - m11
        m00 = N - m11 - m10 - m01
    m11, m10, m01, m00 = (max(v, 0.0) for v in (m11, m10, m01, m00))
    return ConfusionCounts(m11, m10, m01, m00, N)


def _ratio(num: float, den: float, name: str) -> float:
    if den <= 0.0:
        raise DegeneratePartition(f"{name}: denominator vanishes")
    return num / den


def pair_criterion(X, Y, kind) -> float:
    kind = Criterion(kind)
    c = confusion(X, Y)
    if kind is Criterion.RAND:
        return (c.m11 + c.m00) / c.n_pairs
    if kind is Criterion.WALLACE1:
        return _ratio(c.m11, c.m11 + c.m01, "wallace1")
    if kind is Criterion.WALLACE2:
        return _ratio(c.m11, c.m11 + c.m10, "wallace2")
    if kind is Criterion.FOWLKES_MALLOWS:
        return _ratio(c.m11, math.sqrt((c.m11 + c.m10) * (c.m11 + c.m01)), "fowlkes_mallows")
    if kind is Criterion.JACCARD:
        return _ratio(c.m11, c.m11 + c.m10 + c.m01, "jaccard")
    raise ValueError(f"{kind.value} is not a pair-counting criterion")


def match_counts(X, Y) -> MatchCounts:
    """Cluster masses of X and Y and their overlap matrix ``z = X Y^T``."""
    X, Y = as_partition(X), as_partition(Y)
    check_same_shape(X, Y)
    A, B = X.canonical, Y.canonical
    return MatchCounts(A.sum(axis=1), B.sum(axis=1), A @ B.T, X.n_points)


def mirkin(mc: MatchCounts) -> float:
    return float((mc.x**2).sum() + (mc.y**2).sum() - 2.0 * (mc.z**2).sum())


def meila_heckerman(mc: MatchCounts) -> float:
    return solve_assignment(mc.z, sense="maximize").objective / mc.m


def van_dongen(mc: MatchCounts) -> float:
    return float(2 * mc.m - mc.z.max(axis=1).sum() - mc.z.max(axis=0).sum())


def match_criterion(X, Y, kind) -> float:
    kind = Criterion(kind)
    mc = match_counts(X, Y)
    if kind is Criterion.MIRKIN:
        return mirkin(mc)
    if kind is Criterion.MEILA_HECKERMAN:
        return meila_heckerman(mc)
    if kind is Criterion.VAN_DONGEN:
        return van_dongen(mc)
    raise ValueError(f"{kind.value} is not a cluster-matching criterion")


def _plogp(p: np.ndarray) -> float:
    p = p[p > 0]
    return float((p * np.log(p)).sum())


def info_measures(X, Y, paper_normalizer: bool = False) -> InfoMeasures:
    """Entropies and mutual information in nats.

    Masses are divided by ``m`` so that they form probability vectors. With
    ``paper_normalizer=True`` they are divided by ``m(m-1)/2`` instead.
    """
    mc = match_counts(X, Y)
    m = mc.m
    norm = m * (m - 1) / 2 if paper_normalizer else float(m)
    if norm <= 0:
        raise SinglePoint("pair normalizer needs at least two points")
    px, py, pz = mc.x / norm, mc.y / norm, mc.z / norm
    h_x = -_plogp(px)
    h_y = -_plogp(py)
    h_joint = -_plogp(pz)
    mask = pz > 0
    cond = np.broadcast_to(py[None, :], pz.shape)
    h_x_given_y = -float((pz[mask] * np.log(pz[mask] / cond[mask])).sum())
    outer = px[:, None] * py[None, :]
    mutual = float((pz[mask] * np.log(pz[mask] / outer[mask])).sum())
    return InfoMeasures(h_x, h_y, h_joint, h_x_given_y, mutual)


def info_criterion(X, Y, kind, paper_normalizer: bool = False) -> float:
    kind = Criterion(kind)
    info = info_measures(X, Y, paper_normalizer)
    if kind is Criterion.MUTUAL_INFO:
        return info.mutual_info
    if kind is Criterion.NMI:
        return _ratio(info.mutual_info, math.sqrt(info.h_x * info.h_y), "nmi")
    raise ValueError(f"{kind.value} is not an information criterion")


def criterion(X, Y, kind, paper_normalizer: bool = False) -> float:
    """Value of any supported criterion in its native orientation."""
    kind = Criterion(kind)
    if kind in PAIR_KINDS:
        return pair_criterion(X, Y, kind)
    if kind in MATCH_KINDS:
        return match_criterion(X, Y, kind)
    return info_criterion(X, Y, kind, paper_normalizer)


def dissimilarity(X, Y, spec: CriterionSpec | str, paper_normalizer: bool = False) -> float:
    """Criterion value oriented so that smaller means more alike."""
    if not isinstance(spec, CriterionSpec):
        spec = CriterionSpec(spec)
    value = criterion(X, Y, spec.kind, paper_normalizer)
    return -value if spec.orientation == "similarity" else value


def all_criteria(X, Y, paper_normalizer: bool = False) -> dict:
    """Every criterion and information measure; degenerate ones map to None."""
    out = {}
    for kind in Criterion:
        try:
            out[kind.value] = criterion(X, Y, kind, paper_normalizer)
        except DegeneratePartition:
            out[kind.value] = None
    try:
        info = info_measures(X, Y, paper_normalizer)
        out.update(
            entropy_x=info.h_x, entropy_y=info.h_y, joint_entropy=info.h_joint,
            conditional_entropy=info.h_x_given_y,
        )
    except DegeneratePartition:
        pass
    return out
