"""Consensus clustering on the orbit space of partitions."""

from .align import AssignmentResult, brute_force_alignment, optimal_alignment, solve_assignment
from .consensus import (
    ConsensusResult,
    FrechetSpec,
    brute_force_mean,
    frechet_value,
    mean_partition_l2,
    mean_partition_search,
    variation,
)
from .core import Partition, Permutation, canonicalize, from_labels, is_hard, orbit_equal, validate
from .criteria import (
    Criterion,
    CriterionSpec,
    compatibility_matrix,
    confusion,
    criterion,
    dissimilarity,
    info_measures,
    match_counts,
    match_criterion,
    pair_criterion,
)
from .metrics import MetricSpec, delta_p, midpoint, set_distance

__version__ = "0.1.0"
