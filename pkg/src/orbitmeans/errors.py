"""Exception hierarchy shared by all modules."""


class PartitionError(ValueError):
    """Base class for every error raised by orbitmeans."""


class EmptyInput(PartitionError):
    pass


class LabelOutOfRange(PartitionError):
    def __init__(self, index, label, n_clusters):
        self.index, self.label, self.n_clusters = index, label, n_clusters
        super().__init__(f"label {label} at position {index} is not in [0, {n_clusters})")


class ColumnSumViolation(PartitionError):
    def __init__(self, column, total):
        self.column, self.total = column, total
        super().__init__(f"column {column} sums to {total!r}, expected 1")


class EntryOutOfRange(PartitionError):
    def __init__(self, row, column, value):
        self.row, self.column, self.value = row, column, value
        super().__init__(f"entry ({row}, {column}) = {value!r} lies outside [0, 1]")


class ShapeMismatch(PartitionError):
    pass


class PointCountMismatch(ShapeMismatch):
    pass


class InvalidOrder(PartitionError):
    pass


class NonFiniteCost(PartitionError):
    pass


class TooManyClusters(PartitionError):
    pass


class SinglePoint(PartitionError):
    pass


class DegeneratePartition(PartitionError, ArithmeticError):
    pass


class EmptySet(PartitionError):
    pass


class EmptySample(PartitionError):
    pass


class TooLarge(PartitionError):
    pass


class InvalidParameter(PartitionError):
    pass
