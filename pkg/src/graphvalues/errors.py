"""Exception types raised by the solvers, loaders and pipeline."""


class GraphValuesError(Exception):
    """Base class for every error raised by this package."""


class InvalidGraph(GraphValuesError, ValueError):
    pass


class EmptyCoalition(GraphValuesError, ValueError):
    pass


class MemberOverlap(GraphValuesError, ValueError):
    pass


class NodeOutOfRange(GraphValuesError, IndexError):
    pass


class DimensionMismatch(GraphValuesError, ValueError):
    pass


class EmptyDataset(GraphValuesError, ValueError):
    pass


class IncompleteTable(GraphValuesError, ValueError):
    pass


class ExactCapExceeded(GraphValuesError, ValueError):
    pass


class AllZeroScores(GraphValuesError, ValueError):
    pass


class NoConvergence(GraphValuesError, RuntimeError):
    """Raised when a fixed-point iteration exhausts its budget."""

    def __init__(self, message, last_delta=None, steps=None):
        super().__init__(message)
        self.last_delta = last_delta
        self.steps = steps


class InvalidTable(GraphValuesError, ValueError):
    pass
