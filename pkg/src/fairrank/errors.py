class FairRankError(Exception):
    """Base class for all errors raised by fairrank."""


class InvariantError(FairRankError, ValueError):
    """An input violates a documented invariant (shape, sums, monotonicity...)."""


class SolverError(FairRankError):
    """The LP solver or the BvN decomposition could not finish."""


class DataError(FairRankError):
    """A data file is missing, empty or malformed."""
