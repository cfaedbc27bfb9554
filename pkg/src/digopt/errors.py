"""Exception types shared across the package."""


class DigoptError(Exception):
    """Base class for all package errors."""


class NotStronglyConnected(DigoptError):
    """The digraph has a pair of nodes with no directed path between them."""


class InvalidParameter(DigoptError, ValueError):
    """A numeric argument is outside its admissible range."""


class NoConvergence(DigoptError):
    """An iterative solver did not reach its tolerance within the budget.

    For equilibrium-vector computations this typically signals a
    non-primitive or badly conditioned mixing matrix.
    """


class DimensionMismatch(DigoptError, ValueError):
    """Vector or matrix operands have incompatible shapes."""


class NonPositiveEntry(DigoptError, ValueError):
    """A vector that must be strictly positive has a zero or negative entry."""


class InvalidWeightSum(DigoptError, ValueError):
    """Push-sum weights must sum to the node count at initialization."""


class ZeroWeight(DigoptError):
    """A push-sum weight needed for debiasing is (numerically) zero."""


class OracleFailure(DigoptError):
    """A gradient oracle returned a non-finite or mis-shaped result."""


class ConfigError(DigoptError):
    """An experiment configuration is malformed or references missing files."""


class Diverged(DigoptError):
    """An iterate norm passed the divergence guard; runs catch this and flag
    the trace instead of failing the whole sweep."""
