"""Exception types shared across the package."""


class TreeFactorError(Exception):
    """Base class for all library errors."""


class BudgetExceededError(TreeFactorError):
    """An enumeration or simulation would exceed its configured budget."""


class UndefinedQuantityError(TreeFactorError):
    """A requested quantity is mathematically undefined for the given input.

    Distinct from a malformed-input error: the input is valid but the
    quantity (e.g. a correlation of a constant, a normalized mutual
    information with a zero-entropy marginal) does not exist.
    """


class NonConvergenceError(TreeFactorError):
    """An iterative routine failed to converge within its iteration cap."""

    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


class LocalAlgorithmError(TreeFactorError):
    """A round-based local algorithm hit its round cap or broke an invariant."""


class TruncationError(TreeFactorError):
    """A truncated series does not meet the requested tail tolerance."""
