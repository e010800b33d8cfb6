"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operator or state shapes do not match the declared registers."""


class PostSelectionError(RuntimeError):
    """The post-selected branch has (numerically) zero probability."""


class NotCliffordBehavior(RuntimeError):
    """No Weyl correction restores the post-selected state."""


class PSDViolation(ValueError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""
