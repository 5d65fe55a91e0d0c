"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class OutOfRangeError(DomainError):
    """A value falls outside the range an inverse map can reach."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or produced an inconsistent answer."""
