"""Exception types raised across the package."""


class BRTreeError(Exception):
    """Base class for package errors."""


class ValidationError(BRTreeError, ValueError):
    """An input object violates its invariants (bad probability vector, bad word...)."""


class DomainError(BRTreeError, ValueError):
    """A closed form was requested outside the parameter range it is defined on."""


class ResourceLimitError(BRTreeError, RuntimeError):
    """An exhaustive enumeration would exceed the configured state cap."""

    def __init__(self, what: str, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"{what} needs {size} states, above the enumeration cap of {cap} "
                         f"(raise it with cap=... or BRTREE_ENUM_CAP)")


class UsageError(BRTreeError, ValueError):
    """Two objects that must agree (same statistic, same n) do not."""


class InvariantViolation(BRTreeError, AssertionError):
    """A sampled tree broke a structural property that must always hold."""
