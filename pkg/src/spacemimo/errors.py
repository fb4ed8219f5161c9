"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class OutOfValidityError(DomainError):
    """An asymptotic expression evaluated where it no longer makes sense."""


class InvariantViolation(RuntimeError):
    """A computed quantity broke an invariant it must satisfy."""
