"""Exception types shared across the toolkit."""


class FieldError(Exception):
    """Base class for field-construction and evaluation failures."""


class DomainError(FieldError):
    """A query point lies outside the domain an operation is defined on."""


class EmptyBoundaryError(FieldError):
    """A source grid contains no sign change, so no boundary can be extracted."""
