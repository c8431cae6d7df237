"""Shared exception types."""


class InvalidParameterError(ValueError):
    """An operation was called with arguments outside its contract."""
