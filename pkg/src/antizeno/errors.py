"""Shared exception types."""


class OutOfRegimeError(ValueError):
    """Inputs fall outside the validity regime of a closed-form approximation.

    Raised instead of silently clamping, so callers can tell a bad parameter
    choice apart from a genuine numerical failure.
    """
