"""Shared exception types."""


class CapacityError(ValueError):
    """A configured space or design exceeds a hard size limit."""


class SamplerError(RuntimeError):
    """An MCMC step could not produce a valid draw."""


class IngestionError(ValueError):
    """Input data failed validation on load."""
