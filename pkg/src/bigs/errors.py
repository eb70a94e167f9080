"""Shared exception types."""


class ValidationError(ValueError):
    """Bad input: malformed graph, design, sample or weight table."""


class EnumerationCapError(RuntimeError):
    """The sample space is larger than the configured enumeration cap."""


class UnreachableMotifSetError(ValueError):
    """No sample in the design's support produces the requested motif set."""
