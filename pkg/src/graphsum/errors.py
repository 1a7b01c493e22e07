"""Exception types shared across the package."""


class GraphsumError(Exception):
    """Base class for all graphsum errors."""


class FormatError(GraphsumError):
    """Malformed or inconsistent input data (files, matrices, rankings)."""


class ResourceError(GraphsumError):
    """A required external resource (embedding file, model) is missing."""
