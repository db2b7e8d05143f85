"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """A mathematical precondition of an operation is not met."""


class FileFormatError(Exception):
    """A dataset file is malformed or violates a schema invariant."""


class DefectError(RuntimeError):
    """A monitored numerical quantity left its admissible range mid-computation."""
