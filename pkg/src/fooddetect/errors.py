"""Exception taxonomy shared across the pipeline.

Exit-code contract for the CLI: 0 success, 1 validation/contract error,
2 I/O or corruption. Each class carries the code it maps to.
"""


class PipelineError(Exception):
    exit_code = 1


class ValidationError(PipelineError):
    """Input violates a documented contract (tokens, duplicates, ranges)."""


class ShapeError(ValidationError):
    """Operand dimensions do not line up."""


class DomainError(ValidationError):
    """Scalar argument outside its allowed range."""


class AlignmentError(ValidationError):
    """Manifest ids missing from the feature matrix."""


class InsufficientDataError(ValidationError):
    """Operation needs more samples than were provided."""


class SearchError(ValidationError):
    """A grid-search cell could not be trained; message names the cell."""


class ModelCompatibilityError(ValidationError):
    """Model dimension chain does not fit the given features."""


class ConvergenceError(PipelineError):
    """Iterative solver exhausted its iteration cap."""


class FormatError(PipelineError):
    """File does not carry the expected magic or structure."""

    exit_code = 2


class VersionError(FormatError):
    """File format version is not recognized by this build."""


class CorruptionError(PipelineError):
    """File structure is recognized but the payload is damaged."""

    exit_code = 2
