"""Exception hierarchy shared across the package.

Grouping matters for the CLI: subclasses of DataError map to exit code 3,
subclasses of NumericError to exit code 4, bad invocations to exit code 2.
"""


class CombPerceptronError(Exception):
    """Base class for all package errors."""


class UsageError(CombPerceptronError):
    """Malformed invocation: unknown option, bad config key, unreadable path."""


class DataError(CombPerceptronError):
    """Input data could not be read or does not satisfy its contract."""


class DataFormatError(DataError):
    """File exists but its bytes do not match the expected format."""


class EmptySelectionError(DataError):
    """A filter or query matched nothing."""


class SplitSizeError(DataError):
    """Requested train/test sizes exceed the available samples."""


class NumericError(CombPerceptronError):
    """A computation produced values outside its valid domain."""


class DomainError(NumericError):
    """An input value is outside the range an operation accepts."""


class TrainingDivergedError(NumericError):
    """Loss became non-finite during gradient descent."""

    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}")


class UnflattenableCombError(NumericError):
    """Comb lines spread wider than the shaper's attenuation range."""

    def __init__(self, line_indices, message=None):
        self.line_indices = list(line_indices)
        super().__init__(
            message
            or "comb cannot be flattened: lines %s sit more than the "
            "attenuation range below the strongest line" % self.line_indices
        )


class RecoveryError(NumericError):
    """Detected trace cannot be rescaled back to model units."""


class PlanError(NumericError):
    """A network plan is empty or its layers do not chain."""
