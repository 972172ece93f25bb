"""Exception types shared across the toolkit.

Everything raised on bad *input data* derives from DataError so the CLI can
map it to exit code 1, distinct from usage errors (2) and genuine bugs.
"""


class DataError(Exception):
    """Invalid or unreadable input data."""


class UnsupportedFormatError(DataError):
    """File is a valid image but not PNG or JPEG."""


class CorruptImageError(DataError):
    """File cannot be decoded as an image stream."""


class LabelParseError(DataError):
    """A ground-truth label file failed to parse."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PredictionFileError(DataError):
    """A prediction JSON file violates the interchange schema."""


class EvaluationInputError(DataError):
    """Evaluation inputs are inconsistent (missing files, dimension mismatch)."""
