"""Exception types shared across the library.

The CLI maps these onto exit codes: FormatError (and missing files) mean a
broken or unreadable input, DataError means the inputs are readable but
semantically unusable (mismatched dimensions, degenerate training sets, ...).
"""


class FormatError(Exception):
    """A file does not conform to its declared format.

    ``offset`` is the byte position at which parsing failed, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class DataError(Exception):
    """Inputs are well-formed but semantically invalid for the operation."""


class ConvergenceError(Exception):
    """An iterative numerical routine exhausted its iteration budget."""
