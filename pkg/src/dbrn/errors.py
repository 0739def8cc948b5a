"""Exception types raised across the package."""


class DBRNError(Exception):
    pass


class DimensionError(DBRNError, ValueError):
    """Shapes or descriptor lengths disagree."""


class ParameterError(DBRNError, ValueError):
    """An argument is outside its allowed range."""


class ResolutionError(DBRNError, ValueError):
    """Image is too small for the extractor's stride schedule."""


class SamplingError(DBRNError, ValueError):
    """A dataset cannot supply the requested episode."""


class FormatError(DBRNError, ValueError):
    """A file on disk does not match its declared format.

    ``offset`` is the byte position where parsing failed.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
