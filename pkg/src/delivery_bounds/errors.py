"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A numeric argument is outside its admissible range."""


class ProtocolParseError(ValueError):
    """A protocol document could not be turned into a valid tree.

    ``location`` is a JSON-pointer-like path (or ``line:col`` for syntax
    errors) identifying where the problem was found.
    """

    def __init__(self, message, location=""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class UnsupportedModelError(ValueError):
    """The requested computation is not meaningful for this protocol model."""


class ResourceLimitError(RuntimeError):
    """A computation hit its horizon/memory budget before converging.

    The best result obtained so far is kept in ``partial``.
    """

    def __init__(self, message, partial=None):
        self.partial = partial
        super().__init__(message)


class PreconditionError(ValueError):
    """A check was requested on an input for which it is not applicable."""


class InconclusiveError(ValueError):
    """The requested tolerance is smaller than the truncation error."""
