"""Exception hierarchy shared by all modules."""


class DMTError(Exception):
    """Base class for every error raised by dmtrack."""


class ComplexError(DMTError, ValueError):
    """Malformed cell complex or invalid construction request."""


class InvalidMorseFunction(DMTError, ValueError):
    pass


class NotGradientError(DMTError, ValueError):
    """A vector field that was required to be acyclic has a closed V-path."""


class PathCapExceeded(DMTError, RuntimeError):
    pass


class CancellationError(DMTError, ValueError):
    """A critical pair cannot be cancelled (zero or several connecting paths)."""


class SliceMismatchError(DMTError, ValueError):
    pass


class NotACurveError(DMTError, ValueError):
    pass


class InputError(DMTError, ValueError):
    """Bad user input: unreadable file, malformed header, inconsistent frames."""
