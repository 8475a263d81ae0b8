"""Exception hierarchy shared by every module."""


class SqueezeBellError(Exception):
    """Base class for all package errors."""


class InvalidConfigurationError(SqueezeBellError, ValueError):
    """A circuit, state or sweep was configured inconsistently."""


class UnsupportedColumnError(SqueezeBellError, ValueError):
    """A squeezer was asked to act on a mode holding more than two photons."""


class InvalidInputError(SqueezeBellError, ValueError):
    """An analysis routine received input it cannot work with (empty table, bad probability, ...)."""


class VerificationError(SqueezeBellError):
    """Two independent computations of the same quantity disagree."""
