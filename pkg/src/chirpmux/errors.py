"""Exception and warning types shared across the package."""


class ChirpmuxError(Exception):
    """Base class for errors raised by this package."""


class UnsupportedRegimeError(ChirpmuxError, ValueError):
    """The requested quantity is undefined in the given parameter regime."""


class IllConditionedError(ChirpmuxError, ArithmeticError):
    """A linear solve was refused because the system is singular or near-singular."""


class AmbiguousDisplacementError(ChirpmuxError, ValueError):
    """Two candidate paths map to the same displacement index, so the pilot
    observation cannot be inverted. Raise the chirp rate or shrink the grid."""


class EmptyChannelError(ChirpmuxError, RuntimeError):
    """No path energy was detected above the decision threshold."""


class ResolutionError(ChirpmuxError, ValueError):
    """The spectral grid is too coarse to certify the requested measurement."""

    def __init__(self, message: str, required_window_len: int | None = None):
        super().__init__(message)
        self.required_window_len = required_window_len


class ConfigError(ChirpmuxError, ValueError):
    """A configuration file failed to load."""


class ConfigParseError(ConfigError):
    """Syntactically invalid configuration text."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class ConfigValidationError(ConfigError):
    """Structurally valid text with an invalid or unknown field."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class BandCoverageWarning(UserWarning):
    """The equalizer band is too narrow to cover any significant channel entry."""
