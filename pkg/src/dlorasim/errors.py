"""Exception types raised by the simulator."""


class InvalidParameterError(ValueError):
    """A numerology or configuration value is out of range."""


class DomainError(ValueError):
    """A waveform was evaluated outside its symbol window."""


class InvalidInputError(ValueError):
    """A sample buffer has the wrong shape or length."""


class CoverageError(RuntimeError):
    """The interferer timeline does not cover the analysis window."""
