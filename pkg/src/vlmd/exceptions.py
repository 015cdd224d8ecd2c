"""Exception and warning types raised across the package."""


class VlmdError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(VlmdError, ValueError):
    """Input data is malformed: non-finite samples, too short, wrong rank."""


class DimensionError(VlmdError, ValueError):
    """Array shapes are inconsistent with each other."""


class ConfigError(VlmdError, ValueError):
    """A solver configuration is invalid or incompatible with the data."""


class SpecError(VlmdError, ValueError):
    """A synthetic scenario description violates its invariants."""


class ExplicitEmptyOutput(VlmdError):
    """A filtering step would leave nothing to write."""


class DegenerateModeWarning(UserWarning):
    """A mode carries no energy, so its central frequency was left unchanged."""


class UnderdeterminedWarning(UserWarning):
    """A regression column is identically zero and lambda is 0."""
