"""Exception hierarchy for the DIWED toolkit."""


class DiwedError(Exception):
    """Base class for every error raised by the toolkit."""


class InvalidInputError(DiwedError, ValueError):
    """An argument violates an operation's precondition."""


class DimensionMismatchError(InvalidInputError):
    """Party counts of two objects disagree."""


class DegenerateOptimizationError(DiwedError):
    """Every see-saw restart stalled on a degenerate effective operator."""


class SaturationError(DiwedError):
    """No deterministic vertex attains the requested bound."""


class ExportError(DiwedError):
    """Writing or reading an exported problem file failed."""
