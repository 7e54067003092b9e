"""Exception types shared across the package."""


class TtcError(Exception):
    """Base class for errors raised by ttcomplete."""


class ShapeError(TtcError):
    """Dimension, mode, split, or fold mismatch."""


class ParameterError(TtcError):
    """Invalid algorithm parameter (weights, ranks, thresholds, ratios)."""


class NumericError(TtcError):
    """Non-finite or otherwise unusable numeric input."""


class DegenerateInputError(TtcError):
    """Input on which the requested operation is meaningless (e.g. empty mask)."""


class FormatError(TtcError):
    """Malformed file content."""
