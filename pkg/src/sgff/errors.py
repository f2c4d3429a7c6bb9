"""Exception hierarchy."""


class SGFFError(Exception):
    """Base class for all errors raised by the package."""


class QuadratureError(SGFFError):
    """An integral did not converge to the requested tolerance."""


class PoleError(SGFFError, ValueError):
    """Evaluation point sits on (or numerically at) a pole."""


class StripError(SGFFError, ValueError):
    """Rapidity outside the strip |Im theta| <= pi handled by the contour code."""


class SeriesError(SGFFError, ValueError):
    """Incompatible asymptotic series (e.g. mismatched directions)."""


class ZeroModeImbalanceError(SGFFError):
    """Dropped zero-exponent terms failed to cancel in an assembled form factor."""
