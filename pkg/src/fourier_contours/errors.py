"""Exception types raised across the package.

Every geometry/validation failure derives from ``ContourError`` (itself a
``ValueError``) so callers and the CLI can separate bad input values from
I/O problems, which derive from ``InputFormatError``.
"""


class ContourError(ValueError):
    pass


class DegenerateContour(ContourError):
    """Contour has (near) zero area or too few distinct vertices."""


class InsufficientSamples(ContourError):
    """Sample count too small for the requested number of harmonics."""


class InvalidDescriptor(ContourError):
    pass


class ShapeMismatch(ContourError):
    """Two descriptors do not share the same harmonic count."""


class DegeneratePair(ContourError):
    pass


class EmptyRegion(ContourError):
    pass


class UndefinedMetric(ContourError):
    pass


class DegenerateClustering(ContourError):
    pass


class EmptyGroundTruth(ContourError):
    pass


class EmptyProposals(ContourError):
    pass


class GenerationFailure(ContourError):
    pass


class PairingError(ContourError):
    pass


class InputFormatError(OSError):
    """Malformed input file. ``lineno`` is 1-based when known."""

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}:"
            if lineno is not None:
                where += f"{lineno}:"
            where += " "
        super().__init__(where + message)
