"""Exceptions that callers are expected to catch and act on.

Plain ``ValueError`` is raised for malformed inputs (bad shapes, out-of-range
coefficients); the classes below mark conditions that the batch pipeline
records and recovers from instead of aborting.
"""


class NoIntersectionError(Exception):
    """A probe ray found no contour point within its angular tolerance."""


class DegenerateRegionError(Exception):
    """A mask region yields too few contour handles to anchor a warp."""


class EmptyMaskError(Exception):
    """A mask (input or warped) contains no foreground pixels."""


class PatternSpaceExhausted(Exception):
    """More variants were requested than distinct move patterns exist."""
