"""Self-dual Einstein metrics from modified continued fractions."""

from .cf_core import (
    BoundaryData,
    ConvergentTable,
    DigitSequence,
    InsufficientDepth,
    alpha_enclosure,
    boundary_data,
    convergents,
    digits_of_rational,
    envelope_eval,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryData",
    "ConvergentTable",
    "DigitSequence",
    "InsufficientDepth",
    "alpha_enclosure",
    "boundary_data",
    "convergents",
    "digits_of_rational",
    "envelope_eval",
]
