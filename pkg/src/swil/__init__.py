"""Numerical laboratory for norm inflation in the viscous shallow water system.

Builds oscillatory two-mode initial data, evaluates the first correction of
the mild-solution expansion by continuum quadrature, runs a pseudo-spectral
solver for the full system, and measures critical Besov and time-space norms
to test the predicted growth and smallness rates.
"""

__version__ = "0.1.0"

from .errors import (
    BlowUpError,
    CheckFailure,
    ConfigError,
    NumericalError,
    QuadratureError,
    RepresentationError,
    SwilError,
)
from .grid import Field2D, GridSpec

__all__ = [
    "BlowUpError",
    "CheckFailure",
    "ConfigError",
    "Field2D",
    "GridSpec",
    "NumericalError",
    "QuadratureError",
    "RepresentationError",
    "SwilError",
    "__version__",
]
