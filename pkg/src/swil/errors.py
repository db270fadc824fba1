"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, NumericalError and its
subclasses -> 3, CheckFailure -> 1. Library code raises, never exits.
"""

from __future__ import annotations

from dataclasses import dataclass


class SwilError(Exception):
    """Base class for package errors."""


class ConfigError(SwilError):
    """Invalid configuration, arguments, or an under-resolved grid."""


class RepresentationError(ConfigError):
    """A Field2D arrived in the wrong representation (physical vs spectral)."""


class NumericalError(SwilError):
    """A computation failed numerically (divergence, NaN, quadrature)."""


class QuadratureError(NumericalError):
    """Adaptive quadrature could not reach the requested tolerance."""


@dataclass
class BlowUpInfo:
    step: int
    time: float
    min_height: float  # min over the grid of 1 + h when the run aborted
    max_abs_u: float


class BlowUpError(NumericalError):
    """The solution left the admissible region (1 + h <= 0 or non-finite)."""

    def __init__(self, info: BlowUpInfo):
        self.info = info
        super().__init__(
            f"blow-up at step {info.step}, t={info.time:.6g}: "
            f"min(1+h)={info.min_height:.3g}, max|u|={info.max_abs_u:.3g}"
        )


class CheckFailure(SwilError):
    """An acceptance-style check evaluated to fail (CLI exit code 1)."""
