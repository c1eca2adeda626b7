"""Exception hierarchy shared by every module of the package.

Each error carries the name of the module that raised it and an optional
``details`` mapping, so the CLI can serialise failures as JSON without
parsing messages.
"""

from __future__ import annotations

from typing import Any


class PHError(Exception):
    """Base class for all domain errors."""

    module = "phmeasure"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": type(self).__name__,
            "module": self.module,
            "message": self.message,
            "details": self.details,
        }


# phcore
class CoreError(PHError):
    module = "phcore"


class NotSquare(CoreError):
    pass


class NonFinite(CoreError):
    pass


class NotHermitian(CoreError):
    pass


class Singular(CoreError):
    pass


class NotPseudoHermitian(CoreError):
    pass


class DimensionMismatch(CoreError):
    pass


class ZeroVector(CoreError):
    pass


class VanishingEtaNorm(CoreError):
    pass


class InvalidState(CoreError):
    pass


class MetricMismatch(CoreError):
    pass


# spectral
class SpectralError(PHError):
    module = "spectral"


class ComplexSpectrum(SpectralError):
    pass


class Degenerate(SpectralError):
    pass


class VanishingEigenNorm(SpectralError, VanishingEtaNorm):
    """An eigenvector is (numerically) eta-null."""

    module = "spectral"


# dilation
class DilationError(PHError):
    module = "dilation"


class IllConditioned(DilationError):
    pass


class NotUnitVector(DilationError):
    pass


class IndexOutOfRange(DilationError):
    pass


# sampler
class SamplerError(PHError):
    module = "sampler"


class DegenerateStatistics(SamplerError):
    pass


# uncertainty
class UncertaintyError(PHError):
    module = "uncertainty"


class CrossTermVanishes(UncertaintyError):
    """Informational: the covariance term is zero so R is unbounded."""


# cli
class ConfigParse(PHError):
    module = "cli"
