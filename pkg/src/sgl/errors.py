"""Exception hierarchy shared by all modules."""

import numpy as np


class SGLError(Exception):
    """Base class for every error raised by the package."""


class DomainError(SGLError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedPresentationError(SGLError):
    """A graph generator cannot be enumerated (e.g. infinite degree)."""


class DefinitenessError(SGLError, np.linalg.LinAlgError):
    """A Dirichlet system is not positive definite.

    ``direction`` holds a vector (indexed like the region) along which the
    quadratic form is nonpositive, when one could be computed.
    """

    def __init__(self, message, direction=None, value=None):
        super().__init__(message)
        self.direction = direction
        self.value = value


class ConvergenceError(SGLError):
    """An iterative method stopped before reaching its tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SpectralParameterError(DomainError):
    """The spectral parameter is not below the bottom of the spectrum."""


class DegenerateWeightError(DomainError):
    """A weight vanishes identically on the region."""


class FormNotNonnegativeError(SGLError):
    """The form h fails to be nonnegative on some truncation."""


class NoMinimalGreenError(SGLError):
    """Minimal Green function requested for a form that is not subcritical."""


class HarnackSizeError(DomainError):
    """Harnack path enumeration requested on a set larger than the cap."""


class PreconditionError(SGLError):
    """A caller-certified identity does not hold on the data."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}
