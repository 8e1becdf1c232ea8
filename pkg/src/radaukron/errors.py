"""Exception types for numerical failure modes.

Everything here derives from :class:`NumericalError` so callers (and the CLI)
can distinguish "the computation broke down" from plain usage errors, which
are raised as ``ValueError``.
"""


class NumericalError(RuntimeError):
    """Base class for numerical breakdowns."""


class FactorizationError(NumericalError):
    """A pivot vanished (or a matrix was singular) during factorization."""

    def __init__(self, message, pivot_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index


class DegenerateEigenvaluesError(NumericalError):
    """Two diagonal entries coincide, so the eigenvector recursion divides by ~0."""


class DefinitenessError(NumericalError):
    """A matrix expected to be positive (semi)definite was not."""


class SolverError(NumericalError):
    """An inner linear solve failed to reach its tolerance."""


class UnsupportedSymbolError(ValueError):
    """The requested operation needs a trigonometric-polynomial symbol."""
