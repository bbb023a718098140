"""Exception types and warnings used across the package."""

from __future__ import annotations


class ProjBalanceError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ProjBalanceError, ValueError):
    """Invalid or incompatible dimensions (k, d, or array shapes)."""


class DegenerateDataError(ProjBalanceError, ValueError):
    """Data carries no usable variation (e.g. all points identical)."""


class DistinctPointsError(ProjBalanceError, ValueError):
    """An operation over point pairs met two coincident points."""


class UndefinedFitError(ProjBalanceError, ValueError):
    """A least-squares fit is undefined (zero variance in the regressor)."""


class EmptyBandError(ProjBalanceError, ValueError):
    """A selection band contains no candidates; widen the tolerance."""


class DesignFileError(ProjBalanceError, ValueError):
    """A candidate-set file is malformed or violates frame invariants."""


class TransformError(ProjBalanceError, ValueError):
    """A feature transform is unusable (missing adjoint, bad shapes)."""


class CSVFormatError(ProjBalanceError, ValueError):
    """A CSV input could not be parsed into a point cloud."""


class SubspaceTieWarning(UserWarning):
    """The retained and discarded eigenvalues are (nearly) tied, so the
    fitted subspace is not unique."""
