"""Exception hierarchy shared across the library."""


class SymtrackError(Exception):
    """Base class for all symtrack domain errors."""


class BoundaryError(SymtrackError, ValueError):
    """A region, search area, or sampling grid does not fit inside the image."""


class GeometryError(SymtrackError, ValueError):
    """A synthetic particle or motion trajectory does not fit its frame."""


class NoParticleError(SymtrackError, RuntimeError):
    """A detector found nothing to localize (degenerate or empty evidence)."""


class FitError(SymtrackError, RuntimeError):
    """A least-squares fit failed to converge or is ill-posed."""


class CollinearityError(FitError):
    """The calibration design matrix is rank deficient."""


class DecodeError(SymtrackError, ValueError):
    """An image file could not be decoded."""
