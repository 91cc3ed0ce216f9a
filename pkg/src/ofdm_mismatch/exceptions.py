"""Exception hierarchy shared by the solver modules."""


class DesignError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefiniteError(DesignError, ValueError):
    """A matrix expected to be Hermitian positive definite is not."""


class ZeroSidelobeError(DesignError, ZeroDivisionError):
    """The integrated sidelobe level is exactly zero, so the PSLR is infinite."""


class DegenerateDenominatorError(DesignError, ZeroDivisionError):
    """The main-lobe term ``|y^H h|^2`` vanished."""


class SolverError(DesignError, RuntimeError):
    """An iterative solver produced non-finite values or could not proceed."""


class ConfigError(DesignError, ValueError):
    """Invalid experiment configuration."""
