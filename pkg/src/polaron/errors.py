"""Exception types shared across the package."""


class PolaronError(Exception):
    """Base class for all package errors."""


class ParameterError(PolaronError, ValueError):
    """Physical input outside the supported regime."""


class ConfigError(PolaronError):
    """Malformed run configuration; carries the offending key path."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class ConvergenceError(PolaronError, RuntimeError):
    """A numerical refinement did not reach its tolerance."""


class SolverInvariantError(PolaronError, RuntimeError):
    """A trajectory violated normalization or the lattice-boundary guard."""


class RegimeWarning(UserWarning):
    """Parameters where the linearized condensate response is questionable."""
