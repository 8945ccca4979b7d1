"""Transport of a lattice impurity dressed by Bogoliubov phonons of a condensate."""

__version__ = "0.1.0"

from .errors import (ConfigError, ConvergenceError, ParameterError, PolaronError,  # noqa: E402
                     RegimeWarning, SolverInvariantError)
from .model import SystemParams, derive_scales, fig3_params  # noqa: E402
from .coupling import polaronic_shift, system_constants  # noqa: E402

__all__ = [
    "ConfigError", "ConvergenceError", "ParameterError", "PolaronError", "RegimeWarning",
    "SolverInvariantError", "SystemParams", "derive_scales", "fig3_params",
    "polaronic_shift", "system_constants",
]
