"""Exception types shared across the package."""


class CapacityError(ValueError):
    """Requested system size exceeds the exact-enumeration cap."""


class NumericalError(RuntimeError):
    """An iterative numerical routine failed (non-convergence, non-finite values)."""


class ConfigError(ValueError):
    """Invalid configuration file or option value."""


class CriterionError(RuntimeError):
    """The convergence criterion was not met within the allotted budget."""
