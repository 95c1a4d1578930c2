"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration input (unknown key, out-of-range value)."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (non-convergence, all realizations failed)."""
