"""Exception types shared across the package."""


class ConfigError(Exception):
    """Invalid or malformed experiment configuration."""


class UsageError(Exception):
    """An operation was called outside its contract (bad shapes, terminal scene, ...)."""


class NumericalError(Exception):
    """Non-finite values encountered in a network forward pass."""


class TrainingDiverged(Exception):
    """Training aborted because the loss became non-finite."""
