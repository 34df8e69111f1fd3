"""Exception hierarchy shared across the toolkit.

The CLI maps these onto process exit codes: configuration problems exit 2,
data problems exit 3, and a numerical abort during training exits 4.
"""


class VibecycleError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(VibecycleError):
    """Invalid configuration, hyperparameters, or network specification."""


class DataError(VibecycleError):
    """Invalid, missing, or inconsistent signal data."""


class CheckpointError(DataError):
    """Unreadable, corrupt, or incompatible checkpoint file."""


class TrainingDiverged(VibecycleError):
    """A loss became non-finite; training aborted rather than continuing."""
