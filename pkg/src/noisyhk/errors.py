"""Exception hierarchy for noisyhk."""


class NoisyHKError(Exception):
    """Base class for all noisyhk errors."""


class ConfigError(NoisyHKError):
    """Raised when a configuration file cannot be parsed or validated."""


class DegenerateNoiseError(NoisyHKError):
    """Raised when an operation needs a noise model with positive variance."""


class AbsorptionViolationError(NoisyHKError):
    """Raised when the diameter leaves [0, eps] under noise bounded by eps/2."""


class UnknownScenarioError(NoisyHKError):
    """Raised for a scenario name outside the reproducible set."""


class ReplayMismatchError(NoisyHKError):
    """Raised when a replayed output file differs from its manifest hash."""
