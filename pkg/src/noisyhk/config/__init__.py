"""Configuration management for noisyhk."""

from .config import (
    DEFAULT_CONFIG_PATH,
    DEFAULT_DETECTION_WINDOW,
    AllEqualInitial,
    ExplicitInitial,
    InitialCondition,
    SimulationConfig,
    UniformRandomInitial,
    load_config,
)
from .settings import Settings

__all__ = [
    "DEFAULT_CONFIG_PATH",
    "DEFAULT_DETECTION_WINDOW",
    "AllEqualInitial",
    "ExplicitInitial",
    "InitialCondition",
    "Settings",
    "SimulationConfig",
    "UniformRandomInitial",
    "load_config",
]
