"""Simulation configuration for noisyhk."""

import json
from pathlib import Path
from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from noisyhk.dynamics.noise import NoiseModel, ZeroNoise
from noisyhk.errors import ConfigError

DEFAULT_CONFIG_PATH = Path(__file__).parent / "default.json"
DEFAULT_DETECTION_WINDOW = 1000

Opinion = Annotated[float, Field(ge=0.0, le=1.0)]


class UniformRandomInitial(BaseModel):
    """Independent Uniform[0, 1) initial opinions."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["uniform_random"] = "uniform_random"

    def generate(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random(n)


class ExplicitInitial(BaseModel):
    """Initial opinions given value by value."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["explicit"] = "explicit"
    values: list[Opinion] = Field(..., min_length=1)

    def generate(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)


class AllEqualInitial(BaseModel):
    """Every agent starts at the same opinion."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["all_equal"] = "all_equal"
    value: Opinion

    def generate(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.full(n, self.value, dtype=np.float64)


InitialCondition = Annotated[
    UniformRandomInitial | ExplicitInitial | AllEqualInitial,
    Field(discriminator="kind"),
]


class SimulationConfig(BaseModel):
    """Configuration of one noisy HK experiment."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(..., ge=1)
    epsilon: float = Field(..., gt=0.0, le=1.0)
    noise: NoiseModel = Field(default_factory=ZeroNoise)
    initial: InitialCondition = Field(default_factory=UniformRandomInitial)
    horizon: int = Field(default=100_000, ge=1)
    master_seed: int = Field(default=0, ge=0)
    detection_window: int = Field(default=DEFAULT_DETECTION_WINDOW, ge=0)
    replicates: int = Field(default=100, ge=1)
    record_states: bool = False

    @model_validator(mode="after")
    def check_initial_length(self) -> "SimulationConfig":
        if isinstance(self.initial, ExplicitInitial) and len(self.initial.values) != self.n:
            raise ValueError(
                f"explicit initial opinions have {len(self.initial.values)} values, n={self.n}"
            )
        return self

    def with_overrides(self, **overrides: object) -> "SimulationConfig":
        """Return a re-validated copy with the non-None overrides applied.

        Raises:
            ConfigError: If an override breaks validation
        """
        updates = {key: value for key, value in overrides.items() if value is not None}
        try:
            return SimulationConfig.model_validate({**self.model_dump(), **updates})
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(config_path: Path | None = None) -> SimulationConfig:
    """Load a simulation configuration from a JSON file.

    Args:
        config_path: Path to JSON config file (packaged default.json if None)

    Returns:
        SimulationConfig: Validated configuration

    Raises:
        FileNotFoundError: If config file does not exist
        ConfigError: If the file is not valid JSON or fails validation
    """
    path = config_path or DEFAULT_CONFIG_PATH
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    try:
        with open(path) as f:
            config_data = json.load(f)
        return SimulationConfig.model_validate(config_data)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Config file {path} is not valid JSON: {exc}") from exc
    except ValidationError as exc:
        raise ConfigError(f"Invalid config {path}: {exc}") from exc
