"""Run manifest models."""

from datetime import datetime
from typing import Any

from pydantic import BaseModel, Field


class OutputFile(BaseModel):
    """An emitted data file and its content hash."""

    name: str
    sha256: str


class RunManifest(BaseModel):
    """Everything needed to replay a CLI invocation bit-for-bit."""

    command: str
    software_version: str
    master_seed: int | None = None
    started_at: datetime
    finished_at: datetime
    config: dict[str, Any] | None = None
    options: dict[str, Any] = Field(default_factory=dict)
    outputs: list[OutputFile] = Field(default_factory=list)
