"""Service configuration and model selection."""

from __future__ import annotations

from dataclasses import dataclass


class AdapterError(Exception):
    """Base class for adapter failures."""


class ModelLoadFailure(AdapterError):
    def __init__(self, model: str):
        super().__init__(f"no loadable detector for model id {model!r}")
        self.model = model


@dataclass(frozen=True)
class AdapterConfig:
    model: str = "blob-v1"
    threshold: float = 0.5
    bind: str = "127.0.0.1:0"

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if not self.model:
            raise ValueError("model id must be non-empty")
