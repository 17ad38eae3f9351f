"""Session-scoped, append-only store of expert outputs and derived facts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

from jure.core.errors import JureError

# Tags of the ContextValue union. The payload type each tag carries is fixed
# by the wire codec in jure.transport.wire.
TAG_NUMBER = "number"
TAG_TEXT = "text"
TAG_DETECTIONS = "detections"
TAG_MASKS = "masks"
TAG_SIMILARITY = "similarity"
TAG_STYLE = "style"
TAG_CHROMA = "chroma"
TAG_DEPTH = "depth"
TAG_TEXT_FINDINGS = "text_findings"
TAG_IMAGE_REF = "image_ref"
TAG_COMPOSITE = "composite"

ALL_TAGS = frozenset(
    {
        TAG_NUMBER,
        TAG_TEXT,
        TAG_DETECTIONS,
        TAG_MASKS,
        TAG_SIMILARITY,
        TAG_STYLE,
        TAG_CHROMA,
        TAG_DEPTH,
        TAG_TEXT_FINDINGS,
        TAG_IMAGE_REF,
        TAG_COMPOSITE,
    }
)


class DuplicateKey(JureError):
    """A context key was written twice; re-deriving known facts is a backend bug."""

    def __init__(self, key: str):
        super().__init__(f"context key already present: {key!r}")
        self.key = key


@dataclass(frozen=True)
class ContextValue:
    """Tagged union of everything an expert (or the orchestrator) can emit."""

    tag: str
    value: Any

    def __post_init__(self) -> None:
        if self.tag not in ALL_TAGS:
            raise ValueError(f"unknown context value tag: {self.tag!r}")

    @classmethod
    def number(cls, value: float) -> "ContextValue":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"number payload must be int or float, got {value!r}")
        return cls(TAG_NUMBER, value)

    @classmethod
    def text(cls, value: str) -> "ContextValue":
        return cls(TAG_TEXT, value)

    @classmethod
    def composite(cls, value: dict) -> "ContextValue":
        return cls(TAG_COMPOSITE, dict(value))


@dataclass(frozen=True)
class ContextEntry:
    key: str
    producer: str
    iteration: int
    value: ContextValue


@dataclass
class ContextStore:
    """Append-only map of context keys to values with provenance.

    Owned by exactly one evaluation session; safe to hand between threads
    but not for concurrent mutation.
    """

    _entries: dict[str, ContextEntry] = field(default_factory=dict)
    _last_iteration: int = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def get(self, key: str) -> ContextValue:
        return self._entries[key].value

    def entry(self, key: str) -> ContextEntry:
        return self._entries[key]

    def keys(self) -> list[str]:
        return list(self._entries)

    def entries(self) -> Iterator[ContextEntry]:
        """Entries in insertion order."""
        return iter(self._entries.values())

    def update(self, producer: str, iteration: int, outputs: dict[str, ContextValue]) -> "ContextStore":
        """Append expert or orchestrator outputs; duplicate keys are rejected.

        Iterations must not regress: the store is a journal of a forward-only
        evaluation loop.
        """
        if iteration < 0:
            raise ValueError(f"iteration must be non-negative, got {iteration}")
        if iteration < self._last_iteration:
            raise ValueError(
                f"iteration {iteration} precedes last recorded iteration {self._last_iteration}"
            )
        for key in outputs:
            if key in self._entries:
                raise DuplicateKey(key)
        for key, value in outputs.items():
            if not isinstance(value, ContextValue):
                raise TypeError(f"output {key!r} is not a ContextValue: {value!r}")
            self._entries[key] = ContextEntry(key, producer, iteration, value)
        if outputs:
            self._last_iteration = iteration
        return self
