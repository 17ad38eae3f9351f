"""Expert pool: named bindings behind a uniform invoke surface.

A binding pairs a descriptor with a way to run the expert.  In-process
bindings call a local function; remote bindings delegate to a caller
supplied by the transport layer.  The registry itself never imports any
network code, so a pool can mix both kinds freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from jure.core.context import ContextValue
from jure.core.errors import JureError
from jure.experts.descriptors import (
    ExpertDescriptor,
    SchemaViolation,
    UnknownExpert,
    validate_args,
)

ExpertFn = Callable[[dict], ContextValue]


class ExpertFailure(JureError):
    """The expert ran and failed for a non-schema reason."""

    def __init__(self, expert: str, message: str):
        super().__init__(f"expert {expert!r} failed: {message}")
        self.expert = expert


class OutputMismatch(JureError):
    """An expert returned a value whose tag contradicts its descriptor."""

    def __init__(self, expert: str, expected: str, got: str):
        super().__init__(f"expert {expert!r} declared tag {expected!r} but produced {got!r}")
        self.expert = expert
        self.expected = expected
        self.got = got


@dataclass(frozen=True)
class ExpertBinding:
    descriptor: ExpertDescriptor
    fn: ExpertFn


class ExpertRegistry:
    """Immutable name-to-binding map.  Extending returns a new registry."""

    def __init__(self, bindings: Mapping[str, ExpertBinding] | None = None):
        bindings = dict(bindings or {})
        for name, binding in bindings.items():
            if name != binding.descriptor.name:
                raise ValueError(
                    f"registry key {name!r} disagrees with descriptor {binding.descriptor.name!r}"
                )
        self._bindings = bindings

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self._bindings))

    def __contains__(self, name: str) -> bool:
        return name in self._bindings

    def __len__(self) -> int:
        return len(self._bindings)

    def descriptor(self, name: str) -> ExpertDescriptor:
        if name not in self._bindings:
            raise UnknownExpert(name)
        return self._bindings[name].descriptor

    def describe(self, name: str) -> dict:
        return self.descriptor(name).to_dict()

    def describe_all(self) -> list[dict]:
        return [self.describe(name) for name in self.names]

    def with_expert(self, descriptor: ExpertDescriptor, fn: ExpertFn) -> "ExpertRegistry":
        """Return a copy with one more expert.  Existing names are protected."""
        if descriptor.name in self._bindings:
            raise ValueError(f"expert {descriptor.name!r} already registered")
        merged = dict(self._bindings)
        merged[descriptor.name] = ExpertBinding(descriptor, fn)
        return ExpertRegistry(merged)

    def invoke(self, name: str, args: dict) -> ContextValue:
        """Gate the arguments, run the expert, and check the output tag."""
        if name not in self._bindings:
            raise UnknownExpert(name)
        binding = self._bindings[name]
        validate_args(binding.descriptor, args)
        try:
            value = binding.fn(args)
        except (SchemaViolation, ExpertFailure):
            raise
        except JureError as exc:
            raise ExpertFailure(name, str(exc)) from exc
        if not isinstance(value, ContextValue):
            raise OutputMismatch(name, binding.descriptor.output_tag, type(value).__name__)
        if value.tag != binding.descriptor.output_tag:
            raise OutputMismatch(name, binding.descriptor.output_tag, value.tag)
        return value
