"""Expert self-descriptions and the pre-dispatch schema gate.

Wire form::

    {"name": ..., "expertise": ...,
     "input_schema": [{"name": ..., "type": ..., "required": ...}],
     "output_schema": {"tag": ..., "description": ...}}
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from jure.core.context import ALL_TAGS
from jure.core.errors import JureError
from jure.core.types import ImageRef
from jure.maskops import BoundingBox, RleMask

# Closed set of argument types the gate understands.
ARG_TYPES = frozenset(
    {
        "image",
        "image_list",
        "string",
        "string_list",
        "box_list",
        "mask",
        "rgb",
        "attribute_spec",
        "number",
    }
)


class SchemaViolation(JureError):
    """An invocation does not satisfy the expert's input schema."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"argument {field!r}: {reason}")
        self.field = field
        self.reason = reason


class UnknownExpert(JureError):
    def __init__(self, name: str):
        super().__init__(f"no expert registered under {name!r}")
        self.name = name


@dataclass(frozen=True)
class ArgSpec:
    name: str
    type: str
    required: bool = True

    def __post_init__(self) -> None:
        if self.type not in ARG_TYPES:
            raise ValueError(f"unknown argument type {self.type!r} for {self.name!r}")

    def to_dict(self) -> dict:
        return {"name": self.name, "type": self.type, "required": self.required}

    @classmethod
    def from_dict(cls, data: dict) -> "ArgSpec":
        return cls(name=data["name"], type=data["type"], required=bool(data["required"]))


@dataclass(frozen=True)
class ExpertDescriptor:
    """Name, expertise prose, and machine-checkable input/output schemas."""

    name: str
    expertise: str
    input_schema: tuple[ArgSpec, ...]
    output_tag: str
    output_description: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("descriptor name must be non-empty")
        if self.output_tag not in ALL_TAGS:
            raise ValueError(f"unknown output tag {self.output_tag!r}")
        names = [a.name for a in self.input_schema]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate argument names in schema for {self.name!r}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "expertise": self.expertise,
            "input_schema": [a.to_dict() for a in self.input_schema],
            "output_schema": {"tag": self.output_tag, "description": self.output_description},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExpertDescriptor":
        return cls(
            name=data["name"],
            expertise=data["expertise"],
            input_schema=tuple(ArgSpec.from_dict(a) for a in data["input_schema"]),
            output_tag=data["output_schema"]["tag"],
            output_description=data["output_schema"]["description"],
        )


def _is_rgb(value: Any) -> bool:
    return (
        isinstance(value, (list, tuple))
        and len(value) == 3
        and all(isinstance(c, int) and 0 <= c <= 255 for c in value)
    )


def _check_type(spec: ArgSpec, value: Any) -> None:
    kind = spec.type
    ok = True
    if kind == "image":
        ok = isinstance(value, ImageRef)
    elif kind == "image_list":
        ok = (
            isinstance(value, (list, tuple))
            and len(value) > 0
            and all(isinstance(v, ImageRef) for v in value)
        )
    elif kind == "string":
        ok = isinstance(value, str)
    elif kind == "string_list":
        ok = isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value)
    elif kind == "box_list":
        ok = isinstance(value, (list, tuple)) and all(isinstance(v, BoundingBox) for v in value)
    elif kind == "mask":
        ok = isinstance(value, RleMask)
    elif kind == "rgb":
        ok = _is_rgb(value)
    elif kind == "attribute_spec":
        ok = (
            isinstance(value, dict)
            and set(value) <= {"color", "pattern"}
            and len(value) > 0
            and ("color" not in value or _is_rgb(value["color"]))
            and ("pattern" not in value or isinstance(value["pattern"], str))
        )
    elif kind == "number":
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    if not ok:
        raise SchemaViolation(spec.name, f"expected {kind}, got {value!r}")


def validate_args(descriptor: ExpertDescriptor, args: dict) -> None:
    """Reject an invocation before dispatch when it violates the schema."""
    if not isinstance(args, dict):
        raise SchemaViolation("<args>", f"arguments must be a mapping, got {type(args).__name__}")
    known = {a.name for a in descriptor.input_schema}
    for name in args:
        if name not in known:
            raise SchemaViolation(name, "not declared in input schema")
    for spec in descriptor.input_schema:
        if spec.name not in args or args[spec.name] is None:
            if spec.required:
                raise SchemaViolation(spec.name, "required argument missing")
            continue
        _check_type(spec, args[spec.name])
