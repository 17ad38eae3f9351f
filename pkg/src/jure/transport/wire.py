"""Canonical wire encoding shared by in-process and HTTP invocation paths.

One byte convention, applied everywhere a value crosses a boundary:

* Objects serialize with keys sorted and no whitespace.
* Integers print bare; floats print with up to nine significant digits
  (trailing zeros dropped), which survives a parse/re-encode cycle
  byte-for-byte.  Values needing more than nine significant digits lose the
  excess once, on first encode.
* NaN and infinities are rejected outright.

A ContextValue crosses the wire as ``{"tag": ..., "value": ...}``.  The tag
fixes the payload type on both ends; this module is the single place that
mapping lives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from jure.core.context import (
    TAG_CHROMA,
    TAG_COMPOSITE,
    TAG_DEPTH,
    TAG_DETECTIONS,
    TAG_IMAGE_REF,
    TAG_MASKS,
    TAG_NUMBER,
    TAG_SIMILARITY,
    TAG_STYLE,
    TAG_TEXT,
    TAG_TEXT_FINDINGS,
    ContextValue,
)
from jure.core.errors import JureError
from jure.core.types import ImageRef
from jure.experts.descriptors import ExpertDescriptor, SchemaViolation
from jure.experts.reports import (
    ChromaReport,
    DepthStats,
    Detections,
    MaskSet,
    SimilarityReport,
    StyleReport,
    TextFindings,
)
from jure.maskops import BoundingBox, RleMask

MAX_BODY_BYTES = 8 * 1024 * 1024

STATUS_OK = "ok"
STATUS_SCHEMA_VIOLATION = "schema_violation"
STATUS_FAILURE = "failure"


class WireError(JureError):
    """Value cannot be carried by the canonical encoding."""


def _format_float(value: float) -> str:
    if not math.isfinite(value):
        raise WireError(f"non-finite number cannot be encoded: {value!r}")
    if value == 0.0:
        value = 0.0  # collapse -0.0, whose text form would not re-parse to itself
    return format(value, ".9g")


def canonical_dumps(obj: Any) -> str:
    """Serialize to the canonical JSON text form."""
    out: list[str] = []
    _write_canonical(obj, out)
    return "".join(out)


def _write_canonical(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, str):
        out.append(_encode_string(obj))
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _write_canonical(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise WireError(f"object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(_encode_string(key))
            out.append(":")
            _write_canonical(obj[key], out)
        out.append("}")
    else:
        raise WireError(f"type {type(obj).__name__} cannot be encoded")


_STRING_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\b": "\\b",
    "\f": "\\f",
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
}


def _encode_string(text: str) -> str:
    parts = ['"']
    for ch in text:
        if ch in _STRING_ESCAPES:
            parts.append(_STRING_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append(f"\\u{ord(ch):04x}")
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)


# --- ContextValue codec ------------------------------------------------------

_REPORT_TYPES = {
    TAG_DETECTIONS: Detections,
    TAG_MASKS: MaskSet,
    TAG_SIMILARITY: SimilarityReport,
    TAG_STYLE: StyleReport,
    TAG_CHROMA: ChromaReport,
    TAG_DEPTH: DepthStats,
    TAG_TEXT_FINDINGS: TextFindings,
    TAG_IMAGE_REF: ImageRef,
}


def wire_encode_value(value: ContextValue) -> dict:
    tag, payload = value.tag, value.value
    if tag == TAG_NUMBER:
        if isinstance(payload, bool) or not isinstance(payload, (int, float)):
            raise WireError(f"number tag carries {type(payload).__name__}")
        if isinstance(payload, float) and not math.isfinite(payload):
            raise WireError(f"non-finite number cannot be encoded: {payload!r}")
        body: Any = payload
    elif tag == TAG_TEXT:
        if not isinstance(payload, str):
            raise WireError(f"text tag carries {type(payload).__name__}")
        body = payload
    elif tag == TAG_COMPOSITE:
        if not isinstance(payload, dict):
            raise WireError(f"composite tag carries {type(payload).__name__}")
        body = {}
        for key, item in payload.items():
            if not isinstance(key, str):
                raise WireError(f"composite keys must be strings, got {key!r}")
            if not isinstance(item, ContextValue):
                raise WireError(f"composite field {key!r} is not a ContextValue")
            body[key] = wire_encode_value(item)
    else:
        expected = _REPORT_TYPES[tag]
        if not isinstance(payload, expected):
            raise WireError(
                f"{tag} tag carries {type(payload).__name__}, expected {expected.__name__}"
            )
        body = payload.to_dict()
    return {"tag": tag, "value": body}


def wire_decode_value(data: Any) -> ContextValue:
    if not isinstance(data, dict) or set(data) != {"tag", "value"}:
        raise WireError(f"malformed value envelope: {data!r}")
    tag, body = data["tag"], data["value"]
    if tag == TAG_NUMBER:
        if isinstance(body, bool) or not isinstance(body, (int, float)):
            raise WireError(f"number tag carries {type(body).__name__}")
        return ContextValue(tag, body)
    if tag == TAG_TEXT:
        if not isinstance(body, str):
            raise WireError(f"text tag carries {type(body).__name__}")
        return ContextValue(tag, body)
    if tag == TAG_COMPOSITE:
        if not isinstance(body, dict):
            raise WireError(f"composite tag carries {type(body).__name__}")
        return ContextValue(tag, {key: wire_decode_value(item) for key, item in body.items()})
    if tag in _REPORT_TYPES:
        try:
            return ContextValue(tag, _REPORT_TYPES[tag].from_dict(body))
        except (KeyError, TypeError, ValueError) as exc:
            raise WireError(f"malformed {tag} payload: {exc}") from exc
    raise WireError(f"unknown value tag: {tag!r}")


def canonical_value_bytes(value: ContextValue) -> bytes:
    """The transport-transparency surface: one byte string per value."""
    return canonical_dumps(wire_encode_value(value)).encode("utf-8")


# --- argument codec ----------------------------------------------------------

def _encode_arg(kind: str, value: Any) -> Any:
    if kind == "image":
        return value.to_dict()
    if kind == "image_list":
        return [v.to_dict() for v in value]
    if kind in ("string", "number"):
        return value
    if kind == "string_list":
        return list(value)
    if kind == "box_list":
        return [b.to_list() for b in value]
    if kind == "mask":
        return value.to_dict()
    if kind == "rgb":
        return list(value)
    if kind == "attribute_spec":
        out = {}
        if "color" in value:
            out["color"] = list(value["color"])
        if "pattern" in value:
            out["pattern"] = value["pattern"]
        return out
    raise WireError(f"unknown argument type {kind!r}")


def _decode_arg(name: str, kind: str, value: Any) -> Any:
    try:
        if kind == "image":
            return ImageRef.from_dict(value)
        if kind == "image_list":
            return [ImageRef.from_dict(v) for v in value]
        if kind in ("string", "number", "string_list"):
            return value
        if kind == "box_list":
            return [BoundingBox.from_list(b) for b in value]
        if kind == "mask":
            return RleMask.from_dict(value)
        if kind == "rgb":
            return tuple(int(c) for c in value)
        if kind == "attribute_spec":
            out = dict(value)
            if "color" in out:
                out["color"] = tuple(int(c) for c in out["color"])
            return out
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(name, f"malformed {kind} payload: {exc}") from exc
    raise SchemaViolation(name, f"unknown argument type {kind!r}")


def encode_args(descriptor: ExpertDescriptor, args: dict) -> dict:
    """Arguments as plain JSON, shaped by the descriptor's schema."""
    wire: dict = {}
    for spec in descriptor.input_schema:
        if spec.name in args and args[spec.name] is not None:
            wire[spec.name] = _encode_arg(spec.type, args[spec.name])
    unknown = set(args) - {s.name for s in descriptor.input_schema}
    if unknown:
        raise SchemaViolation(sorted(unknown)[0], "not declared in input schema")
    return wire


def decode_args(descriptor: ExpertDescriptor, wire: dict) -> dict:
    if not isinstance(wire, dict):
        raise SchemaViolation("<args>", "arguments must be an object")
    schema = {s.name: s for s in descriptor.input_schema}
    args: dict = {}
    for name, value in wire.items():
        if name not in schema:
            raise SchemaViolation(name, "not declared in input schema")
        args[name] = _decode_arg(name, schema[name].type, value)
    return args


def args_digest(descriptor: ExpertDescriptor, args: dict) -> str:
    """Canonical text of an invocation's arguments, recorded in traces."""
    return canonical_dumps(encode_args(descriptor, args))


# --- request / response envelopes --------------------------------------------

@dataclass(frozen=True)
class ExpertRequest:
    request_id: str
    expert: str
    args: dict
    deadline_ms: int | None = None

    def to_wire(self) -> dict:
        body = {"request_id": self.request_id, "expert": self.expert, "args": self.args}
        if self.deadline_ms is not None:
            body["deadline_ms"] = self.deadline_ms
        return body

    @classmethod
    def from_wire(cls, data: Any) -> "ExpertRequest":
        if not isinstance(data, dict):
            raise WireError("request body must be an object")
        extra = set(data) - {"request_id", "expert", "args", "deadline_ms"}
        if extra:
            raise WireError(f"unknown request fields: {sorted(extra)}")
        try:
            request_id, expert, args = data["request_id"], data["expert"], data["args"]
        except KeyError as exc:
            raise WireError(f"request missing field {exc.args[0]!r}") from exc
        if not isinstance(request_id, str) or not isinstance(expert, str):
            raise WireError("request_id and expert must be strings")
        if not isinstance(args, dict):
            raise WireError("args must be an object")
        deadline = data.get("deadline_ms")
        if deadline is not None and (isinstance(deadline, bool) or not isinstance(deadline, int)):
            raise WireError("deadline_ms must be an integer")
        return cls(request_id=request_id, expert=expert, args=args, deadline_ms=deadline)


@dataclass(frozen=True)
class ExpertResponse:
    request_id: str
    status: str
    value: dict | None = None
    message: str | None = None
    latency_ms: int = 0

    def __post_init__(self) -> None:
        if self.status not in (STATUS_OK, STATUS_SCHEMA_VIOLATION, STATUS_FAILURE):
            raise WireError(f"unknown response status {self.status!r}")
        if self.status == STATUS_OK and (self.value is None or self.message is not None):
            raise WireError("ok response carries exactly a value")
        if self.status != STATUS_OK and (self.message is None or self.value is not None):
            raise WireError(f"{self.status} response carries exactly a message")

    def to_wire(self) -> dict:
        body: dict = {
            "request_id": self.request_id,
            "status": self.status,
            "latency_ms": self.latency_ms,
        }
        if self.status == STATUS_OK:
            body["value"] = self.value
        else:
            body["message"] = self.message
        return body

    @classmethod
    def from_wire(cls, data: Any) -> "ExpertResponse":
        if not isinstance(data, dict):
            raise WireError("response body must be an object")
        try:
            status = data["status"]
            request_id = data["request_id"]
        except KeyError as exc:
            raise WireError(f"response missing field {exc.args[0]!r}") from exc
        latency = data.get("latency_ms", 0)
        if isinstance(latency, bool) or not isinstance(latency, int):
            raise WireError("latency_ms must be an integer")
        return cls(
            request_id=request_id,
            status=status,
            value=data.get("value"),
            message=data.get("message"),
            latency_ms=latency,
        )
