"""Manifest ingestion.

A manifest is JSONL, one instance per line:

    {"id": "...", "instruction": "...", "original": <image>,
     "candidates": [{"model": "...", "image": <image>}, ...],
     "subtask": "ObjectAddition"}          # optional precomputed label

where <image> is either a URI string or {"uri": ..., "media_type": ...}.
Instances whose instruction the rule classifier cannot place (and that carry
no precomputed label) are excluded from the batch; the exclusions land in a
sidecar file next to the manifest so nothing disappears silently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from jure.core.classify import classify_instruction
from jure.core.errors import JureError
from jure.core.types import EditInstance, ImageRef, SubTask

MANIFEST_VERSION = 1

_RECORD_FIELDS = {"id", "instruction", "original", "candidates", "subtask"}
_CANDIDATE_FIELDS = {"model", "image"}


class ParseError(JureError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"manifest line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateId(JureError):
    def __init__(self, instance_id: str):
        super().__init__(f"duplicate instance id {instance_id!r}")
        self.instance_id = instance_id


@dataclass
class Manifest:
    source: Path
    instances: list[EditInstance]
    labels: dict[str, SubTask]  # instance id -> sub-task, classified or given
    excluded: list[dict] = field(default_factory=list)
    version: int = MANIFEST_VERSION


def sidecar_path(manifest_path: str | Path) -> Path:
    path = Path(manifest_path)
    return path.with_name(path.name + ".exclusions.json")


def _parse_image(raw, line: int, what: str) -> ImageRef:
    if isinstance(raw, str):
        return ImageRef(uri=raw)
    if isinstance(raw, dict):
        if set(raw) != {"uri", "media_type"}:
            raise ParseError(line, f"{what} must have exactly uri and media_type")
        return ImageRef(uri=raw["uri"], media_type=raw["media_type"])
    raise ParseError(line, f"{what} must be a URI string or an object")


def parse_record(raw: dict, line: int) -> tuple[EditInstance, SubTask | None]:
    """One manifest line to (instance, optional precomputed label)."""
    if not isinstance(raw, dict):
        raise ParseError(line, "record must be a JSON object")
    extra = set(raw) - _RECORD_FIELDS
    if extra:
        raise ParseError(line, f"unknown fields: {sorted(extra)}")
    for name in ("id", "instruction", "original", "candidates"):
        if name not in raw:
            raise ParseError(line, f"missing field {name!r}")
    if not isinstance(raw["id"], str) or not isinstance(raw["instruction"], str):
        raise ParseError(line, "id and instruction must be strings")
    if not isinstance(raw["candidates"], list) or not raw["candidates"]:
        raise ParseError(line, "candidates must be a non-empty list")
    candidates = []
    for cand in raw["candidates"]:
        if not isinstance(cand, dict) or set(cand) != _CANDIDATE_FIELDS:
            raise ParseError(line, "each candidate must have exactly model and image")
        if not isinstance(cand["model"], str):
            raise ParseError(line, "candidate model must be a string")
        candidates.append((cand["model"], _parse_image(cand["image"], line, "candidate image")))
    try:
        instance = EditInstance(
            id=raw["id"],
            instruction=raw["instruction"],
            original=_parse_image(raw["original"], line, "original"),
            candidates=tuple(candidates),
        )
    except ValueError as exc:
        raise ParseError(line, str(exc)) from exc
    label: SubTask | None = None
    if "subtask" in raw:
        try:
            label = SubTask.from_name(raw["subtask"])
        except (ValueError, TypeError) as exc:
            raise ParseError(line, str(exc)) from exc
    return instance, label


def load_manifest(path: str | Path, write_sidecar: bool = True) -> Manifest:
    """Parse, label, and filter a manifest; see the module docstring."""
    path = Path(path)
    instances: list[EditInstance] = []
    labels: dict[str, SubTask] = {}
    excluded: list[dict] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(line_no, f"not valid JSON: {exc}") from exc
            instance, label = parse_record(raw, line_no)
            if instance.id in seen:
                raise DuplicateId(instance.id)
            seen.add(instance.id)
            if label is None:
                label = classify_instruction(instance.instruction)
            if label is None:
                excluded.append(
                    {
                        "id": instance.id,
                        "instruction": instance.instruction,
                        "reason": "unclassifiable",
                    }
                )
                continue
            instances.append(instance)
            labels[instance.id] = label
    if write_sidecar:
        sidecar = sidecar_path(path)
        sidecar.write_text(json.dumps(excluded, indent=2, sort_keys=True) + "\n", "utf-8")
    return Manifest(source=path, instances=instances, labels=labels, excluded=excluded)


def dump_manifest(instances: list[EditInstance], path: str | Path) -> Path:
    """Write instances back out as manifest JSONL (test/demo helper)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for instance in instances:
            record = {
                "id": instance.id,
                "instruction": instance.instruction,
                "original": instance.original.to_dict(),
                "candidates": [
                    {"model": model, "image": image.to_dict()}
                    for model, image in instance.candidates
                ],
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    return path
