"""Scene-json codec: the canonical desk-scale image format.

Layout (UTF-8 JSON, field order irrelevant, unknown fields rejected)::

    {
      "canvas": {"w": 64, "h": 48},
      "background": {"label": "park", "rgb": [112, 176, 112]},
      "global_style": ["photo"],
      "objects": [
        {"id": "boy", "label": "boy", "bbox": [24, 16, 12, 24],
         "rgb": [210, 180, 150], "depth": 0.4,
         "style_tags": [], "text": null, "pattern": null}
      ]
    }

``text`` and ``pattern`` are optional per object.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

from jure.core.errors import SceneParseError, UnsupportedMediaType
from jure.core.types import (
    MEDIA_SCENE_JSON,
    BoundingBox,
    ImageRef,
    SceneImage,
    SceneObject,
)

_TOP_KEYS = {"canvas", "background", "global_style", "objects"}
_OBJ_KEYS = {"id", "label", "bbox", "rgb", "depth", "style_tags", "text", "pattern"}

_DATA_URI_PREFIX = "data:application/json;base64,"


def scene_to_dict(scene: SceneImage) -> dict:
    objects = []
    for obj in scene.objects:
        entry: dict = {
            "id": obj.id,
            "label": obj.label,
            "bbox": obj.bbox.to_list(),
            "rgb": list(obj.rgb),
            "depth": obj.depth,
            "style_tags": list(obj.style_tags),
        }
        if obj.text is not None:
            entry["text"] = obj.text
        if obj.pattern is not None:
            entry["pattern"] = obj.pattern
        objects.append(entry)
    return {
        "canvas": {"w": scene.canvas[0], "h": scene.canvas[1]},
        "background": {"label": scene.background_label, "rgb": list(scene.background_rgb)},
        "global_style": list(scene.global_style),
        "objects": objects,
    }


def scene_from_dict(data: dict) -> SceneImage:
    if not isinstance(data, dict):
        raise SceneParseError(f"scene document must be an object, got {type(data).__name__}")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise SceneParseError(f"unknown top-level fields: {sorted(unknown)}")
    missing = _TOP_KEYS - set(data)
    if missing:
        raise SceneParseError(f"missing top-level fields: {sorted(missing)}")

    canvas = data["canvas"]
    if not isinstance(canvas, dict) or set(canvas) != {"w", "h"}:
        raise SceneParseError(f"canvas must be an object with keys w, h: {canvas!r}")
    background = data["background"]
    if not isinstance(background, dict) or set(background) != {"label", "rgb"}:
        raise SceneParseError("background must be an object with keys label, rgb")
    if not isinstance(data["global_style"], list):
        raise SceneParseError("global_style must be a list of tags")
    if not isinstance(data["objects"], list):
        raise SceneParseError("objects must be a list")

    objects = []
    for raw in data["objects"]:
        if not isinstance(raw, dict):
            raise SceneParseError(f"object entry must be an object: {raw!r}")
        unknown = set(raw) - _OBJ_KEYS
        if unknown:
            raise SceneParseError(f"object {raw.get('id')!r}: unknown fields {sorted(unknown)}")
        try:
            objects.append(
                SceneObject(
                    id=str(raw["id"]),
                    label=str(raw["label"]),
                    bbox=BoundingBox.from_list(raw["bbox"]),
                    rgb=tuple(raw["rgb"]),
                    depth=float(raw["depth"]),
                    style_tags=tuple(raw.get("style_tags", [])),
                    text=raw.get("text"),
                    pattern=raw.get("pattern"),
                )
            )
        except KeyError as exc:
            raise SceneParseError(f"object {raw.get('id')!r}: missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise SceneParseError(f"object {raw.get('id')!r}: {exc}") from exc

    try:
        return SceneImage(
            canvas=(int(canvas["w"]), int(canvas["h"])),
            objects=tuple(objects),
            background_label=str(background["label"]),
            background_rgb=tuple(background["rgb"]),
            global_style=tuple(data["global_style"]),
        )
    except (TypeError, ValueError) as exc:
        raise SceneParseError(str(exc)) from exc


def dump_scene(scene: SceneImage, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2) + "\n", encoding="utf-8")


def load_scene(path: str | Path) -> SceneImage:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise SceneParseError(f"cannot read scene file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SceneParseError(f"invalid JSON in {path}: {exc}") from exc
    return scene_from_dict(data)


def scene_data_uri(scene: SceneImage) -> str:
    """Inline a scene as a data URI, for hermetic cross-service tests."""
    raw = json.dumps(scene_to_dict(scene), sort_keys=True).encode("utf-8")
    return _DATA_URI_PREFIX + base64.b64encode(raw).decode("ascii")


def resolve_scene(ref: ImageRef) -> SceneImage:
    """Load the scene an ImageRef points at.

    Accepts ``file://`` URIs, bare filesystem paths, and inline
    ``data:application/json;base64`` URIs. Anything that is not scene-json
    raises UnsupportedMediaType so experts can gate on media type.
    """
    if ref.media_type != MEDIA_SCENE_JSON:
        raise UnsupportedMediaType(
            f"expected media type {MEDIA_SCENE_JSON!r}, got {ref.media_type!r}"
        )
    uri = ref.uri
    if uri.startswith(_DATA_URI_PREFIX):
        try:
            raw = base64.b64decode(uri[len(_DATA_URI_PREFIX):])
            return scene_from_dict(json.loads(raw.decode("utf-8")))
        except (ValueError, UnicodeDecodeError) as exc:
            raise SceneParseError(f"invalid inline scene data: {exc}") from exc
    if uri.startswith("file://"):
        return load_scene(uri[len("file://"):])
    return load_scene(uri)
