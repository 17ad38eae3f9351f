"""Domain types shared by every other module."""

from __future__ import annotations

import enum
from dataclasses import dataclass


MEDIA_SCENE_JSON = "scene-json"
MEDIA_RASTER_PNG = "raster-png"


class SubTask(enum.Enum):
    """The nine-member editing sub-task taxonomy.

    Serialized names are part of the wire format and must stay bit-stable
    across releases.
    """

    OBJECT_ADDITION = "ObjectAddition"
    OBJECT_REPLACEMENT = "ObjectReplacement"
    OBJECT_MOVEMENT = "ObjectMovement"
    OBJECT_REMOVAL = "ObjectRemoval"
    BACKGROUND_CHANGE = "BackgroundChange"
    ATTRIBUTE_CHANGE = "AttributeChange"
    STYLE_CHANGE = "StyleChange"
    SIZE_SHAPE_MODIFICATION = "SizeShapeModification"
    PERSPECTIVE_EDITING = "PerspectiveEditing"

    @classmethod
    def from_name(cls, name: str) -> "SubTask":
        for member in cls:
            if member.value == name:
                return member
        raise ValueError(f"unknown sub-task name: {name!r}")


@dataclass(frozen=True)
class ImageRef:
    """Reference to an image, by URI plus declared media type.

    ``media_type`` is open-ended so foreign experts can declare their own
    formats; the reference experts only accept ``scene-json``.
    """

    uri: str
    media_type: str = MEDIA_SCENE_JSON

    def __post_init__(self) -> None:
        if not self.uri:
            raise ValueError("ImageRef.uri must be non-empty")
        if not self.media_type:
            raise ValueError("ImageRef.media_type must be non-empty")

    def to_dict(self) -> dict:
        return {"uri": self.uri, "media_type": self.media_type}

    @classmethod
    def from_dict(cls, data: dict) -> "ImageRef":
        return cls(uri=data["uri"], media_type=data["media_type"])


RGB = tuple[int, int, int]


def _check_rgb(rgb) -> RGB:
    if len(rgb) != 3 or any(not isinstance(c, int) or not 0 <= c <= 255 for c in rgb):
        raise ValueError(f"not an RGB triple in 0..255: {rgb!r}")
    return (rgb[0], rgb[1], rgb[2])


@dataclass(frozen=True, order=True)
class BoundingBox:
    """Axis-aligned box in canvas pixels, top-left anchored."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.x < 0 or self.y < 0:
            raise ValueError(f"box origin must be non-negative: {self}")
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box sides must be >= 1: {self}")

    @property
    def area(self) -> int:
        return self.w * self.h

    @property
    def x2(self) -> int:
        """Exclusive right edge."""
        return self.x + self.w

    @property
    def y2(self) -> int:
        """Exclusive bottom edge."""
        return self.y + self.h

    def fits_in(self, canvas: tuple[int, int]) -> bool:
        return self.x2 <= canvas[0] and self.y2 <= canvas[1]

    def intersect(self, other: "BoundingBox") -> "BoundingBox | None":
        x = max(self.x, other.x)
        y = max(self.y, other.y)
        x2 = min(self.x2, other.x2)
        y2 = min(self.y2, other.y2)
        if x2 <= x or y2 <= y:
            return None
        return BoundingBox(x, y, x2 - x, y2 - y)

    def translate(self, dx: int, dy: int) -> "BoundingBox":
        return BoundingBox(self.x + dx, self.y + dy, self.w, self.h)

    def to_list(self) -> list[int]:
        return [self.x, self.y, self.w, self.h]

    @classmethod
    def from_list(cls, xywh) -> "BoundingBox":
        if len(xywh) != 4:
            raise ValueError(f"bbox must be [x, y, w, h], got {xywh!r}")
        return cls(*(int(v) for v in xywh))


@dataclass(frozen=True)
class SceneObject:
    """One abstract object in a desk-scale scene."""

    id: str
    label: str
    bbox: BoundingBox
    rgb: RGB
    depth: float
    style_tags: tuple[str, ...] = ()
    text: str | None = None
    pattern: str | None = None

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError(f"object {self.id!r}: label must be non-empty")
        if not 0.0 <= self.depth <= 1.0:
            raise ValueError(f"object {self.id!r}: depth {self.depth} outside [0, 1]")
        _check_rgb(self.rgb)


@dataclass(frozen=True)
class SceneImage:
    """Deterministic stand-in for a raster image: a canvas of colored boxes."""

    canvas: tuple[int, int]
    objects: tuple[SceneObject, ...]
    background_label: str
    background_rgb: RGB
    global_style: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        w, h = self.canvas
        if w < 1 or h < 1:
            raise ValueError(f"canvas must be positive, got {self.canvas}")
        _check_rgb(self.background_rgb)
        seen: set[str] = set()
        for obj in self.objects:
            if obj.id in seen:
                raise ValueError(f"duplicate object id {obj.id!r}")
            seen.add(obj.id)
            if not obj.bbox.fits_in(self.canvas):
                raise ValueError(
                    f"object {obj.id!r}: bbox {obj.bbox} exceeds canvas {self.canvas}"
                )

    def find(self, object_id: str) -> SceneObject | None:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        return None


@dataclass(frozen=True)
class EditInstance:
    """One evaluation job: an instruction, the original, and candidate edits."""

    id: str
    instruction: str
    original: ImageRef
    candidates: tuple[tuple[str, ImageRef], ...]

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("EditInstance.id must be non-empty")
        if not self.instruction:
            raise ValueError("EditInstance.instruction must be non-empty")
        if not self.candidates:
            raise ValueError(f"instance {self.id!r}: candidates must be non-empty")
        names = [name for name, _ in self.candidates]
        if len(set(names)) != len(names):
            raise ValueError(f"instance {self.id!r}: duplicate candidate model names")

    @property
    def candidate_names(self) -> list[str]:
        return [name for name, _ in self.candidates]

    def candidate_image(self, name: str) -> ImageRef:
        for model, image in self.candidates:
            if model == name:
                return image
        raise KeyError(name)
