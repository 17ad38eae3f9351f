"""Structured payloads the reference experts return."""

from __future__ import annotations

from dataclasses import dataclass

from jure.core.types import RGB, BoundingBox
from jure.maskops import RleMask


def _check_unit(value: float, what: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{what} must be within [0, 1], got {value}")


@dataclass(frozen=True)
class Detection:
    label: str
    bbox: BoundingBox
    confidence: float

    def __post_init__(self) -> None:
        _check_unit(self.confidence, "confidence")

    def to_dict(self) -> dict:
        return {"label": self.label, "bbox": self.bbox.to_list(), "confidence": self.confidence}

    @classmethod
    def from_dict(cls, data: dict) -> "Detection":
        return cls(
            label=data["label"],
            bbox=BoundingBox.from_list(data["bbox"]),
            confidence=float(data["confidence"]),
        )


@dataclass(frozen=True)
class Detections:
    items: tuple[Detection, ...] = ()

    def __post_init__(self) -> None:
        # Within one label, confidences must come out highest first.
        last: dict[str, float] = {}
        for det in self.items:
            if det.label in last and det.confidence > last[det.label]:
                raise ValueError(f"detections for label {det.label!r} not sorted by confidence")
            last[det.label] = det.confidence

    def __len__(self) -> int:
        return len(self.items)

    def labels(self) -> list[str]:
        return [d.label for d in self.items]

    def to_dict(self) -> dict:
        return {"items": [d.to_dict() for d in self.items]}

    @classmethod
    def from_dict(cls, data: dict) -> "Detections":
        return cls(items=tuple(Detection.from_dict(d) for d in data["items"]))


@dataclass(frozen=True)
class LabeledMask:
    label: str
    mask: RleMask

    def to_dict(self) -> dict:
        return {"label": self.label, "runs": list(self.mask.runs)}


@dataclass(frozen=True)
class MaskSet:
    """Pixel masks on one shared canvas, each tied to the label it answers."""

    canvas: tuple[int, int]
    items: tuple[LabeledMask, ...] = ()

    def __post_init__(self) -> None:
        for item in self.items:
            if item.mask.canvas != self.canvas:
                raise ValueError(
                    f"mask for {item.label!r} has canvas {item.mask.canvas}, "
                    f"set declares {self.canvas}"
                )
            item.mask.validate()

    def __len__(self) -> int:
        return len(self.items)

    def masks_for(self, label: str) -> list[RleMask]:
        return [item.mask for item in self.items if item.label == label]

    def to_dict(self) -> dict:
        return {"canvas": list(self.canvas), "items": [i.to_dict() for i in self.items]}

    @classmethod
    def from_dict(cls, data: dict) -> "MaskSet":
        canvas = (int(data["canvas"][0]), int(data["canvas"][1]))
        items = tuple(
            LabeledMask(label=i["label"], mask=RleMask(canvas, tuple(int(r) for r in i["runs"])))
            for i in data["items"]
        )
        return cls(canvas=canvas, items=items)


@dataclass(frozen=True)
class DepthStats:
    mean_depth: float
    min_depth: float
    max_depth: float
    pixel_count: int

    def __post_init__(self) -> None:
        if self.pixel_count < 0:
            raise ValueError("pixel_count must be >= 0")
        if self.pixel_count > 0 and not (self.min_depth <= self.mean_depth <= self.max_depth):
            raise ValueError(
                f"depth stats out of order: min {self.min_depth}, "
                f"mean {self.mean_depth}, max {self.max_depth}"
            )

    def to_dict(self) -> dict:
        return {
            "mean_depth": self.mean_depth,
            "min_depth": self.min_depth,
            "max_depth": self.max_depth,
            "pixel_count": self.pixel_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DepthStats":
        return cls(
            mean_depth=float(data["mean_depth"]),
            min_depth=float(data["min_depth"]),
            max_depth=float(data["max_depth"]),
            pixel_count=int(data["pixel_count"]),
        )


@dataclass(frozen=True)
class SimilarityEntry:
    candidate: str
    score: float
    changed_aspects: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        _check_unit(self.score, "similarity score")

    def to_dict(self) -> dict:
        return {
            "candidate": self.candidate,
            "score": self.score,
            "changed_aspects": list(self.changed_aspects),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimilarityEntry":
        return cls(
            candidate=data["candidate"],
            score=float(data["score"]),
            changed_aspects=tuple(data["changed_aspects"]),
        )


@dataclass(frozen=True)
class SimilarityReport:
    entries: tuple[SimilarityEntry, ...]

    def entry_for(self, candidate: str) -> SimilarityEntry | None:
        for entry in self.entries:
            if entry.candidate == candidate:
                return entry
        return None

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, data: dict) -> "SimilarityReport":
        return cls(entries=tuple(SimilarityEntry.from_dict(e) for e in data["entries"]))


@dataclass(frozen=True)
class StyleReport:
    style_tags: tuple[str, ...]
    match_score: float

    def __post_init__(self) -> None:
        _check_unit(self.match_score, "match_score")

    def to_dict(self) -> dict:
        return {"style_tags": list(self.style_tags), "match_score": self.match_score}

    @classmethod
    def from_dict(cls, data: dict) -> "StyleReport":
        return cls(style_tags=tuple(data["style_tags"]), match_score=float(data["match_score"]))


@dataclass(frozen=True)
class ChromaReport:
    dominant_colors: tuple[RGB, ...]
    pattern_tags: tuple[str, ...]
    attribute_match: float

    def __post_init__(self) -> None:
        _check_unit(self.attribute_match, "attribute_match")

    def to_dict(self) -> dict:
        return {
            "dominant_colors": [list(c) for c in self.dominant_colors],
            "pattern_tags": list(self.pattern_tags),
            "attribute_match": self.attribute_match,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChromaReport":
        return cls(
            dominant_colors=tuple(tuple(c) for c in data["dominant_colors"]),
            pattern_tags=tuple(data["pattern_tags"]),
            attribute_match=float(data["attribute_match"]),
        )


@dataclass(frozen=True)
class TextFinding:
    text: str
    bbox: BoundingBox

    def to_dict(self) -> dict:
        return {"text": self.text, "bbox": self.bbox.to_list()}

    @classmethod
    def from_dict(cls, data: dict) -> "TextFinding":
        return cls(text=data["text"], bbox=BoundingBox.from_list(data["bbox"]))


@dataclass(frozen=True)
class TextFindings:
    items: tuple[TextFinding, ...] = ()

    def to_dict(self) -> dict:
        return {"items": [f.to_dict() for f in self.items]}

    @classmethod
    def from_dict(cls, data: dict) -> "TextFindings":
        return cls(items=tuple(TextFinding.from_dict(f) for f in data["items"]))
