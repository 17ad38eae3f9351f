"""Deterministic reference experts over scene-json images.

Each expert is a pure function from validated arguments to one tagged
ContextValue.  They exist so the whole evaluation loop can run hermetically
and reproducibly; heavier perception backends plug in through the same
descriptors without touching any caller.
"""

from __future__ import annotations

import numpy as np

from jure.core.context import (
    TAG_CHROMA,
    TAG_DEPTH,
    TAG_DETECTIONS,
    TAG_MASKS,
    TAG_SIMILARITY,
    TAG_STYLE,
    TAG_TEXT_FINDINGS,
    ContextValue,
)
from jure.core.errors import JureError
from jure.core.scene import resolve_scene
from jure.core.types import RGB, SceneImage, SceneObject
from jure.experts.descriptors import ArgSpec, ExpertDescriptor, SchemaViolation
from jure.experts.registry import ExpertRegistry
from jure.experts.reports import (
    ChromaReport,
    DepthStats,
    Detection,
    Detections,
    LabeledMask,
    MaskSet,
    SimilarityEntry,
    SimilarityReport,
    StyleReport,
    TextFinding,
    TextFindings,
)
from jure.maskops import (
    BoxOutOfCanvas,
    CanvasMismatch,
    EmptyRegion,
    RleMask,
    box_iou,
    rle_decode,
    rle_encode,
)


class MissingTarget(JureError):
    """The expert needs a comparison target and none was supplied."""


# Label matching.  Exact matches compare token sets; the fallback table maps
# common aliases so "kitten" still finds a "black cat".
_SYNONYM_GROUPS = (
    frozenset({"cat", "kitten", "feline"}),
    frozenset({"dog", "puppy", "hound"}),
    frozenset({"boy", "child", "kid"}),
    frozenset({"girl", "child", "kid"}),
    frozenset({"person", "man", "woman", "human"}),
    frozenset({"sofa", "couch"}),
    frozenset({"car", "automobile", "vehicle"}),
    frozenset({"lamp", "light"}),
    frozenset({"table", "desk"}),
)


def _tokens(label: str) -> frozenset[str]:
    return frozenset(label.lower().split())


def _exact_match(query: str, label: str) -> bool:
    q, t = _tokens(query), _tokens(label)
    if not q or not t:
        return False
    return q <= t or t <= q


def _synonym_match(query: str, label: str) -> bool:
    q, t = _tokens(query), _tokens(label)
    for group in _SYNONYM_GROUPS:
        if q & group and t & group:
            return True
    return False


def _matching_objects(scene: SceneImage, query: str) -> list[tuple[SceneObject, float]]:
    """Objects matching one query label: exact hits first, then aliases."""
    hits: list[tuple[SceneObject, float]] = []
    seen: set[str] = set()
    for obj in scene.objects:
        if _exact_match(query, obj.label):
            hits.append((obj, 1.0))
            seen.add(obj.id)
    for obj in scene.objects:
        if obj.id not in seen and _synonym_match(query, obj.label):
            hits.append((obj, 0.8))
    return hits


def _normalize_tag(tag: str) -> str:
    return tag.strip().lower().replace(" ", "-")


def _scene_tags(scene: SceneImage) -> tuple[str, ...]:
    return tuple(_normalize_tag(t) for t in scene.global_style)


def _color_delta(a: RGB, b: RGB) -> float:
    """Worst-channel distance on the unit scale."""
    return max(abs(x - y) for x, y in zip(a, b)) / 255.0


def _jaccard(a: set[str], b: set[str]) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def _require(args: dict, name: str):
    value = args.get(name)
    if value is None:
        raise SchemaViolation(name, "required argument missing")
    return value


def _region_grid(region: RleMask, canvas: tuple[int, int]) -> np.ndarray:
    if region.canvas != canvas:
        raise CanvasMismatch(
            f"region canvas {region.canvas} does not match image canvas {canvas}"
        )
    if region.validate().popcount == 0:
        raise EmptyRegion("region mask selects zero pixels")
    return rle_decode(region)


def _objects_in_grid(scene: SceneImage, grid: np.ndarray | None) -> list[SceneObject]:
    if grid is None:
        return list(scene.objects)
    kept = []
    for obj in scene.objects:
        b = obj.bbox
        if grid[b.y : b.y2, b.x : b.x2].any():
            kept.append(obj)
    return kept


# --- objectDetection ---------------------------------------------------------

DETECTION_DESCRIPTOR = ExpertDescriptor(
    name="objectDetection",
    expertise=(
        "Locates objects in an image. Given label queries it returns one "
        "detection per matching object with a confidence; without queries it "
        "enumerates everything visible."
    ),
    input_schema=(
        ArgSpec("image", "image"),
        ArgSpec("labels", "string_list", required=False),
    ),
    output_tag=TAG_DETECTIONS,
    output_description="Detected objects with bounding boxes and confidences.",
)


def run_object_detection(args: dict) -> ContextValue:
    scene = resolve_scene(_require(args, "image"))
    labels = args.get("labels")
    items: list[Detection] = []
    if labels is None:
        for obj in scene.objects:
            items.append(Detection(obj.label, obj.bbox, 1.0))
    else:
        queries = list(dict.fromkeys(labels))
        for query in queries:
            for obj, confidence in _matching_objects(scene, query):
                items.append(Detection(query, obj.bbox, confidence))
    return ContextValue(TAG_DETECTIONS, Detections(tuple(items)))


# --- segmentation ------------------------------------------------------------

SEGMENTATION_DESCRIPTOR = ExpertDescriptor(
    name="segmentation",
    expertise=(
        "Turns bounding boxes into pixel masks. Each mask hugs the objects "
        "the box overlaps and falls back to the box itself over empty ground."
    ),
    input_schema=(
        ArgSpec("image", "image"),
        ArgSpec("boxes", "box_list"),
    ),
    output_tag=TAG_MASKS,
    output_description="Run-length masks on the image canvas, one per box in order.",
)


def run_segmentation(args: dict) -> ContextValue:
    scene = resolve_scene(_require(args, "image"))
    boxes = _require(args, "boxes")
    w, h = scene.canvas
    items: list[LabeledMask] = []
    for i, box in enumerate(boxes):
        if not box.fits_in(scene.canvas):
            raise BoxOutOfCanvas(f"box {box.to_list()} exceeds canvas {scene.canvas}")
        grid = np.zeros((h, w), dtype=np.uint8)
        overlapped = False
        for obj in scene.objects:
            inter = box.intersect(obj.bbox)
            if inter is not None:
                grid[inter.y : inter.y2, inter.x : inter.x2] = 1
                overlapped = True
        if not overlapped:
            grid[box.y : box.y2, box.x : box.x2] = 1
        items.append(LabeledMask(f"region-{i}", rle_encode(grid)))
    return ContextValue(TAG_MASKS, MaskSet(scene.canvas, tuple(items)))


# --- depth -------------------------------------------------------------------

DEPTH_DESCRIPTOR = ExpertDescriptor(
    name="depth",
    expertise=(
        "Estimates relative depth (0 is nearest, 1 is farthest) and summarizes "
        "it over the whole image or a region mask."
    ),
    input_schema=(
        ArgSpec("image", "image"),
        ArgSpec("region", "mask", required=False),
    ),
    output_tag=TAG_DEPTH,
    output_description="Mean, minimum, and maximum depth over the selected pixels.",
)


def render_depth(scene: SceneImage) -> np.ndarray:
    """Per-pixel depth, nearest object winning; background sits at 1.0."""
    w, h = scene.canvas
    buffer = np.full((h, w), 1.0, dtype=np.float64)
    for obj in scene.objects:
        b = obj.bbox
        window = buffer[b.y : b.y2, b.x : b.x2]
        np.minimum(window, obj.depth, out=window)
    return buffer


def run_depth(args: dict) -> ContextValue:
    scene = resolve_scene(_require(args, "image"))
    buffer = render_depth(scene)
    region = args.get("region")
    if region is None:
        selected = buffer.ravel()
    else:
        grid = _region_grid(region, scene.canvas)
        selected = buffer[grid.astype(bool)]
    lo = float(selected.min())
    hi = float(selected.max())
    # float summation can land an epsilon outside [min, max]
    mean = min(hi, max(lo, float(selected.mean())))
    stats = DepthStats(
        mean_depth=mean,
        min_depth=lo,
        max_depth=hi,
        pixel_count=int(selected.size),
    )
    return ContextValue(TAG_DEPTH, stats)


# --- ocr ---------------------------------------------------------------------

OCR_DESCRIPTOR = ExpertDescriptor(
    name="ocr",
    expertise="Reads visible text in the image and reports where it appears.",
    input_schema=(ArgSpec("image", "image"),),
    output_tag=TAG_TEXT_FINDINGS,
    output_description="Every piece of rendered text with its bounding box.",
)


def run_ocr(args: dict) -> ContextValue:
    scene = resolve_scene(_require(args, "image"))
    items = tuple(
        TextFinding(obj.text, obj.bbox) for obj in scene.objects if obj.text is not None
    )
    return ContextValue(TAG_TEXT_FINDINGS, TextFindings(items))


# --- similarity --------------------------------------------------------------

SIMILARITY_DESCRIPTOR = ExpertDescriptor(
    name="similarity",
    expertise=(
        "Compares each candidate against the original image and scores how "
        "much content changed (1 means identical), optionally restricted to a "
        "region mask. Lists the aspects that differ."
    ),
    input_schema=(
        ArgSpec("original", "image"),
        ArgSpec("candidates", "image_list"),
        ArgSpec("names", "string_list", required=False),
        ArgSpec("region", "mask", required=False),
    ),
    output_tag=TAG_SIMILARITY,
    output_description=(
        "Per-candidate similarity scores with changed aspects, one entry per "
        "candidate in submission order."
    ),
)


def _pair_similarity(
    original: SceneImage, candidate: SceneImage, grid: np.ndarray | None
) -> tuple[float, tuple[str, ...]]:
    """Distance is a sum of unit-bounded penalties, normalized by its ceiling.

    Matched objects can each contribute up to 3 (label, placement, color),
    removed or added objects 1 each, the background up to 2, global style 1.
    """
    orig_objs = {o.id: o for o in _objects_in_grid(original, grid)}
    cand_objs = {o.id: o for o in _objects_in_grid(candidate, grid)}
    matched = [oid for oid in orig_objs if oid in cand_objs]
    removed = [o for o in orig_objs.values() if o.id not in cand_objs]
    added = [o for o in cand_objs.values() if o.id not in orig_objs]

    distance = 0.0
    aspects: list[str] = []
    for obj in removed:
        distance += 1.0
        aspects.append(f"object-removed:{obj.label}")
    for obj in added:
        distance += 1.0
        aspects.append(f"object-added:{obj.label}")
    for oid in matched:
        a, b = orig_objs[oid], cand_objs[oid]
        if a.label != b.label:
            distance += 1.0
            aspects.append(f"object-label:{oid}")
        iou = box_iou(a.bbox, b.bbox)
        if iou < 1.0:
            distance += 1.0 - iou
            aspects.append(f"object-moved:{oid}")
        if a.rgb != b.rgb:
            distance += _color_delta(a.rgb, b.rgb)
            aspects.append(f"object-color:{oid}")

    if original.background_label != candidate.background_label:
        distance += 1.0
        aspects.append("background-label")
    if original.background_rgb != candidate.background_rgb:
        distance += _color_delta(original.background_rgb, candidate.background_rgb)
        aspects.append("background-color")
    style_j = _jaccard(set(_scene_tags(original)), set(_scene_tags(candidate)))
    if style_j < 1.0:
        distance += 1.0 - style_j
        aspects.append("global-style")

    ceiling = 3 * len(matched) + len(removed) + len(added) + 2 + 1
    score = 1.0 - distance / ceiling
    return min(1.0, max(0.0, score)), tuple(aspects)


def run_similarity(args: dict) -> ContextValue:
    original = resolve_scene(_require(args, "original"))
    candidates = _require(args, "candidates")
    names = args.get("names")
    if names is not None and len(names) != len(candidates):
        raise SchemaViolation("names", "must pair one name with each candidate")
    region = args.get("region")
    grid = None if region is None else _region_grid(region, original.canvas)
    entries = []
    for i, ref in enumerate(candidates):
        name = names[i] if names is not None else f"candidate-{i}"
        candidate = resolve_scene(ref)
        if candidate.canvas != original.canvas:
            raise CanvasMismatch(
                f"candidate {name!r} canvas {candidate.canvas} "
                f"does not match original {original.canvas}"
            )
        score, aspects = _pair_similarity(original, candidate, grid)
        entries.append(SimilarityEntry(name, score, aspects))
    return ContextValue(TAG_SIMILARITY, SimilarityReport(tuple(entries)))


# --- style -------------------------------------------------------------------

STYLE_DESCRIPTOR = ExpertDescriptor(
    name="style",
    expertise=(
        "Extracts the global rendering style of an image and scores agreement "
        "with a requested style or a reference image."
    ),
    input_schema=(
        ArgSpec("image", "image"),
        ArgSpec("reference", "image", required=False),
        ArgSpec("requested_style", "string", required=False),
    ),
    output_tag=TAG_STYLE,
    output_description="Observed style tags plus a [0, 1] match score.",
)


def run_style(args: dict) -> ContextValue:
    scene = resolve_scene(_require(args, "image"))
    requested = args.get("requested_style")
    reference = args.get("reference")
    if requested is None and reference is None:
        raise MissingTarget("style scoring needs requested_style or a reference image")
    target: set[str] = set()
    if requested is not None:
        target.add(_normalize_tag(requested))
    if reference is not None:
        target |= set(_scene_tags(resolve_scene(reference)))
    observed = _scene_tags(scene)
    return ContextValue(
        TAG_STYLE, StyleReport(observed, _jaccard(set(observed), target))
    )


# --- chromaPattern -----------------------------------------------------------

CHROMA_DESCRIPTOR = ExpertDescriptor(
    name="chromaPattern",
    expertise=(
        "Summarizes dominant colors and surface patterns of the image or of a "
        "region, scored against an expected color or pattern."
    ),
    input_schema=(
        ArgSpec("image", "image"),
        ArgSpec("region", "mask", required=False),
        ArgSpec("expected", "attribute_spec", required=False),
    ),
    output_tag=TAG_CHROMA,
    output_description="Dominant colors, pattern tags, and an attribute match score.",
)


def run_chroma_pattern(args: dict) -> ContextValue:
    scene = resolve_scene(_require(args, "image"))
    region = args.get("region")
    expected = args.get("expected")
    grid = None if region is None else _region_grid(region, scene.canvas)
    selected = _objects_in_grid(scene, grid)

    # Coverage = pixels of the object's box inside the region (whole box when
    # no region); ties broken by first appearance so output order is stable.
    coverage: dict[RGB, int] = {}
    order: dict[RGB, int] = {}
    for i, obj in enumerate(selected):
        b = obj.bbox
        if grid is None:
            covered = b.area
        else:
            covered = int(grid[b.y : b.y2, b.x : b.x2].sum())
        coverage[obj.rgb] = coverage.get(obj.rgb, 0) + covered
        order.setdefault(obj.rgb, i)
    dominant = tuple(sorted(coverage, key=lambda c: (-coverage[c], order[c])))
    patterns = tuple(
        dict.fromkeys(obj.pattern for obj in selected if obj.pattern is not None)
    )

    if expected is None:
        match = 1.0
    elif "color" in expected:
        want = tuple(expected["color"])
        match = 0.0 if not dominant else 1.0 - _color_delta(dominant[0], want)
    else:
        match = 1.0 if expected["pattern"] in patterns else 0.0
    return ContextValue(TAG_CHROMA, ChromaReport(dominant, patterns, match))


# --- pool --------------------------------------------------------------------

REFERENCE_EXPERTS: tuple[tuple[ExpertDescriptor, object], ...] = (
    (DETECTION_DESCRIPTOR, run_object_detection),
    (SEGMENTATION_DESCRIPTOR, run_segmentation),
    (DEPTH_DESCRIPTOR, run_depth),
    (OCR_DESCRIPTOR, run_ocr),
    (SIMILARITY_DESCRIPTOR, run_similarity),
    (STYLE_DESCRIPTOR, run_style),
    (CHROMA_DESCRIPTOR, run_chroma_pattern),
)


def reference_registry() -> ExpertRegistry:
    """Registry with the full bundled expert pool."""
    registry = ExpertRegistry()
    for descriptor, fn in REFERENCE_EXPERTS:
        registry = registry.with_expert(descriptor, fn)
    return registry
