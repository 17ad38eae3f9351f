"""Run-length-encoded masks, box geometry, and scene cropping.

The RLE convention is fixed bit-exactly so chained experts never disagree on
mask layout: runs are alternating counts of 0s then 1s over the row-major
flattening of the canvas, starting with the count of 0s. A leading 0 is the
only permitted zero-length run (it marks a mask that starts with a 1).

Wire form: ``{"canvas": [w, h], "runs": [...]}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from jure.core.errors import JureError
from jure.core.types import BoundingBox, SceneImage

__all__ = [
    "BoundingBox",
    "RleMask",
    "EmptyGrid",
    "RunSumMismatch",
    "BoxOutOfCanvas",
    "EmptyRegion",
    "CanvasMismatch",
    "rle_encode",
    "rle_decode",
    "mask_from_box",
    "mask_complement",
    "mask_union",
    "crop_scene",
    "box_iou",
]


class EmptyGrid(JureError):
    """Grid with no pixels cannot be encoded."""


class RunSumMismatch(JureError):
    """Run lengths do not cover the canvas exactly."""


class BoxOutOfCanvas(JureError):
    """Box extends beyond the canvas it is interpreted against."""


class EmptyRegion(JureError):
    """Region selects zero pixels."""


class CanvasMismatch(JureError):
    """Operands carry different canvas dimensions."""


@dataclass(frozen=True)
class RleMask:
    """Binary mask as zero-first run lengths over a row-major canvas."""

    canvas: tuple[int, int]
    runs: tuple[int, ...]

    def __post_init__(self) -> None:
        w, h = self.canvas
        if w < 1 or h < 1:
            raise ValueError(f"mask canvas must be positive, got {self.canvas}")
        if not self.runs:
            raise ValueError("runs must be non-empty")
        for i, run in enumerate(self.runs):
            if not isinstance(run, int) or run < 0:
                raise ValueError(f"run {i} must be a non-negative integer, got {run!r}")
            if run == 0 and i > 0:
                raise ValueError(f"interior zero-length run at index {i}")

    @property
    def area(self) -> int:
        return self.canvas[0] * self.canvas[1]

    @property
    def popcount(self) -> int:
        """Number of set pixels: the sum of every second run (the 1-runs)."""
        return sum(self.runs[1::2])

    def validate(self) -> "RleMask":
        if sum(self.runs) != self.area:
            raise RunSumMismatch(
                f"runs cover {sum(self.runs)} pixels, canvas has {self.area}"
            )
        return self

    def to_dict(self) -> dict:
        return {"canvas": list(self.canvas), "runs": list(self.runs)}

    @classmethod
    def from_dict(cls, data: dict) -> "RleMask":
        canvas = data["canvas"]
        return cls(canvas=(int(canvas[0]), int(canvas[1])), runs=tuple(int(r) for r in data["runs"]))


Region = Union[BoundingBox, RleMask]


def rle_encode(grid) -> RleMask:
    """Encode a row-major bit grid (shape h x w) into canonical runs."""
    arr = np.asarray(grid)
    if arr.ndim != 2 or arr.size == 0:
        raise EmptyGrid(f"expected a non-empty 2-D grid, got shape {arr.shape}")
    flat = (arr.reshape(-1) != 0).astype(np.uint8)
    changes = np.flatnonzero(np.diff(flat)) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0] == 1:
        runs = [0] + runs
    h, w = arr.shape
    return RleMask(canvas=(int(w), int(h)), runs=tuple(int(r) for r in runs))


def rle_decode(mask: RleMask) -> np.ndarray:
    """Expand a mask into its h x w uint8 grid."""
    mask.validate()
    w, h = mask.canvas
    values = np.zeros(len(mask.runs), dtype=np.uint8)
    values[1::2] = 1
    flat = np.repeat(values, mask.runs)
    return flat.reshape(h, w)


def mask_from_box(box: BoundingBox, canvas: tuple[int, int]) -> RleMask:
    """Mask that is 1 exactly on the box pixels."""
    if not box.fits_in(canvas):
        raise BoxOutOfCanvas(f"box {box} does not fit canvas {canvas}")
    w, h = canvas
    grid = np.zeros((h, w), dtype=np.uint8)
    grid[box.y:box.y2, box.x:box.x2] = 1
    return rle_encode(grid)


def mask_complement(mask: RleMask) -> RleMask:
    """Flip every pixel. Swapping the zero/one roles of the runs does it:
    strip the leading zero-count if it is 0, otherwise prepend one."""
    mask.validate()
    if mask.runs[0] == 0:
        runs = mask.runs[1:]
    else:
        runs = (0,) + mask.runs
    return RleMask(canvas=mask.canvas, runs=runs)


def mask_union(masks: list[RleMask]) -> RleMask:
    if not masks:
        raise EmptyRegion("union of zero masks")
    canvas = masks[0].canvas
    acc = np.zeros((canvas[1], canvas[0]), dtype=np.uint8)
    for mask in masks:
        if mask.canvas != canvas:
            raise CanvasMismatch(f"mask canvas {mask.canvas} != {canvas}")
        acc |= rle_decode(mask)
    return rle_encode(acc)


def box_iou(a: BoundingBox, b: BoundingBox) -> float:
    inter = a.intersect(b)
    if inter is None:
        return 0.0
    union = a.area + b.area - inter.area
    return inter.area / union


def _region_tight_box(region: Region, canvas: tuple[int, int]) -> tuple[BoundingBox, np.ndarray | None]:
    """Resolve a region to (tight bounding rectangle, optional pixel grid)."""
    if isinstance(region, BoundingBox):
        if not region.fits_in(canvas):
            raise BoxOutOfCanvas(f"box {region} does not fit canvas {canvas}")
        return region, None
    if region.canvas != canvas:
        raise CanvasMismatch(f"mask canvas {region.canvas} != scene canvas {canvas}")
    grid = rle_decode(region)
    rows = np.flatnonzero(grid.any(axis=1))
    cols = np.flatnonzero(grid.any(axis=0))
    if rows.size == 0:
        raise EmptyRegion("mask selects zero pixels")
    tight = BoundingBox(
        x=int(cols[0]),
        y=int(rows[0]),
        w=int(cols[-1] - cols[0] + 1),
        h=int(rows[-1] - rows[0] + 1),
    )
    return tight, grid


def _object_in_region(bbox: BoundingBox, tight: BoundingBox, grid: np.ndarray | None) -> bool:
    clipped = bbox.intersect(tight)
    if clipped is None:
        return False
    if grid is None:
        return True
    return bool(grid[clipped.y:clipped.y2, clipped.x:clipped.x2].any())


def crop_scene(scene: SceneImage, region: Region) -> SceneImage:
    """Crop a scene to a region's tight bounding rectangle.

    Keeps every object whose bbox intersects the region, clipping and
    translating its bbox to the new origin. Background and global style
    carry over unchanged.
    """
    tight, grid = _region_tight_box(region, scene.canvas)
    kept = []
    for obj in scene.objects:
        if not _object_in_region(obj.bbox, tight, grid):
            continue
        clipped = obj.bbox.intersect(tight)
        assert clipped is not None
        kept.append(
            type(obj)(
                id=obj.id,
                label=obj.label,
                bbox=clipped.translate(-tight.x, -tight.y),
                rgb=obj.rgb,
                depth=obj.depth,
                style_tags=obj.style_tags,
                text=obj.text,
                pattern=obj.pattern,
            )
        )
    return SceneImage(
        canvas=(tight.w, tight.h),
        objects=tuple(kept),
        background_label=scene.background_label,
        background_rgb=scene.background_rgb,
        global_style=scene.global_style,
    )
