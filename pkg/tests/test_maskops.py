"""Run-length masks, box geometry, and scene cropping."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jure.core.types import BoundingBox
from jure.maskops import (
    BoxOutOfCanvas,
    CanvasMismatch,
    EmptyGrid,
    EmptyRegion,
    RleMask,
    RunSumMismatch,
    box_iou,
    crop_scene,
    mask_complement,
    mask_from_box,
    mask_union,
    rle_decode,
    rle_encode,
)
from tests.conftest import make_object, make_scene


class TestEncode:
    def test_all_zero_grid(self):
        mask = rle_encode(np.zeros((2, 2), dtype=np.uint8))
        assert mask.runs == (4,)

    def test_all_one_grid(self):
        mask = rle_encode(np.ones((2, 2), dtype=np.uint8))
        assert mask.runs == (0, 4)

    def test_empty_grid_rejected(self):
        with pytest.raises(EmptyGrid):
            rle_encode(np.zeros((0, 4), dtype=np.uint8))

    def test_one_dimensional_input_rejected(self):
        with pytest.raises(EmptyGrid):
            rle_encode(np.zeros(4, dtype=np.uint8))


class TestDecode:
    def test_all_zero(self):
        grid = rle_decode(RleMask(canvas=(2, 2), runs=(4,)))
        assert grid.tolist() == [[0, 0], [0, 0]]

    def test_hand_expanded_runs(self):
        # row-major [0,1,1,1] reshapes to 0,1 / 1,1
        grid = rle_decode(RleMask(canvas=(2, 2), runs=(1, 3)))
        assert grid.tolist() == [[0, 1], [1, 1]]

    def test_run_sum_mismatch(self):
        with pytest.raises(RunSumMismatch):
            rle_decode(RleMask(canvas=(2, 2), runs=(3,)))

    def test_interior_zero_run_rejected_at_construction(self):
        with pytest.raises(ValueError):
            RleMask(canvas=(2, 2), runs=(1, 0, 3))


@settings(max_examples=200)
@given(
    st.integers(1, 64),
    st.integers(1, 64),
    st.integers(0, 2**32 - 1),
)
def test_round_trip_random_grids(w, h, seed):
    grid = np.random.default_rng(seed).integers(0, 2, size=(h, w), dtype=np.uint8)
    again = rle_decode(rle_encode(grid))
    assert np.array_equal(again, grid)


class TestMaskFromBox:
    def test_full_canvas_box(self):
        mask = mask_from_box(BoundingBox(0, 0, 2, 2), (2, 2))
        assert mask.runs == (0, 4)

    def test_column_box(self):
        mask = mask_from_box(BoundingBox(1, 0, 1, 2), (2, 2))
        assert mask.runs == (1, 1, 1, 1)

    def test_out_of_canvas(self):
        with pytest.raises(BoxOutOfCanvas):
            mask_from_box(BoundingBox(3, 0, 1, 1), (2, 2))

    @settings(max_examples=150)
    @given(
        st.integers(0, 40), st.integers(0, 40), st.integers(1, 24), st.integers(1, 24)
    )
    def test_popcount_equals_box_area(self, x, y, w, h):
        canvas = (x + w, y + h)
        mask = mask_from_box(BoundingBox(x, y, w, h), canvas)
        assert mask.popcount == w * h


class TestComplement:
    def test_all_zero_flips_to_all_one(self):
        mask = RleMask(canvas=(2, 2), runs=(4,))
        assert mask_complement(mask).runs == (0, 4)

    def test_involution_on_box_mask(self):
        mask = mask_from_box(BoundingBox(1, 1, 2, 1), (4, 3))
        assert mask_complement(mask_complement(mask)) == mask

    @given(st.integers(1, 32), st.integers(1, 32), st.integers(0, 2**32 - 1))
    def test_involution_and_popcount_partition(self, w, h, seed):
        grid = np.random.default_rng(seed).integers(0, 2, size=(h, w), dtype=np.uint8)
        mask = rle_encode(grid)
        flipped = mask_complement(mask)
        assert mask_complement(flipped) == mask
        assert mask.popcount + flipped.popcount == w * h


class TestUnion:
    def test_union_of_disjoint_boxes(self):
        canvas = (4, 4)
        a = mask_from_box(BoundingBox(0, 0, 2, 2), canvas)
        b = mask_from_box(BoundingBox(2, 2, 2, 2), canvas)
        union = mask_union([a, b])
        assert union.popcount == 8

    def test_union_is_idempotent(self):
        mask = mask_from_box(BoundingBox(1, 0, 2, 3), (4, 4))
        assert mask_union([mask, mask]) == mask

    def test_empty_input_rejected(self):
        with pytest.raises(EmptyRegion):
            mask_union([])

    def test_canvas_mismatch(self):
        a = mask_from_box(BoundingBox(0, 0, 1, 1), (2, 2))
        b = mask_from_box(BoundingBox(0, 0, 1, 1), (3, 3))
        with pytest.raises(CanvasMismatch):
            mask_union([a, b])


class TestBoxIou:
    def test_identical(self):
        box = BoundingBox(0, 0, 3, 3)
        assert box_iou(box, box) == 1.0

    def test_disjoint(self):
        assert box_iou(BoundingBox(0, 0, 2, 2), BoundingBox(5, 5, 2, 2)) == 0.0

    def test_pixel_enumeration_oracle(self):
        # intersection 1 px, union 4 + 4 - 1 = 7 px
        value = box_iou(BoundingBox(0, 0, 2, 2), BoundingBox(1, 1, 2, 2))
        assert value == pytest.approx(1 / 7)

    @given(
        st.tuples(st.integers(0, 15), st.integers(0, 15), st.integers(1, 8), st.integers(1, 8)),
        st.tuples(st.integers(0, 15), st.integers(0, 15), st.integers(1, 8), st.integers(1, 8)),
    )
    def test_symmetric_and_bounded(self, a, b):
        box_a, box_b = BoundingBox(*a), BoundingBox(*b)
        value = box_iou(box_a, box_b)
        assert value == box_iou(box_b, box_a)
        assert 0.0 <= value <= 1.0


class TestCropScene:
    def two_object_scene(self):
        return make_scene(
            (
                make_object("a", "cat", (1, 1, 2, 2), rgb=(0, 0, 0)),
                make_object("b", "dog", (5, 5, 2, 2), rgb=(80, 40, 0)),
            ),
            canvas=(8, 8),
        )

    def test_full_canvas_box_is_identity(self):
        scene = self.two_object_scene()
        assert crop_scene(scene, BoundingBox(0, 0, 8, 8)) == scene

    def test_disjoint_box_keeps_background_only(self):
        scene = self.two_object_scene()
        cropped = crop_scene(scene, BoundingBox(3, 3, 1, 1))
        assert cropped.objects == ()
        assert cropped.background_label == scene.background_label

    def test_box_on_one_object_translates_it_to_origin(self):
        scene = self.two_object_scene()
        cropped = crop_scene(scene, BoundingBox(1, 1, 2, 2))
        assert len(cropped.objects) == 1
        kept = cropped.objects[0]
        assert kept.id == "a"
        assert kept.bbox == BoundingBox(0, 0, 2, 2)
        assert cropped.canvas == (2, 2)

    def test_mask_region_uses_tight_rectangle(self):
        scene = self.two_object_scene()
        region = mask_from_box(BoundingBox(5, 5, 2, 2), (8, 8))
        cropped = crop_scene(scene, region)
        assert [o.id for o in cropped.objects] == ["b"]

    def test_empty_mask_region_rejected(self):
        scene = self.two_object_scene()
        with pytest.raises(EmptyRegion):
            crop_scene(scene, RleMask(canvas=(8, 8), runs=(64,)))

    def test_mask_canvas_mismatch_rejected(self):
        scene = self.two_object_scene()
        with pytest.raises(CanvasMismatch):
            crop_scene(scene, RleMask(canvas=(4, 4), runs=(16,)))


def test_mask_dict_round_trip():
    mask = mask_from_box(BoundingBox(2, 1, 3, 2), (6, 4))
    assert RleMask.from_dict(mask.to_dict()) == mask
