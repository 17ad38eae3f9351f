import numpy as np
import pytest

from jure_adapter.config import AdapterConfig, ModelLoadFailure
from jure_adapter.detector import MODEL_ID, BlobDetector, load_detector, palette_label
from jure_adapter.service import adapter_serve

RED = (220, 40, 40)
GREEN = (40, 180, 70)
BLUE = (50, 90, 220)
WHITE = (255, 255, 255)
GRAY = (128, 128, 128)


def canvas(width: int, height: int, rgb=WHITE) -> np.ndarray:
    img = np.zeros((height, width, 3), dtype=np.uint8)
    img[:, :] = rgb[::-1]
    return img


def paint(img: np.ndarray, x: int, y: int, w: int, h: int, rgb) -> None:
    img[y : y + h, x : x + w] = rgb[::-1]


def paint_diagonal(img: np.ndarray, x: int, y: int, k: int, rgb) -> None:
    for i in range(k):
        img[y + i, x + i] = rgb[::-1]


class TestConfig:
    def test_defaults(self):
        cfg = AdapterConfig()
        assert cfg.model == MODEL_ID
        assert cfg.threshold == 0.5
        assert cfg.bind == "127.0.0.1:0"

    @pytest.mark.parametrize("bad", [-0.1, 1.5, 2])
    def test_threshold_out_of_range(self, bad):
        with pytest.raises(ValueError, match=r"threshold must be in \[0, 1\]"):
            AdapterConfig(threshold=bad)

    def test_empty_model_rejected(self):
        with pytest.raises(ValueError):
            AdapterConfig(model="")


class TestModelLoading:
    def test_known_model_loads(self):
        detector = load_detector(AdapterConfig())
        assert isinstance(detector, BlobDetector)
        assert detector.threshold == 0.5

    def test_unknown_model_fails(self):
        with pytest.raises(ModelLoadFailure, match="no loadable detector for model id 'yolo-x'"):
            load_detector(AdapterConfig(model="yolo-x"))

    def test_serve_refuses_unknown_model(self):
        # Load failure must surface before any socket is opened.
        with pytest.raises(ModelLoadFailure):
            adapter_serve(AdapterConfig(model="does-not-exist"))


class TestDetect:
    def test_solid_rectangle(self):
        img = canvas(64, 64)
        paint(img, 10, 12, 20, 8, RED)
        found = BlobDetector(0.5).detect(img)
        assert found == [{"label": "red", "bbox": [10, 12, 20, 8], "confidence": 1.0}]

    def test_two_rectangles_sorted_left_to_right(self):
        img = canvas(96, 48)
        paint(img, 60, 10, 12, 12, GREEN)
        paint(img, 8, 20, 12, 12, BLUE)
        found = BlobDetector(0.5).detect(img)
        assert [d["label"] for d in found] == ["blue", "green"]
        assert found[0]["bbox"] == [8, 20, 12, 12]
        assert found[1]["bbox"] == [60, 10, 12, 12]

    def test_uniform_image_has_no_detections(self):
        assert BlobDetector(0.0).detect(canvas(48, 48)) == []

    def test_tiny_speck_ignored(self):
        img = canvas(32, 32)
        paint(img, 5, 5, 3, 1, RED)
        assert BlobDetector(0.0).detect(img) == []
        paint(img, 20, 20, 2, 2, RED)
        found = BlobDetector(0.0).detect(img)
        assert found == [{"label": "red", "bbox": [20, 20, 2, 2], "confidence": 1.0}]

    def test_labels_filter(self):
        img = canvas(80, 40)
        paint(img, 5, 5, 10, 10, RED)
        paint(img, 40, 5, 10, 10, BLUE)
        detector = BlobDetector(0.5)
        assert [d["label"] for d in detector.detect(img)] == ["red", "blue"]
        assert [d["label"] for d in detector.detect(img, labels=["blue"])] == ["blue"]
        assert detector.detect(img, labels=["giraffe"]) == []
        # An empty filter is treated as no filter at all.
        assert len(detector.detect(img, labels=[])) == 2

    def test_sparse_blob_confidence_is_fill_ratio(self):
        img = canvas(40, 40)
        paint_diagonal(img, 10, 10, 8, BLUE)
        found = BlobDetector(0.0).detect(img)
        assert found == [{"label": "blue", "bbox": [10, 10, 8, 8], "confidence": 0.125}]
        assert BlobDetector(0.5).detect(img) == []

    def test_per_label_confidence_non_increasing(self):
        img = canvas(80, 40)
        paint_diagonal(img, 50, 10, 8, RED)
        paint(img, 10, 10, 8, 8, RED)
        found = BlobDetector(0.0).detect(img)
        assert [d["confidence"] for d in found] == [1.0, 0.125]
        assert all(d["label"] == "red" for d in found)

    def test_background_from_modal_border_color(self):
        # The blob touches the border; the mode over border pixels still
        # identifies gray as background.
        img = canvas(100, 60, GRAY)
        paint(img, 0, 10, 10, 10, RED)
        found = BlobDetector(0.5).detect(img)
        assert found == [{"label": "red", "bbox": [0, 10, 10, 10], "confidence": 1.0}]

    def test_near_background_shades_are_invisible(self):
        img = canvas(64, 64)
        paint(img, 10, 10, 20, 20, (240, 240, 240))
        assert BlobDetector(0.0).detect(img) == []


class TestPaletteLabel:
    @pytest.mark.parametrize(
        "rgb,expected",
        [
            ((220, 40, 40), "red"),
            ((250, 45, 45), "red"),
            ((10, 10, 10), "black"),
            ((130, 130, 130), "gray"),
            ((235, 215, 70), "yellow"),
            ((145, 85, 55), "brown"),
        ],
    )
    def test_nearest_palette_entry(self, rgb, expected):
        assert palette_label(rgb) == expected
