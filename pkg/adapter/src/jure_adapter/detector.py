"""Color-blob object detection over raster images.

The detector estimates the background as the modal border color, thresholds
the absolute per-channel difference against it, and reads connected
components as objects. Each detection is labeled with the nearest named
palette color of the blob's mean color; confidence is the blob's fill ratio
inside its own bounding box, so compact solid shapes score near 1.0 and
ragged or sparse ones lower.
"""

from __future__ import annotations

import cv2
import numpy as np

from jure_adapter.config import AdapterConfig, ModelLoadFailure

MODEL_ID = "blob-v1"

# Pixels whose max channel delta from the background exceeds this are blob
# candidates; below it they count as background texture.
COLOR_TOLERANCE = 24
MIN_BLOB_AREA = 4

_PALETTE: tuple[tuple[str, tuple[int, int, int]], ...] = (
    ("black", (0, 0, 0)),
    ("white", (255, 255, 255)),
    ("gray", (128, 128, 128)),
    ("red", (220, 40, 40)),
    ("green", (40, 180, 70)),
    ("blue", (50, 90, 220)),
    ("yellow", (240, 220, 60)),
    ("orange", (240, 150, 50)),
    ("purple", (150, 60, 200)),
    ("brown", (140, 90, 50)),
)


def palette_label(rgb: tuple[float, float, float]) -> str:
    best = None
    best_dist = None
    for name, ref in _PALETTE:
        dist = sum((a - b) ** 2 for a, b in zip(rgb, ref))
        if best_dist is None or dist < best_dist:
            best, best_dist = name, dist
    return best


def _border_mode(image_bgr: np.ndarray) -> np.ndarray:
    h, w = image_bgr.shape[:2]
    border = np.concatenate(
        [
            image_bgr[0, :].reshape(-1, 3),
            image_bgr[h - 1, :].reshape(-1, 3),
            image_bgr[:, 0].reshape(-1, 3),
            image_bgr[:, w - 1].reshape(-1, 3),
        ]
    )
    colors, counts = np.unique(border, axis=0, return_counts=True)
    return colors[int(np.argmax(counts))]


class BlobDetector:
    def __init__(self, threshold: float):
        self.threshold = threshold

    def detect(self, image_bgr: np.ndarray, labels: list[str] | None = None) -> list[dict]:
        background = _border_mode(image_bgr).astype(np.int16)
        delta = np.abs(image_bgr.astype(np.int16) - background).max(axis=2)
        foreground = (delta > COLOR_TOLERANCE).astype(np.uint8)
        count, component_map, stats, _ = cv2.connectedComponentsWithStats(
            foreground, connectivity=8
        )
        detections = []
        for i in range(1, count):
            area = int(stats[i, cv2.CC_STAT_AREA])
            if area < MIN_BLOB_AREA:
                continue
            x = int(stats[i, cv2.CC_STAT_LEFT])
            y = int(stats[i, cv2.CC_STAT_TOP])
            w = int(stats[i, cv2.CC_STAT_WIDTH])
            h = int(stats[i, cv2.CC_STAT_HEIGHT])
            confidence = round(area / float(w * h), 6)
            if confidence < self.threshold:
                continue
            mean_bgr = image_bgr[component_map == i].mean(axis=0)
            label = palette_label((mean_bgr[2], mean_bgr[1], mean_bgr[0]))
            detections.append(
                {"label": label, "bbox": [x, y, w, h], "confidence": float(confidence)}
            )
        if labels:
            wanted = set(labels)
            detections = [d for d in detections if d["label"] in wanted]
        detections.sort(key=lambda d: (-d["confidence"], d["bbox"][0], d["bbox"][1], d["label"]))
        return detections


def load_detector(config: AdapterConfig) -> BlobDetector:
    if config.model != MODEL_ID:
        raise ModelLoadFailure(config.model)
    return BlobDetector(config.threshold)
