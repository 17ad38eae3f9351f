"""Regenerates recorded_requests.jsonl, the frozen request corpus.

Run manually after a deliberate wire-format change:

    python3 tests/corpus_builder.py

The committed jsonl is the artifact under test; this script only exists so
the corpus can be rebuilt deterministically.
"""

import json
import pathlib
import random

import numpy as np

from jure_adapter.raster import MEDIA_RASTER_PNG, data_uri
from jure_adapter.service import EXPERT_NAME

SEED = 20260815
CORPUS_SIZE = 25

# RGB palette entries that contrast with each background choice.
BACKGROUNDS = {
    "white": ((255, 255, 255), ["red", "green", "blue", "yellow", "purple", "brown", "gray", "black"]),
    "off-white": ((245, 245, 245), ["red", "green", "blue", "orange", "purple", "brown", "black"]),
    "dark": ((20, 20, 20), ["red", "green", "blue", "yellow", "orange", "white", "gray"]),
}

PALETTE_RGB = {
    "black": (0, 0, 0),
    "white": (255, 255, 255),
    "gray": (128, 128, 128),
    "red": (220, 40, 40),
    "green": (40, 180, 70),
    "blue": (50, 90, 220),
    "yellow": (240, 220, 60),
    "orange": (240, 150, 50),
    "purple": (150, 60, 200),
    "brown": (140, 90, 50),
}


def _canvas(width: int, height: int, rgb) -> np.ndarray:
    img = np.zeros((height, width, 3), dtype=np.uint8)
    img[:, :] = rgb[::-1]
    return img


def _paint(img: np.ndarray, x: int, y: int, w: int, h: int, rgb) -> None:
    img[y : y + h, x : x + w] = rgb[::-1]


def build_request(index: int, rng: random.Random) -> dict:
    width = rng.randrange(48, 129)
    height = rng.randrange(48, 129)
    bg_name = rng.choice(sorted(BACKGROUNDS))
    bg_rgb, usable = BACKGROUNDS[bg_name]
    img = _canvas(width, height, bg_rgb)

    # One rectangle per quadrant keeps blobs from merging.
    quadrants = [(0, 0), (1, 0), (0, 1), (1, 1)]
    rng.shuffle(quadrants)
    painted = []
    for qx, qy in quadrants[: rng.randrange(1, 4)]:
        cell_w, cell_h = width // 2, height // 2
        rw = rng.randrange(6, max(7, cell_w - 4))
        rh = rng.randrange(6, max(7, cell_h - 4))
        x = qx * cell_w + rng.randrange(2, max(3, cell_w - rw - 1))
        y = qy * cell_h + rng.randrange(2, max(3, cell_h - rh - 1))
        label = rng.choice(usable)
        _paint(img, x, y, rw, rh, PALETTE_RGB[label])
        painted.append(label)

    args = {"image": {"uri": data_uri(img), "media_type": MEDIA_RASTER_PNG}}
    if index % 3 == 0:
        args["labels"] = sorted(set(painted))
    request = {"request_id": f"rec-{index:03d}", "expert": EXPERT_NAME, "args": args}
    if index % 4 == 0:
        request["deadline_ms"] = 5000
    return request


def main() -> None:
    rng = random.Random(SEED)
    out = pathlib.Path(__file__).with_name("recorded_requests.jsonl")
    with out.open("w", encoding="utf-8") as fh:
        for index in range(CORPUS_SIZE):
            fh.write(json.dumps(build_request(index, rng), sort_keys=True) + "\n")
    print(f"wrote {CORPUS_SIZE} requests to {out}")


if __name__ == "__main__":
    main()
