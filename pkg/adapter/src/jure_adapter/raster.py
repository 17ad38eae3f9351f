"""Raster image loading for the detection service.

Accepted references carry media type ``raster-png`` and point at a PNG via an
inline ``data:image/png;base64`` URI, a ``file://`` URI, or a bare path.
"""

from __future__ import annotations

import base64
from pathlib import Path

import cv2
import numpy as np

from jure_adapter.config import AdapterError

MEDIA_RASTER_PNG = "raster-png"

_DATA_URI_PREFIX = "data:image/png;base64,"


class UnsupportedMediaType(AdapterError):
    def __init__(self, got: str):
        super().__init__(
            f"unsupported media type {got!r}, expected {MEDIA_RASTER_PNG!r}"
        )
        self.got = got


class RasterDecodeFailure(AdapterError):
    """The reference resolved to bytes that are not a decodable PNG."""


def png_bytes(image_bgr: np.ndarray) -> bytes:
    ok, encoded = cv2.imencode(".png", image_bgr)
    if not ok:
        raise RasterDecodeFailure("cannot encode image as PNG")
    return encoded.tobytes()


def data_uri(image_bgr: np.ndarray) -> str:
    return _DATA_URI_PREFIX + base64.b64encode(png_bytes(image_bgr)).decode("ascii")


def load_raster(uri: str, media_type: str) -> np.ndarray:
    """Resolve an image reference to a BGR pixel array."""
    if media_type != MEDIA_RASTER_PNG:
        raise UnsupportedMediaType(media_type)
    if uri.startswith(_DATA_URI_PREFIX):
        try:
            raw = base64.b64decode(uri[len(_DATA_URI_PREFIX):], validate=True)
        except (ValueError, TypeError) as exc:
            raise RasterDecodeFailure(f"invalid base64 image data: {exc}") from exc
    else:
        path = uri[len("file://"):] if uri.startswith("file://") else uri
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise RasterDecodeFailure(f"cannot read image file: {exc}") from exc
    pixels = cv2.imdecode(np.frombuffer(raw, dtype=np.uint8), cv2.IMREAD_COLOR)
    if pixels is None:
        raise RasterDecodeFailure("bytes do not decode as a PNG image")
    return pixels
