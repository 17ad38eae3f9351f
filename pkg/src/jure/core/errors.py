"""Common exception hierarchy."""


class JureError(Exception):
    """Base class for all framework errors."""


class SceneParseError(JureError):
    """Scene document violates the scene-json schema or its invariants."""


class UnsupportedMediaType(JureError):
    """An expert received an image whose media type it cannot analyze."""
