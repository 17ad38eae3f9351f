"""Shared fixtures for the test suite."""

from __future__ import annotations

import pytest

from jure.core.types import BoundingBox, EditInstance, SceneImage, SceneObject
from jure.core.scene import scene_data_uri
from jure.core.types import ImageRef
from jure.experts.reference import reference_registry
from jure.fixtures import showcase_instance


@pytest.fixture(scope="session")
def registry():
    return reference_registry()


@pytest.fixture()
def showcase() -> EditInstance:
    return showcase_instance()


def make_scene(
    objects: tuple[SceneObject, ...] = (),
    canvas: tuple[int, int] = (8, 8),
    background_label: str = "room",
    background_rgb: tuple[int, int, int] = (200, 200, 200),
    global_style: tuple[str, ...] = ("photo",),
) -> SceneImage:
    return SceneImage(
        canvas=canvas,
        objects=objects,
        background_label=background_label,
        background_rgb=background_rgb,
        global_style=global_style,
    )


def make_object(
    oid: str,
    label: str,
    box: tuple[int, int, int, int],
    rgb: tuple[int, int, int] = (100, 100, 100),
    depth: float = 0.5,
    **extra,
) -> SceneObject:
    return SceneObject(
        id=oid, label=label, bbox=BoundingBox(*box), rgb=rgb, depth=depth, **extra
    )


def ref_for(scene: SceneImage) -> ImageRef:
    return ImageRef(scene_data_uri(scene))
