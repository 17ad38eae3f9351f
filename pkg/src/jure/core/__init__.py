from jure.core.classify import classify_instruction
from jure.core.context import ContextStore, ContextValue, DuplicateKey
from jure.core.errors import JureError, SceneParseError, UnsupportedMediaType
from jure.core.scene import load_scene, resolve_scene, scene_data_uri, scene_from_dict, scene_to_dict
from jure.core.trace import (
    EXPERT_NONE,
    JournalParseError,
    NonMonotonicIteration,
    RoutingStep,
    RoutingTrace,
    Termination,
    TraceJournal,
    replay_journal,
)
from jure.core.types import (
    MEDIA_RASTER_PNG,
    MEDIA_SCENE_JSON,
    BoundingBox,
    EditInstance,
    ImageRef,
    SceneImage,
    SceneObject,
    SubTask,
)

__all__ = [
    "classify_instruction",
    "ContextStore",
    "ContextValue",
    "DuplicateKey",
    "JureError",
    "SceneParseError",
    "UnsupportedMediaType",
    "load_scene",
    "resolve_scene",
    "scene_data_uri",
    "scene_from_dict",
    "scene_to_dict",
    "EXPERT_NONE",
    "JournalParseError",
    "NonMonotonicIteration",
    "RoutingStep",
    "RoutingTrace",
    "Termination",
    "TraceJournal",
    "replay_journal",
    "MEDIA_RASTER_PNG",
    "MEDIA_SCENE_JSON",
    "BoundingBox",
    "EditInstance",
    "ImageRef",
    "SceneImage",
    "SceneObject",
    "SubTask",
]
