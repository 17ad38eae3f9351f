"""Expert pool: descriptors, schema gate, registry, structured payloads."""

from jure.experts.descriptors import (
    ARG_TYPES,
    ArgSpec,
    ExpertDescriptor,
    SchemaViolation,
    UnknownExpert,
    validate_args,
)
from jure.experts.reference import (
    CHROMA_DESCRIPTOR,
    DEPTH_DESCRIPTOR,
    DETECTION_DESCRIPTOR,
    OCR_DESCRIPTOR,
    SEGMENTATION_DESCRIPTOR,
    SIMILARITY_DESCRIPTOR,
    STYLE_DESCRIPTOR,
    MissingTarget,
    reference_registry,
    render_depth,
)
from jure.experts.registry import ExpertBinding, ExpertFailure, ExpertRegistry, OutputMismatch
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

__all__ = [
    "ARG_TYPES",
    "ArgSpec",
    "ExpertDescriptor",
    "SchemaViolation",
    "UnknownExpert",
    "validate_args",
    "ExpertBinding",
    "ExpertFailure",
    "ExpertRegistry",
    "OutputMismatch",
    "MissingTarget",
    "reference_registry",
    "render_depth",
    "DETECTION_DESCRIPTOR",
    "SEGMENTATION_DESCRIPTOR",
    "DEPTH_DESCRIPTOR",
    "OCR_DESCRIPTOR",
    "SIMILARITY_DESCRIPTOR",
    "STYLE_DESCRIPTOR",
    "CHROMA_DESCRIPTOR",
    "Detection",
    "Detections",
    "LabeledMask",
    "MaskSet",
    "DepthStats",
    "SimilarityEntry",
    "SimilarityReport",
    "StyleReport",
    "ChromaReport",
    "TextFinding",
    "TextFindings",
]
