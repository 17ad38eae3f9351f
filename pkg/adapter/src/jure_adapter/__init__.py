"""Raster object-detection expert speaking the jure wire protocol."""

from jure_adapter.config import AdapterConfig, ModelLoadFailure
from jure_adapter.detector import MODEL_ID, BlobDetector, load_detector
from jure_adapter.service import DESCRIPTOR, EXPERT_NAME, AdapterHandle, adapter_serve

__all__ = [
    "AdapterConfig",
    "AdapterHandle",
    "BlobDetector",
    "DESCRIPTOR",
    "EXPERT_NAME",
    "MODEL_ID",
    "ModelLoadFailure",
    "adapter_serve",
    "load_detector",
]
