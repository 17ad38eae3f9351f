"""JURE: judgement of instruction-based image edits via routed expertise."""

__version__ = "0.1.0"
