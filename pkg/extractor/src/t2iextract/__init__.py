"""Embedding-bundle producer for the t2ieval toolkit."""

__version__ = "0.1.0"

from .extract import ExtractionConfig, extract
from .synth import synthesize

__all__ = ["ExtractionConfig", "extract", "synthesize"]
