"""Pretrained-encoder embedding exporter for the page sampler.

Runs a contextual text encoder over each page's DOM text and a vision
transformer over each page's screenshot, then writes both modalities in
the sampler's embedding exchange format (`<stem>.ids.txt` plus raw
float32 `<stem>.f32`). The two tools share nothing but files.
"""

from .errors import AdapterError, ConfigError, ManifestError, ModelLoadError
from .extract import (AdapterConfig, extract_text_embeddings,
                      extract_visual_embeddings)

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig",
    "AdapterError",
    "ConfigError",
    "ManifestError",
    "ModelLoadError",
    "extract_text_embeddings",
    "extract_visual_embeddings",
]
