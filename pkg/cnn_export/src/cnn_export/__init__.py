"""Penultimate-layer CNN embedding export to the FVB1 feature format."""

from .export import (
    ConfigError,
    ExportConfig,
    GoogLeNetExtractor,
    ImageError,
    StubExtractor,
    build_extractor,
    export_features,
    preprocess,
)
from .fvb import ManifestError, read_manifest_rows, write_fvb1

__version__ = "0.1.0"
