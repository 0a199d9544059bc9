"""Bridge package that turns external text encoders into the embedding
files and score CSVs consumed by the evaluation toolkit."""

__version__ = "0.1.0"

from .emb1 import write_emb1, write_manifest
from .encoders import ClipEncoder, StubEncoder, UntokenizableWordError
from .export import (
    ExportJob,
    ExportResult,
    PairScores,
    export_embeddings,
    export_scores,
)
from .templates import BASE_TEMPLATES, all_templates, fill

__all__ = [
    "write_emb1", "write_manifest",
    "ClipEncoder", "StubEncoder", "UntokenizableWordError",
    "ExportJob", "ExportResult", "PairScores",
    "export_embeddings", "export_scores",
    "BASE_TEMPLATES", "all_templates", "fill",
]
