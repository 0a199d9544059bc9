"""Toolkit for converting pooled text embeddings into per-token
hidden-state embeddings and evaluating conceptual blending in the
resulting generations."""

__version__ = "0.1.0"

from .embedstore import (
    EmbeddingDataset,
    EmbeddingFormatError,
    SpaceMeta,
    flatten_hidden,
    load_dataset,
    read_embedding_file,
    unflatten_hidden,
    write_dataset,
    write_embedding_file,
)
from .geometry import (
    InterpolationSpec,
    NeighborList,
    interpolate,
    knn,
    l2_distance,
    pairwise_percentile,
)
from .convert import (
    ConversionConfig,
    ConversionOutput,
    combine_hidden,
    convert_pooled_to_hidden,
    fit_coefficients,
)
from .evalmetrics import (
    EvalReport,
    RankCorrConfig,
    dimensionwise_error,
    l2_error,
    rank_correlation,
)
from .blend import (
    BlendConfig,
    BlendCounts,
    BoundaryModel,
    GenerationRecord,
    NonwordNeighborRecord,
    classify_presence,
    count_blend_cases,
    fit_boundary,
    nonword_neighbors,
    ratio_table,
)
from .cca import CcaResult, max_canonical_correlation, tokenwise_cca

__all__ = [
    "EmbeddingDataset", "EmbeddingFormatError", "SpaceMeta",
    "flatten_hidden", "load_dataset", "read_embedding_file",
    "unflatten_hidden", "write_dataset", "write_embedding_file",
    "InterpolationSpec", "NeighborList", "interpolate", "knn",
    "l2_distance", "pairwise_percentile",
    "ConversionConfig", "ConversionOutput", "combine_hidden",
    "convert_pooled_to_hidden", "fit_coefficients",
    "EvalReport", "RankCorrConfig", "dimensionwise_error", "l2_error",
    "rank_correlation",
    "BlendConfig", "BlendCounts", "BoundaryModel", "GenerationRecord",
    "NonwordNeighborRecord", "classify_presence", "count_blend_cases",
    "fit_boundary", "nonword_neighbors", "ratio_table",
    "CcaResult", "max_canonical_correlation", "tokenwise_cca",
]
