"""Pooled-to-hidden conversion: kNN in the pooled space, intercept-free
least-squares coefficients, linear combination in the hidden space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedstore import EmbeddingDataset
from .geometry import knn

DEFAULT_RCOND = 1e-10


@dataclass(frozen=True)
class ConversionConfig:
    k: int
    solver_rcond: float = DEFAULT_RCOND

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.solver_rcond <= 0:
            raise ValueError("solver_rcond must be positive")


@dataclass
class ConversionOutput:
    """Result of converting one pooled query into the hidden space."""

    neighbor_indices: np.ndarray
    coefficients: np.ndarray
    estimated_hidden: np.ndarray
    residual_norm: float
    degenerate: bool = field(default=False)


def fit_coefficients(query_pooled, neighbor_pooled,
                     rcond: float = DEFAULT_RCOND):
    """Minimum-norm least-squares fit of query as a combination of neighbors.

    Solves min_a ||query - sum_i a_i * neighbor_i||_2 with no intercept.
    Returns (coefficients (k,), residual_norm). All-zero neighbors give
    zero coefficients and residual ||query||.
    """
    q = np.asarray(query_pooled, dtype=np.float64)
    neighbors = np.asarray(neighbor_pooled, dtype=np.float64)
    if neighbors.ndim != 2:
        raise ValueError("neighbors must be a (k, D) matrix")
    if q.shape != (neighbors.shape[1],):
        raise ValueError(
            f"query dim {q.shape} does not match neighbor dim "
            f"{neighbors.shape[1]}"
        )
    coeffs, _, _, _ = np.linalg.lstsq(neighbors.T, q, rcond=rcond)
    residual = float(np.linalg.norm(q - neighbors.T @ coeffs))
    return coeffs, residual


def combine_hidden(coefficients, neighbor_hidden) -> np.ndarray:
    """Linear combination sum_i a_i * hidden_i over a (k, T, D) tensor."""
    coeffs = np.asarray(coefficients, dtype=np.float64)
    hidden = np.asarray(neighbor_hidden, dtype=np.float64)
    if hidden.ndim != 3:
        raise ValueError("neighbor_hidden must be a (k, T, D) tensor")
    if coeffs.shape != (hidden.shape[0],):
        raise ValueError(
            f"{coeffs.shape[0]} coefficients for {hidden.shape[0]} neighbors"
        )
    return np.einsum("k,ktd->td", coeffs, hidden)


def convert_pooled_to_hidden(query_pooled, dataset: EmbeddingDataset,
                             cfg: ConversionConfig) -> ConversionOutput:
    """Full pipeline: kNN in pooled space, fit coefficients, combine hidden.

    Neighbor order in the output follows ascending pooled distance.
    """
    if cfg.k > dataset.n:
        raise ValueError(f"k={cfg.k} exceeds anchor count {dataset.n}")
    q = np.asarray(query_pooled, dtype=np.float64)
    neighbors = knn(q, dataset.pooled, cfg.k)
    neighbor_pooled = dataset.pooled[neighbors.indices].astype(np.float64)
    coeffs, residual = fit_coefficients(q, neighbor_pooled, cfg.solver_rcond)
    estimated = combine_hidden(coeffs, dataset.hidden[neighbors.indices])
    degenerate = bool(not neighbor_pooled.any() and q.any())
    return ConversionOutput(
        neighbor_indices=neighbors.indices,
        coefficients=coeffs,
        estimated_hidden=estimated,
        residual_norm=residual,
        degenerate=degenerate,
    )
