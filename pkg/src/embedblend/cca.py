"""Token-wise canonical correlation between the pooled space and each
token slice of the hidden space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .embedstore import EmbeddingDataset

DEFAULT_REGULARIZATION = 1e-6


@dataclass
class CcaResult:
    max_correlation_per_token: np.ndarray
    sample_count: int
    regularization: float
    token_indices: list[int] = field(default_factory=list)
    degenerate_tokens: list[int] = field(default_factory=list)


def _inv_sqrt_cov(centered: np.ndarray, regularization: float) -> np.ndarray:
    """Inverse square root of the ridge-regularized within-set covariance.

    Returns None for an all-constant matrix (zero covariance diagonal).
    """
    n = centered.shape[0]
    cov = centered.T @ centered / (n - 1)
    mean_diag = float(np.trace(cov)) / cov.shape[0]
    if mean_diag <= 0.0:
        return None
    cov = cov + regularization * mean_diag * np.eye(cov.shape[0])
    evals, evecs = la.eigh(cov)
    evals = np.clip(evals, np.finfo(np.float64).tiny, None)
    return evecs @ ((evecs / np.sqrt(evals)).T)


def max_canonical_correlation(x, y,
                              regularization: float = DEFAULT_REGULARIZATION
                              ) -> float:
    """Largest canonical correlation between column-centered x and y.

    Whitens each set through the eigendecomposition of its ridge-
    regularized covariance and takes the top singular value of the
    cross-whitened product, clamped to [0, 1]. An all-constant input
    yields 0.0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError("inputs must be 2-d matrices")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"sample counts differ: {x.shape[0]} vs {y.shape[0]}")
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least 2 samples")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("non-finite input")
    if regularization < 0:
        raise ValueError("regularization must be nonnegative")

    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    isqrt_x = _inv_sqrt_cov(xc, regularization)
    isqrt_y = _inv_sqrt_cov(yc, regularization)
    if isqrt_x is None or isqrt_y is None:
        return 0.0
    cxy = xc.T @ yc / (n - 1)
    s = la.svdvals(isqrt_x @ cxy @ isqrt_y)
    return float(np.clip(s[0], 0.0, 1.0))


def tokenwise_cca(dataset: EmbeddingDataset, tokens=None,
                  regularization: float = DEFAULT_REGULARIZATION) -> CcaResult:
    """Max canonical correlation of the pooled space vs each token slice."""
    t_max = dataset.meta_hidden.token_count
    if tokens is None:
        tokens = range(t_max)
    tokens = [int(t) for t in tokens]
    for t in tokens:
        if not 0 <= t < t_max:
            raise ValueError(f"token {t} outside [0, {t_max})")
    correlations = np.empty(len(tokens))
    degenerate = []
    for i, t in enumerate(tokens):
        slice_t = dataset.hidden[:, t, :]
        if np.ptp(slice_t, axis=0).max(initial=0.0) == 0.0:
            correlations[i] = 0.0
            degenerate.append(t)
            continue
        correlations[i] = max_canonical_correlation(
            dataset.pooled, slice_t, regularization)
    return CcaResult(
        max_correlation_per_token=correlations,
        sample_count=dataset.n,
        regularization=regularization,
        token_indices=tokens,
        degenerate_tokens=degenerate,
    )
