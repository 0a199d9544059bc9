"""Conversion-quality metrics: mean L2 error, neighborhood rank
correlation, and per-token dimension-wise error.

All hidden-space neighbor searches operate on row-major flattened
vectors (T*D), so distances match the flattened-space convention used
throughout the toolkit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .embedstore import EmbeddingDataset


@dataclass(frozen=True)
class RankCorrConfig:
    ell: int

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError("ell must be >= 1")


@dataclass
class EvalReport:
    l2_error_mean: float
    rank_corr: dict[int, float]
    dimensionwise_error: np.ndarray
    sample_count: int


def _check_pairs(ground_truth, estimates):
    if len(ground_truth) == 0 or len(estimates) == 0:
        raise ValueError("empty sample list")
    if len(ground_truth) != len(estimates):
        raise ValueError(
            f"{len(ground_truth)} ground-truth vs {len(estimates)} estimates"
        )
    gt = np.asarray(ground_truth, dtype=np.float64)
    est = np.asarray(estimates, dtype=np.float64)
    if gt.shape != est.shape or gt.ndim != 3:
        raise ValueError(f"shape mismatch: {gt.shape} vs {est.shape}")
    return gt, est


def l2_error(ground_truth_hidden, estimates) -> float:
    """Mean over samples of the flattened-space L2 distance gt vs estimate."""
    gt, est = _check_pairs(ground_truth_hidden, estimates)
    diffs = (gt - est).reshape(gt.shape[0], -1)
    return float(np.mean(np.linalg.norm(diffs, axis=1)))


def per_sample_l2_error(ground_truth_hidden, estimates) -> np.ndarray:
    """Flattened-space L2 distance of each (gt, estimate) pair."""
    gt, est = _check_pairs(ground_truth_hidden, estimates)
    diffs = (gt - est).reshape(gt.shape[0], -1)
    return np.linalg.norm(diffs, axis=1)


def dimensionwise_error(ground_truth_hidden, estimates) -> np.ndarray:
    """Per-token error: entry t = mean over samples of ||gt[t] - est[t]||."""
    gt, est = _check_pairs(ground_truth_hidden, estimates)
    per_token = np.linalg.norm(gt - est, axis=2)  # (samples, T)
    return per_token.mean(axis=0)


def rank_correlation_from_anchors(query_pooled, est_hidden_flat,
                                  pooled_anchors, hidden_flat_anchors,
                                  ell: int) -> float:
    """Spearman correlation of neighborhood rankings in the two spaces.

    The correlation domain is the union of the query's ell-NN set in the
    pooled space and the estimate's ell-NN set in the flattened hidden
    space. Each anchor in the union gets its global rank (average ties)
    in each space; the Spearman correlation of the two rank vectors is
    returned. Defined as 1.0 when the union is a single anchor or when
    both rank vectors are constant.
    """
    pooled_anchors = np.asarray(pooled_anchors, dtype=np.float64)
    hidden_flat_anchors = np.asarray(hidden_flat_anchors, dtype=np.float64)
    n = pooled_anchors.shape[0]
    if not 1 <= ell <= n:
        raise ValueError(f"ell={ell} outside [1, {n}]")
    q = np.asarray(query_pooled, dtype=np.float64)
    e = np.asarray(est_hidden_flat, dtype=np.float64).reshape(-1)

    d_pooled = np.linalg.norm(pooled_anchors - q, axis=1)
    d_hidden = np.linalg.norm(hidden_flat_anchors - e, axis=1)

    top_pooled = np.argsort(d_pooled, kind="stable")[:ell]
    top_hidden = np.argsort(d_hidden, kind="stable")[:ell]
    union = np.union1d(top_pooled, top_hidden)
    if union.size == 1:
        return 1.0

    ranks_pooled = rankdata(d_pooled, method="average")[union]
    ranks_hidden = rankdata(d_hidden, method="average")[union]
    same = np.array_equal(ranks_pooled, ranks_hidden)
    const_p = np.ptp(ranks_pooled) == 0
    const_h = np.ptp(ranks_hidden) == 0
    if const_p or const_h:
        return 1.0 if same else 0.0
    return float(np.corrcoef(ranks_pooled, ranks_hidden)[0, 1])


def rank_correlation(gt_pooled_query, est_hidden_query,
                     dataset: EmbeddingDataset, cfg: RankCorrConfig) -> float:
    """Dataset-level wrapper around :func:`rank_correlation_from_anchors`."""
    return rank_correlation_from_anchors(
        gt_pooled_query, est_hidden_query,
        dataset.pooled, dataset.hidden_flat, cfg.ell,
    )


def evaluate(gt_pooled_queries, ground_truth_hidden, estimates,
             dataset: EmbeddingDataset, ells) -> EvalReport:
    """Aggregate report over aligned query/gt/estimate lists."""
    gt, est = _check_pairs(ground_truth_hidden, estimates)
    queries = np.asarray(gt_pooled_queries, dtype=np.float64)
    if queries.shape[0] != gt.shape[0]:
        raise ValueError("query count does not match sample count")
    rank_corr = {}
    for ell in ells:
        vals = [
            rank_correlation_from_anchors(
                queries[i], est[i].reshape(-1),
                dataset.pooled, dataset.hidden_flat, ell)
            for i in range(gt.shape[0])
        ]
        rank_corr[int(ell)] = float(np.mean(vals))
    return EvalReport(
        l2_error_mean=l2_error(gt, est),
        rank_corr=rank_corr,
        dimensionwise_error=dimensionwise_error(gt, est),
        sample_count=int(gt.shape[0]),
    )
