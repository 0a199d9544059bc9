"""Distances, linear interpolation, exact kNN, and pairwise percentiles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist


@dataclass(frozen=True)
class InterpolationSpec:
    """One evaluation pair: interpolate between rows a and b at ratio r."""

    index_a: int
    index_b: int
    ratio: float

    def __post_init__(self):
        if self.index_a == self.index_b:
            raise ValueError("index_a and index_b must differ")
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError(f"ratio {self.ratio} outside [0, 1]")


@dataclass(frozen=True)
class NeighborList:
    """kNN result: indices ascending by distance, ties by ascending index."""

    indices: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        if len(self.indices) != len(self.distances):
            raise ValueError("indices and distances length mismatch")


def l2_distance(x, y) -> float:
    """Euclidean distance between two equal-length vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return float(np.linalg.norm(x - y))


def interpolate(e_a, e_b, r: float) -> np.ndarray:
    """Linear interpolation r*e_a + (1-r)*e_b; r must lie in [0, 1].

    r = 1 returns e_a exactly, r = 0 returns e_b exactly.
    """
    e_a = np.asarray(e_a, dtype=np.float64)
    e_b = np.asarray(e_b, dtype=np.float64)
    if e_a.shape != e_b.shape:
        raise ValueError(f"shape mismatch: {e_a.shape} vs {e_b.shape}")
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"interpolation ratio {r} outside [0, 1]")
    if r == 1.0:
        return e_a.copy()
    if r == 0.0:
        return e_b.copy()
    return r * e_a + (1.0 - r) * e_b


def knn(query, anchors, k: int) -> NeighborList:
    """Exact k-nearest neighbors of query among anchor rows, by L2 distance.

    Ties in distance break by ascending anchor index, so results are
    deterministic regardless of anchor storage or scheduling.
    """
    query = np.asarray(query, dtype=np.float64)
    anchors = np.asarray(anchors, dtype=np.float64)
    if anchors.ndim != 2:
        raise ValueError("anchors must be a 2-d matrix")
    n = anchors.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    if query.shape != (anchors.shape[1],):
        raise ValueError(
            f"query length {query.shape} does not match anchor dim "
            f"{anchors.shape[1]}"
        )
    diffs = anchors - query
    sq = np.einsum("ij,ij->i", diffs, diffs)
    # Stable sort keeps ascending-index order among exact distance ties.
    order = np.argsort(sq, kind="stable")[:k]
    return NeighborList(indices=order, distances=np.sqrt(sq[order]))


def pairwise_percentile(points, p: float) -> float:
    """Percentile of all C(n,2) pairwise L2 distances of the point rows.

    Uses linear interpolation between closest ranks
    (index = p/100 * (m-1) on the ascending sorted distances).
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 2:
        raise ValueError("need at least 2 points")
    if not 0.0 <= p <= 100.0:
        raise ValueError(f"percentile {p} outside [0, 100]")
    return distance_percentile(pdist(points), p)


def distance_percentile(distances, p: float) -> float:
    """Linear-interpolation percentile of a multiset of distances."""
    distances = np.asarray(distances, dtype=np.float64)
    if distances.size == 0:
        raise ValueError("empty distance multiset")
    if not 0.0 <= p <= 100.0:
        raise ValueError(f"percentile {p} outside [0, 100]")
    return float(np.percentile(distances, p, method="linear"))
