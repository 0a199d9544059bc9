"""Conceptual-blending detection: single-concept score boundary,
blended/mixed concept counting per image set, ratio tables, and the
nonword nearest-word protocol."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import pairwise_percentile

RATIO_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))


@dataclass
class BoundaryModel:
    """Class-conditional Gaussians plus the presence decision threshold."""

    mu_match: float
    sigma_match: float
    mu_mismatch: float
    sigma_mismatch: float
    threshold: float
    flagged: bool = False

    def __post_init__(self):
        if self.sigma_match <= 0 or self.sigma_mismatch <= 0:
            raise ValueError("sigmas must be positive")
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite")


@dataclass
class GenerationRecord:
    """Score pairs for the N images generated from one interpolated pair."""

    pair_id: str
    concept_a: str
    concept_b: str
    ratio: float
    scores: list[tuple[float, float]]

    def __post_init__(self):
        if len(self.scores) < 1:
            raise ValueError(f"{self.pair_id}: record needs >= 1 score pair")
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError(f"{self.pair_id}: ratio {self.ratio} outside [0, 1]")
        for a, b in self.scores:
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError(f"{self.pair_id}: non-finite score")


@dataclass(frozen=True)
class BlendConfig:
    n: int
    threshold: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")


@dataclass(frozen=True)
class BlendCounts:
    concept_a_detected: bool
    concept_b_detected: bool
    bcd: bool
    mcd: bool


@dataclass
class RatioRow:
    """One ratio bucket of the blend table (ratio None = overall row)."""

    ratio: float | None
    support: int
    concept_a: float | None
    concept_b: float | None
    bcd: float | None
    mcd: float | None


@dataclass
class NonwordNeighborRecord:
    nonword_id: str
    first_nn: str
    second_nn: str | None
    d1: float
    d2: float | None
    pseudo_ratio: float | None  # d1 / (d1 + d2)
    distance_ratio: float | None  # d1 / d2, alternate convention
    kept: bool
    no_eligible_second: bool = False


def _equal_density_roots(mu_match, sigma_match, mu_mismatch, sigma_mismatch):
    """Real solutions of equal class-conditional Gaussian log-densities."""
    a = 1.0 / (2 * sigma_mismatch**2) - 1.0 / (2 * sigma_match**2)
    b = mu_match / sigma_match**2 - mu_mismatch / sigma_mismatch**2
    c = (mu_mismatch**2 / (2 * sigma_mismatch**2)
         - mu_match**2 / (2 * sigma_match**2)
         + math.log(sigma_mismatch / sigma_match))
    if a == 0.0:
        if b == 0.0:
            return np.array([])
        return np.array([-c / b])
    disc = b * b - 4 * a * c
    if disc < 0:
        return np.array([])
    s = math.sqrt(disc)
    return np.sort(np.array([(-b - s) / (2 * a), (-b + s) / (2 * a)]))


def decision_threshold(mu_match, sigma_match,
                       mu_mismatch, sigma_mismatch) -> float:
    """Equal-prior Gaussian decision boundary lying between the two means.

    Equal variances give the midpoint of the means. Raises if no
    equal-density root falls between the means.
    """
    if mu_match == mu_mismatch:
        raise ValueError("class means are identical")
    if math.isclose(sigma_match, sigma_mismatch, rel_tol=1e-12):
        return 0.5 * (mu_match + mu_mismatch)
    lo, hi = sorted((mu_match, mu_mismatch))
    roots = _equal_density_roots(mu_match, sigma_match,
                                 mu_mismatch, sigma_mismatch)
    between = roots[(roots >= lo) & (roots <= hi)]
    if between.size == 0:
        raise ValueError("no equal-density root between the class means")
    return float(between[0])


def fit_boundary(matching_scores, mismatching_scores) -> BoundaryModel:
    """Fit per-class Gaussians and the equal-prior decision threshold.

    Sample standard deviations use the unbiased (n-1) form. If no
    equal-density root lies between the means, the root maximizing
    balanced accuracy on the fit data is taken and the model flagged.
    """
    match = np.asarray(matching_scores, dtype=np.float64)
    mismatch = np.asarray(mismatching_scores, dtype=np.float64)
    for name, arr in (("matching", match), ("mismatching", mismatch)):
        if arr.size < 2:
            raise ValueError(f"{name} scores need >= 2 values")
        if not np.isfinite(arr).all():
            raise ValueError(f"non-finite {name} score")
    mu_mat, sd_mat = float(match.mean()), float(match.std(ddof=1))
    mu_mis, sd_mis = float(mismatch.mean()), float(mismatch.std(ddof=1))
    if sd_mat == 0.0 or sd_mis == 0.0:
        raise ValueError("degenerate class: zero sample variance")
    if mu_mat == mu_mis:
        raise ValueError("class means are identical")

    flagged = False
    try:
        threshold = decision_threshold(mu_mat, sd_mat, mu_mis, sd_mis)
    except ValueError:
        roots = _equal_density_roots(mu_mat, sd_mat, mu_mis, sd_mis)
        candidates = list(roots) if roots.size else [0.5 * (mu_mat + mu_mis)]
        def balanced_accuracy(t):
            return 0.5 * ((match >= t).mean() + (mismatch < t).mean())
        threshold = float(max(candidates, key=balanced_accuracy))
        flagged = True
    return BoundaryModel(mu_match=mu_mat, sigma_match=sd_mat,
                         mu_mismatch=mu_mis, sigma_mismatch=sd_mis,
                         threshold=threshold, flagged=flagged)


def classify_presence(score: float, threshold: float) -> bool:
    """Concept counts as present when score >= threshold (boundary inclusive)."""
    return score >= threshold


def count_blend_cases(record: GenerationRecord,
                      cfg: BlendConfig) -> BlendCounts:
    """Count concept detections and the two blending cases for one record.

    Blended depiction requires at least n images showing both concepts
    simultaneously; mixed depiction requires at least n images showing
    each concept, not necessarily the same images.
    """
    n_images = len(record.scores)
    if cfg.n > n_images:
        raise ValueError(
            f"{record.pair_id}: n={cfg.n} exceeds image count {n_images}"
        )
    th = cfg.threshold
    a_hits = sum(classify_presence(a, th) for a, _ in record.scores)
    b_hits = sum(classify_presence(b, th) for _, b in record.scores)
    joint = sum(classify_presence(a, th) and classify_presence(b, th)
                for a, b in record.scores)
    a_det = a_hits >= cfg.n
    b_det = b_hits >= cfg.n
    return BlendCounts(
        concept_a_detected=a_det,
        concept_b_detected=b_det,
        bcd=joint >= cfg.n,
        mcd=a_det and b_det,
    )


def snap_ratio(r: float) -> float:
    """Snap an interpolation ratio to the nearest 0.1 grid point in [0.1, 0.9]."""
    snapped = round(r * 10) / 10
    return min(max(snapped, RATIO_GRID[0]), RATIO_GRID[-1])


def ratio_table(records, cfg: BlendConfig) -> list[RatioRow]:
    """Detection fractions per interpolation-ratio bucket plus overall.

    Rows cover every grid point 0.1..0.9 (empty buckets get support 0 and
    null fractions) and end with the overall row (ratio None).
    """
    records = list(records)
    if not records:
        raise ValueError("no records")
    buckets: dict[float, list[BlendCounts]] = {r: [] for r in RATIO_GRID}
    all_counts = []
    for rec in records:
        counts = count_blend_cases(rec, cfg)
        buckets[snap_ratio(rec.ratio)].append(counts)
        all_counts.append(counts)

    def row(ratio, counts):
        if not counts:
            return RatioRow(ratio, 0, None, None, None, None)
        m = len(counts)
        return RatioRow(
            ratio=ratio,
            support=m,
            concept_a=sum(c.concept_a_detected for c in counts) / m,
            concept_b=sum(c.concept_b_detected for c in counts) / m,
            bcd=sum(c.bcd for c in counts) / m,
            mcd=sum(c.mcd for c in counts) / m,
        )

    rows = [row(r, buckets[r]) for r in RATIO_GRID]
    rows.append(row(None, all_counts))
    return rows


def read_scores_csv(path, allow_ragged: bool = False) -> list[GenerationRecord]:
    """Parse the per-image scores CSV into records grouped by pair_id.

    Expected header: pair_id,concept_a,concept_b,ratio,image_index,
    score_a,score_b. N is inferred per pair and must be uniform across
    pairs unless allow_ragged is set.
    """
    path = Path(path)
    groups: dict[str, dict] = {}
    order: list[str] = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(row for row in f if not row.startswith("#"))
        required = {"pair_id", "concept_a", "concept_b", "ratio",
                    "image_index", "score_a", "score_b"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValueError(
                f"{path}: header must contain {sorted(required)}"
            )
        for line in reader:
            pid = line["pair_id"]
            if pid not in groups:
                groups[pid] = {
                    "concept_a": line["concept_a"],
                    "concept_b": line["concept_b"],
                    "ratio": float(line["ratio"]),
                    "scores": [],
                }
                order.append(pid)
            groups[pid]["scores"].append(
                (float(line["score_a"]), float(line["score_b"]))
            )
    if not groups:
        raise ValueError(f"{path}: no score rows")
    sizes = {len(g["scores"]) for g in groups.values()}
    if len(sizes) > 1 and not allow_ragged:
        raise ValueError(
            f"{path}: non-uniform image counts per pair {sorted(sizes)}; "
            "pass allow_ragged to accept"
        )
    return [
        GenerationRecord(pair_id=pid, concept_a=groups[pid]["concept_a"],
                         concept_b=groups[pid]["concept_b"],
                         ratio=groups[pid]["ratio"],
                         scores=groups[pid]["scores"])
        for pid in order
    ]


def nonword_neighbors(nonword_pooled, nonword_ids, vocab_words, vocab_pooled,
                      closeness_percentile: float = 1.0,
                      ratio_min: float = 0.4,
                      ratio_max: float = 0.6) -> list[NonwordNeighborRecord]:
    """Top-two nearest-word search with the semantic-closeness exclusion.

    The second neighbor is the nearest vocabulary word whose distance to
    the first neighbor's embedding is at least the given percentile of
    all pairwise vocabulary distances. A nonword is kept when its pseudo
    interpolation ratio d1/(d1+d2) falls inside [ratio_min, ratio_max].
    """
    vocab_pooled = np.asarray(vocab_pooled, dtype=np.float64)
    if vocab_pooled.ndim != 2 or vocab_pooled.shape[0] < 2:
        raise ValueError("vocabulary needs >= 2 words")
    if len(vocab_words) != vocab_pooled.shape[0]:
        raise ValueError("vocabulary words/embeddings length mismatch")
    if not 0.0 <= ratio_min <= ratio_max <= 1.0:
        raise ValueError("ratio bounds must satisfy 0 <= min <= max <= 1")
    nonword_pooled = np.asarray(nonword_pooled, dtype=np.float64)
    if nonword_pooled.ndim != 2:
        raise ValueError("nonword embeddings must be a (m, D) matrix")
    if len(nonword_ids) != nonword_pooled.shape[0]:
        raise ValueError("nonword ids/embeddings length mismatch")

    tau = pairwise_percentile(vocab_pooled, closeness_percentile)
    records = []
    for nid, vec in zip(nonword_ids, nonword_pooled):
        d = np.linalg.norm(vocab_pooled - vec, axis=1)
        first = int(np.argmin(d))  # argmin takes lowest index on ties
        d1 = float(d[first])
        d_to_first = np.linalg.norm(vocab_pooled - vocab_pooled[first], axis=1)
        eligible = (d_to_first >= tau) & (np.arange(len(d)) != first)
        if not eligible.any():
            records.append(NonwordNeighborRecord(
                nonword_id=nid, first_nn=vocab_words[first], second_nn=None,
                d1=d1, d2=None, pseudo_ratio=None, distance_ratio=None,
                kept=False, no_eligible_second=True))
            continue
        masked = np.where(eligible, d, np.inf)
        second = int(np.argmin(masked))
        d2 = float(d[second])
        total = d1 + d2
        pseudo = d1 / total if total > 0 else 0.0
        dist_ratio = d1 / d2 if d2 > 0 else (0.0 if d1 == 0 else math.inf)
        records.append(NonwordNeighborRecord(
            nonword_id=nid, first_nn=vocab_words[first],
            second_nn=vocab_words[second], d1=d1, d2=d2,
            pseudo_ratio=pseudo, distance_ratio=dist_ratio,
            kept=ratio_min <= pseudo <= ratio_max))
    return records
