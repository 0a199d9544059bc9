"""Export jobs: embedding dumps and template-averaged score CSVs."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .emb1 import write_emb1, write_manifest
from .encoders import Encoder, UntokenizableWordError
from .templates import fill


@dataclass
class ExportJob:
    words: list[str]
    prompt_template: str
    output_dir: Path
    encoder: Encoder
    batch_size: int = 64

    def __post_init__(self):
        if not self.words:
            raise ValueError("empty word list")
        if len(set(self.words)) != len(self.words):
            raise ValueError("duplicate word in export list")
        self.output_dir = Path(self.output_dir)


@dataclass
class ExportResult:
    exported_words: list[str]
    skipped_words: list[str] = field(default_factory=list)


def export_embeddings(job: ExportJob) -> ExportResult:
    """Encode every word and write pooled.emb1, hidden.emb1, manifest.json.

    Words the encoder cannot tokenize are skipped and reported; the
    emitted files always satisfy the consumer's alignment invariants.
    """
    pooled_rows, hidden_rows, exported, skipped = [], [], [], []
    for word in job.words:
        prompt = fill(job.prompt_template, word)
        try:
            pooled, hidden = job.encoder.encode(prompt)
        except UntokenizableWordError:
            skipped.append(word)
            continue
        pooled_rows.append(np.asarray(pooled, dtype=np.float32))
        hidden_rows.append(np.asarray(hidden, dtype=np.float32))
        exported.append(word)
    if not exported:
        raise ValueError("no word could be encoded")

    job.output_dir.mkdir(parents=True, exist_ok=True)
    write_emb1(np.stack(pooled_rows), job.output_dir / "pooled.emb1")
    write_emb1(np.stack(hidden_rows), job.output_dir / "hidden.emb1")
    write_manifest(exported, job.prompt_template,
                   token_count=job.encoder.token_count,
                   dim=job.encoder.dim,
                   path=job.output_dir / "manifest.json")
    return ExportResult(exported_words=exported, skipped_words=skipped)


@dataclass
class PairScores:
    """Raw per-template scores for the images generated from one pair.

    ``template_scores_a[i][j]`` is the image-i, template-j score against
    concept A; the exported score is the mean over templates.
    """

    pair_id: str
    concept_a: str
    concept_b: str
    ratio: float
    template_scores_a: list[list[float]]
    template_scores_b: list[list[float]]

    def __post_init__(self):
        if len(self.template_scores_a) != len(self.template_scores_b):
            raise ValueError(f"{self.pair_id}: image count mismatch")
        if not self.template_scores_a:
            raise ValueError(f"{self.pair_id}: no images")


def export_scores(pairs: list[PairScores], path) -> None:
    """Write the per-image averaged scores CSV the blend tools consume."""
    if not pairs:
        raise ValueError("no score records")
    lines = ["pair_id,concept_a,concept_b,ratio,image_index,score_a,score_b"]
    for pair in pairs:
        for i, (ts_a, ts_b) in enumerate(zip(pair.template_scores_a,
                                             pair.template_scores_b)):
            score_a = float(np.mean(ts_a))
            score_b = float(np.mean(ts_b))
            lines.append(f"{pair.pair_id},{pair.concept_a},{pair.concept_b},"
                         f"{pair.ratio!r},{i},{score_a!r},{score_b!r}")
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
