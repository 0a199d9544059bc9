"""Embedding containers and the EMB1 on-disk format.

A dataset directory holds one binary embedding file per space plus a
``manifest.json`` sidecar carrying the word list and space metadata.
Binary files are dumb float32 arrays behind a small fixed header so that
any tool in the chain can exchange them byte-exactly.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EMB1_MAGIC = b"EMB1"
EMB1_VERSION = 1
DTYPE_FLOAT32 = 1

# magic, version u32, rows u64, token_count u32, dim u32, dtype u32
_HEADER = struct.Struct("<4sIQIII")


class EmbeddingFormatError(Exception):
    """Raised when a file does not satisfy the EMB1 or manifest contract."""


@dataclass(frozen=True)
class SpaceMeta:
    """Shape metadata for one embedding space."""

    space_kind: str  # "pooled" or "hidden"
    token_count: int
    dim: int
    prompt_template: str = "a photo of a <WORD>"

    def __post_init__(self):
        if self.space_kind not in ("pooled", "hidden"):
            raise ValueError(f"unknown space kind {self.space_kind!r}")
        if self.token_count < 1 or self.dim < 1:
            raise ValueError("token_count and dim must be positive")
        if self.space_kind == "pooled" and self.token_count != 1:
            raise ValueError("pooled space requires token_count = 1")


@dataclass
class EmbeddingDataset:
    """Aligned word list with pooled (n, D) and hidden (n, T, D) embeddings.

    Immutable after construction; ``words[i]`` always indexes ``pooled[i]``
    and ``hidden[i]``.
    """

    words: list[str]
    pooled: np.ndarray
    hidden: np.ndarray
    meta_pooled: SpaceMeta
    meta_hidden: SpaceMeta
    _hidden_flat: np.ndarray | None = field(default=None, repr=False)
    _word_to_row: dict[str, int] | None = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.words)
        if len(set(self.words)) != n:
            seen, dup = set(), None
            for w in self.words:
                if w in seen:
                    dup = w
                    break
                seen.add(w)
            raise ValueError(f"duplicate word in dataset: {dup!r}")
        if self.pooled.shape != (n, self.meta_pooled.dim):
            raise ValueError(
                f"pooled shape {self.pooled.shape} does not match "
                f"{n} words x dim {self.meta_pooled.dim}"
            )
        expected = (n, self.meta_hidden.token_count, self.meta_hidden.dim)
        if self.hidden.shape != expected:
            raise ValueError(
                f"hidden shape {self.hidden.shape} does not match {expected}"
            )
        for name, arr in (("pooled", self.pooled), ("hidden", self.hidden)):
            if not np.isfinite(arr).all():
                idx = tuple(int(i) for i in np.argwhere(~np.isfinite(arr))[0])
                raise ValueError(
                    f"non-finite value in {name} at index {idx}"
                )

    @property
    def n(self) -> int:
        return len(self.words)

    @property
    def hidden_flat(self) -> np.ndarray:
        """Hidden embeddings flattened row-major to (n, T*D); cached."""
        if self._hidden_flat is None:
            n = self.hidden.shape[0]
            self._hidden_flat = np.ascontiguousarray(
                self.hidden.reshape(n, -1)
            )
        return self._hidden_flat

    def row_of(self, word: str) -> int:
        if self._word_to_row is None:
            self._word_to_row = {w: i for i, w in enumerate(self.words)}
        try:
            return self._word_to_row[word]
        except KeyError:
            raise KeyError(f"word not in dataset: {word!r}") from None


def flatten_hidden(h: np.ndarray) -> np.ndarray:
    """Flatten a (T, D) hidden-state matrix row-major into a T*D vector."""
    h = np.asarray(h)
    if h.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {h.shape}")
    if not np.isfinite(h).all():
        raise ValueError("non-finite value in hidden matrix")
    return h.reshape(-1)


def unflatten_hidden(v: np.ndarray, token_count: int, dim: int) -> np.ndarray:
    """Inverse of :func:`flatten_hidden`: recover the (T, D) matrix."""
    v = np.asarray(v)
    if v.size != token_count * dim:
        raise ValueError(
            f"length {v.size} does not factor as {token_count} x {dim}"
        )
    return v.reshape(token_count, dim)


def write_embedding_file(matrix: np.ndarray, meta: SpaceMeta, path) -> None:
    """Write a (n, T, D) tensor as an EMB1 file; byte-deterministic.

    Pooled matrices may be passed as (n, D); they are stored with T = 1.
    """
    arr = np.asarray(matrix)
    if arr.ndim == 2:
        arr = arr[:, None, :]
    if arr.ndim != 3:
        raise ValueError(f"expected (n, T, D) tensor, got shape {arr.shape}")
    n, t, d = arr.shape
    if t != meta.token_count or d != meta.dim:
        raise ValueError(
            f"tensor shape {(t, d)} does not match meta "
            f"({meta.token_count}, {meta.dim})"
        )
    if not np.isfinite(arr).all():
        raise ValueError("non-finite value in tensor")
    path = Path(path)
    header = _HEADER.pack(EMB1_MAGIC, EMB1_VERSION, n, t, d, DTYPE_FLOAT32)
    payload = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(header)
        f.write(payload)
    os.replace(tmp, path)


def read_embedding_file(path) -> tuple[np.ndarray, int, int]:
    """Read an EMB1 file; returns (values (n, T, D) float32, T, D)."""
    path = Path(path)
    with open(path, "rb") as f:
        raw = f.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise EmbeddingFormatError(f"{path}: truncated header")
        magic, version, rows, t, d, dtype = _HEADER.unpack(raw)
        if magic != EMB1_MAGIC:
            raise EmbeddingFormatError(f"{path}: bad magic {magic!r}")
        if version != EMB1_VERSION:
            raise EmbeddingFormatError(f"{path}: unsupported version {version}")
        if dtype != DTYPE_FLOAT32:
            raise EmbeddingFormatError(f"{path}: unsupported dtype code {dtype}")
        payload = f.read()
    expected = rows * t * d * 4
    if len(payload) != expected:
        raise EmbeddingFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(rows, t, d)
    return values, t, d


def write_dataset(dataset: EmbeddingDataset, directory) -> None:
    """Write a dataset directory (manifest.json + one EMB1 file per space)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_embedding_file(dataset.pooled, dataset.meta_pooled,
                         directory / "pooled.emb1")
    write_embedding_file(dataset.hidden, dataset.meta_hidden,
                         directory / "hidden.emb1")
    manifest = {
        "words": dataset.words,
        "prompt_template": dataset.meta_pooled.prompt_template,
        "spaces": [
            {"file": "pooled.emb1", "kind": "pooled",
             "token_count": 1, "dim": dataset.meta_pooled.dim},
            {"file": "hidden.emb1", "kind": "hidden",
             "token_count": dataset.meta_hidden.token_count,
             "dim": dataset.meta_hidden.dim},
        ],
    }
    tmp = directory / "manifest.json.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(manifest, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, directory / "manifest.json")


def load_dataset(directory) -> EmbeddingDataset:
    """Load and validate a dataset directory written per the EMB1 contract."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise FileNotFoundError(f"missing manifest: {manifest_path}")
    with open(manifest_path, encoding="utf-8") as f:
        try:
            manifest = json.load(f)
        except json.JSONDecodeError as exc:
            raise EmbeddingFormatError(f"{manifest_path}: {exc}") from exc
    try:
        words = list(manifest["words"])
        template = manifest["prompt_template"]
        spaces = manifest["spaces"]
    except (KeyError, TypeError) as exc:
        raise EmbeddingFormatError(
            f"{manifest_path}: missing field {exc}"
        ) from exc

    by_kind = {}
    for entry in spaces:
        by_kind[entry["kind"]] = entry
    for kind in ("pooled", "hidden"):
        if kind not in by_kind:
            raise EmbeddingFormatError(
                f"{manifest_path}: no {kind!r} space declared"
            )

    loaded = {}
    for kind in ("pooled", "hidden"):
        entry = by_kind[kind]
        file_path = directory / entry["file"]
        if not file_path.is_file():
            raise FileNotFoundError(f"missing embedding file: {file_path}")
        values, t, d = read_embedding_file(file_path)
        if t != entry["token_count"] or d != entry["dim"]:
            raise EmbeddingFormatError(
                f"{file_path}: header ({t}, {d}) disagrees with manifest "
                f"({entry['token_count']}, {entry['dim']})"
            )
        if values.shape[0] != len(words):
            raise EmbeddingFormatError(
                f"{file_path}: manifest lists {len(words)} words but file "
                f"has {values.shape[0]} rows"
            )
        loaded[kind] = (values, t, d)

    pooled, _, d_pooled = loaded["pooled"]
    hidden, t_hidden, d_hidden = loaded["hidden"]
    return EmbeddingDataset(
        words=words,
        pooled=pooled[:, 0, :],
        hidden=hidden,
        meta_pooled=SpaceMeta("pooled", 1, d_pooled, template),
        meta_hidden=SpaceMeta("hidden", t_hidden, d_hidden, template),
    )
