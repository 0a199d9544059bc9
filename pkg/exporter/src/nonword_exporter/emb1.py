"""Writer for the EMB1 binary embedding format and its manifest sidecar.

Implements the consumer toolkit's published file contract: magic "EMB1",
u32 version 1, u64 rows, u32 token_count, u32 dim, u32 dtype code
(1 = float32), then row-major little-endian float32 payload.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

MAGIC = b"EMB1"
VERSION = 1
DTYPE_FLOAT32 = 1

_HEADER = struct.Struct("<4sIQIII")


def write_emb1(matrix: np.ndarray, path) -> None:
    """Write a (n, T, D) tensor; output bytes depend only on the values."""
    arr = np.asarray(matrix)
    if arr.ndim == 2:
        arr = arr[:, None, :]
    if arr.ndim != 3:
        raise ValueError(f"expected (n, T, D) tensor, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("non-finite embedding value")
    n, t, d = arr.shape
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, n, t, d, DTYPE_FLOAT32))
        f.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    os.replace(tmp, path)


def write_manifest(words, prompt_template, token_count, dim, path) -> None:
    manifest = {
        "words": list(words),
        "prompt_template": prompt_template,
        "spaces": [
            {"file": "pooled.emb1", "kind": "pooled",
             "token_count": 1, "dim": dim},
            {"file": "hidden.emb1", "kind": "hidden",
             "token_count": token_count, "dim": dim},
        ],
    }
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(manifest, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, path)
