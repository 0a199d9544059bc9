"""Text encoders that produce pooled and per-token hidden embeddings.

The stub encoder derives vectors from a hash of the prompt, so exports
are deterministic without any model download; the CLIP-backed encoder
needs the optional torch/transformers extra.
"""

from __future__ import annotations

import hashlib
from typing import Protocol

import numpy as np


class UntokenizableWordError(Exception):
    """Raised by an encoder for a vocabulary item it cannot tokenize."""


class Encoder(Protocol):
    dim: int
    token_count: int

    def encode(self, prompt: str) -> tuple[np.ndarray, np.ndarray]:
        """Return (pooled (D,), hidden (T, D)) for one prompt."""
        ...


class StubEncoder:
    """Deterministic hash-seeded encoder for tests and dry runs."""

    def __init__(self, dim: int = 8, token_count: int = 4):
        self.dim = dim
        self.token_count = token_count

    def encode(self, prompt: str):
        digest = hashlib.sha256(prompt.encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        hidden = rng.standard_normal((self.token_count, self.dim))
        pooled = hidden[-1] @ rng.standard_normal((self.dim, self.dim))
        return pooled.astype(np.float32), hidden.astype(np.float32)

    def score(self, prompt: str, image_id: str) -> float:
        """Deterministic stand-in for an image-text similarity score."""
        digest = hashlib.sha256(f"{prompt}|{image_id}".encode()).digest()
        return int.from_bytes(digest[:4], "little") / 2**32


class ClipEncoder:
    """Encoder backed by a contrastive text model from transformers.

    Imports lazily so the package works without torch installed.
    """

    def __init__(self, model_name: str = "openai/clip-vit-large-patch14",
                 batch_size: int = 64):
        from transformers import CLIPTextModelWithProjection, CLIPTokenizer
        import torch

        self._torch = torch
        self.tokenizer = CLIPTokenizer.from_pretrained(model_name)
        self.model = CLIPTextModelWithProjection.from_pretrained(model_name)
        self.model.eval()
        self.batch_size = batch_size
        self.token_count = self.tokenizer.model_max_length
        self.dim = self.model.config.hidden_size

    def encode(self, prompt: str):
        torch = self._torch
        tokens = self.tokenizer(prompt, padding="max_length",
                                truncation=True, return_tensors="pt")
        if tokens["input_ids"].shape[1] != self.token_count:
            raise UntokenizableWordError(prompt)
        with torch.no_grad():
            out = self.model(**tokens, output_hidden_states=False)
        pooled = out.text_embeds[0].numpy().astype(np.float32)
        hidden = out.last_hidden_state[0].numpy().astype(np.float32)
        return pooled, hidden
