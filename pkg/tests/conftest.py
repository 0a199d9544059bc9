import numpy as np
import pytest

from embedblend import EmbeddingDataset, SpaceMeta


def make_dataset(n=10, t=2, d=4, seed=0, pooled=None, hidden=None):
    rng = np.random.default_rng(seed)
    words = [f"word{i:05d}" for i in range(n)]
    if pooled is None:
        pooled = rng.normal(size=(n, d))
    if hidden is None:
        hidden = rng.normal(size=(n, t, d))
    return EmbeddingDataset(
        words=words,
        pooled=np.asarray(pooled, dtype=np.float64),
        hidden=np.asarray(hidden, dtype=np.float64),
        meta_pooled=SpaceMeta("pooled", 1, d),
        meta_hidden=SpaceMeta("hidden", t, d),
    )


@pytest.fixture
def small_dataset():
    return make_dataset(n=10, t=2, d=4, seed=42)
