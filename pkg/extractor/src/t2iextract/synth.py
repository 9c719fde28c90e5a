"""Seeded synthetic Gaussian bundles, including rank-planted fixtures for
retrieval golden tests.

With --planted-rank K, sentence vectors are built from a circulant weight
matrix over orthonormal image vectors so that caption j's true image ranks
exactly K-th both per row and per column of the sentence-level cosine
matrix, with no ties.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .formats import write_bundle


def _orthonormal_rows(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(d, m)))
    return q.T


def synthesize(
    m: int,
    d: int,
    r: int,
    seed: int,
    out_dir,
    planted_rank: int | None = None,
    min_words: int = 2,
    max_words: int = 6,
) -> Path:
    if min(m, d, r) < 1:
        raise ValueError("m, d, and r must be positive")
    if planted_rank is not None:
        if not 1 <= planted_rank <= m:
            raise ValueError(f"planted rank must be in 1..{m}")
        if d < m:
            raise ValueError("planted ranks need d >= m for orthonormal rows")
    rng = np.random.default_rng(seed)
    if planted_rank is None:
        img = rng.normal(size=(m, d))
        sent = img + 0.1 * rng.normal(size=(m, d))
    else:
        img = _orthonormal_rows(rng, m, d)
        base = np.arange(m, 0, -1, dtype=np.float64)
        weights = np.empty((m, m))
        for j in range(m):
            for i in range(m):
                weights[i, j] = base[(i - j + planted_rank - 1) % m]
        # every column is a permutation of the same values, so the common
        # column norm cancels out of the cosine rankings
        sent = weights.T @ img
    regions = rng.normal(size=(m, r, d))
    words_per = rng.integers(min_words, max_words, size=m)
    offsets = np.concatenate([[0], np.cumsum(words_per)])
    words = rng.normal(size=(int(offsets[-1]), d))
    return write_bundle(
        out_dir, img, sent, regions, words, offsets,
        encoder=f"synthetic(seed={seed})",
    )
