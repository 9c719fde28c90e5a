"""Stage-wise adversarial loss formulas over batches of discriminator
probabilities.

These are pure evaluation helpers: batch means stand in for expectations
and no gradients are involved. Scores are clamped into [eps, 1-eps] so raw
0/1 inputs keep the logs finite.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyBatch, EmptyInput, NonFinite

SCORE_EPS = 1e-7


def _clamp_scores(scores, name: str) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    if s.size == 0:
        raise EmptyBatch(f"{name} batch is empty")
    if not np.all(np.isfinite(s)):
        raise NonFinite(f"{name} batch contains NaN/Inf")
    return np.clip(s, SCORE_EPS, 1.0 - SCORE_EPS)


def d_adversarial_loss(real_scores, fake_scores) -> float:
    """-1/2 mean(log D(real)) - 1/2 mean(log(1 - D(fake)))."""
    real = _clamp_scores(real_scores, "real")
    fake = _clamp_scores(fake_scores, "fake")
    return float(-0.5 * np.mean(np.log(real)) - 0.5 * np.mean(np.log1p(-fake)))


def g_adversarial_loss(fake_scores) -> float:
    """-1/2 mean(log D(fake))."""
    fake = _clamp_scores(fake_scores, "fake")
    return float(-0.5 * np.mean(np.log(fake)))


def g2_total(g_cond: float, itm_sentence: float, weight_s: float = 4.0) -> float:
    """Stage-2 generator total: conditional loss plus weighted
    sentence-level consistency loss."""
    values = (g_cond, itm_sentence, weight_s)
    if not all(np.isfinite(values)):
        raise NonFinite("inputs must be finite")
    return g_cond + weight_s * itm_sentence


def g3_total(
    g_cond: float,
    itm_sentence: float,
    itm_word: float,
    lambda1: float = 4.0,
    lambda2: float = 1.0,
) -> float:
    """Stage-3 generator total: conditional loss plus weighted sentence and
    word consistency losses."""
    values = (g_cond, itm_sentence, itm_word, lambda1, lambda2)
    if not all(np.isfinite(values)):
        raise NonFinite("inputs must be finite")
    return g_cond + lambda1 * itm_sentence + lambda2 * itm_word


def mean_pool_words(word_vectors) -> np.ndarray:
    """Column-wise mean of a T x d word-vector matrix."""
    w = np.asarray(word_vectors, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] < 1:
        raise EmptyInput(f"expected a nonempty T x d matrix, got {w.shape}")
    # canonical row order keeps the sum exactly permutation-invariant
    order = np.lexsort(w.T[::-1])
    return w[order].sum(axis=0) / w.shape[0]
