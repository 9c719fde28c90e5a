"""Image-text matching scores and losses.

Sentence level scores are cosine similarities between pooled vectors. Word
level scores attend each word over the image regions, take the cosine
relevance of each word to its attended context, and aggregate with a
log-sum-exp of sharpness gamma2. The contrastive losses are the in-batch
negative log posteriors at temperature gamma, and rank_retrieval turns a
score matrix into Recall@K both ways.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NonFinite,
    NonSquare,
    ZeroVector,
)

DEFAULT_GAMMA = 10.0    # contrastive temperature
DEFAULT_GAMMA1 = 4.0    # attention sharpness
DEFAULT_GAMMA2 = 5.0    # word-score aggregation sharpness
DEFAULT_LAMBDA1 = 4.0   # sentence-loss weight
DEFAULT_LAMBDA2 = 1.0   # word-loss weight


@dataclass
class CaptionBundle:
    """Aligned image/caption features for a batch of M pairs.

    word_vectors and region_features are per-item lists so captions may have
    different word counts (region counts may differ too, though bundles on
    disk store a fixed R).
    """

    image_vectors: np.ndarray          # M x d
    sentence_vectors: np.ndarray       # M x d
    region_features: list[np.ndarray] | None = None  # M of R_i x d
    word_vectors: list[np.ndarray] | None = None     # M of T_k x d

    @property
    def m(self) -> int:
        return self.image_vectors.shape[0]


@dataclass(frozen=True)
class RetrievalReport:
    r1_i2t: float
    r5_i2t: float
    r10_i2t: float
    r1_t2i: float
    r5_t2i: float
    r10_t2i: float


def _logsumexp(x: np.ndarray, axis=None):
    if axis is None:
        m = float(np.max(x))
        return m + float(np.log(np.sum(np.exp(x - m))))
    m = np.max(x, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def _unit(v: np.ndarray, axis=-1) -> np.ndarray:
    norm = np.linalg.norm(v, axis=axis, keepdims=True)
    if np.any(norm == 0.0):
        raise ZeroVector("cannot take cosine of a zero vector")
    return v / norm


def sentence_score(image_vec: np.ndarray, sentence_vec: np.ndarray) -> float:
    """Cosine similarity between pooled image and sentence vectors."""
    u = np.asarray(image_vec, dtype=np.float64).reshape(-1)
    v = np.asarray(sentence_vec, dtype=np.float64).reshape(-1)
    if u.size != v.size:
        raise DimensionMismatch(f"lengths differ: {u.size} vs {v.size}")
    return float(_unit(u) @ _unit(v))


def attention_context(
    word_vectors: np.ndarray,
    region_features: np.ndarray,
    gamma1: float = DEFAULT_GAMMA1,
    normalize_logits: bool = False,
) -> np.ndarray:
    """Attend each word over the image regions.

    Logits are the raw word-region dot products scaled by gamma1 (or cosine
    similarities when normalize_logits is set); the context for word i is the
    softmax-weighted sum of region features.
    """
    w = np.asarray(word_vectors, dtype=np.float64)
    r = np.asarray(region_features, dtype=np.float64)
    if w.ndim != 2 or r.ndim != 2 or w.shape[1] != r.shape[1]:
        raise DimensionMismatch(
            f"incompatible shapes {w.shape} and {r.shape}"
        )
    if normalize_logits:
        s = _unit(w) @ _unit(r).T
    else:
        s = w @ r.T                      # T x R
    logits = gamma1 * s
    logits -= logits.max(axis=1, keepdims=True)
    alpha = np.exp(logits)
    alpha /= alpha.sum(axis=1, keepdims=True)
    return alpha @ r


def word_region_score(
    contexts: np.ndarray,
    word_vectors: np.ndarray,
    gamma2: float = DEFAULT_GAMMA2,
) -> float:
    """Aggregate per-word cosine relevances into one matching score:
    (1/gamma2) * log sum_i exp(gamma2 * cos(context_i, word_i))."""
    c = np.asarray(contexts, dtype=np.float64)
    w = np.asarray(word_vectors, dtype=np.float64)
    if c.shape != w.shape:
        raise DimensionMismatch(f"shapes differ: {c.shape} vs {w.shape}")
    rho = np.sum(_unit(c) * _unit(w), axis=1)
    return float(_logsumexp(gamma2 * rho) / gamma2)


def contrastive_loss(
    scores: np.ndarray, gamma: float = DEFAULT_GAMMA
) -> tuple[float, float]:
    """In-batch contrastive losses over an M x M score matrix.

    L1 sums -log softmax over sentences for each image (rows); L2 sums
    -log softmax over images for each sentence (columns). Ground truth is
    the diagonal.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise NonSquare(f"score matrix must be square, got {s.shape}")
    if not np.all(np.isfinite(s)):
        raise NonFinite("score matrix contains NaN/Inf")
    logits = gamma * s
    diag = np.diag(logits)
    l1 = float(np.sum(_logsumexp(logits, axis=1) - diag))
    l2 = float(np.sum(_logsumexp(logits, axis=0) - diag))
    return l1, l2


def itm_total(
    l1s: float,
    l2s: float,
    l1w: float,
    l2w: float,
    lambda1: float = DEFAULT_LAMBDA1,
    lambda2: float = DEFAULT_LAMBDA2,
) -> float:
    """Weighted total of the sentence and word contrastive losses."""
    values = (l1s, l2s, l1w, l2w, lambda1, lambda2)
    if not all(np.isfinite(values)):
        raise NonFinite("loss terms must be finite")
    return lambda1 * (l1s + l2s) + lambda2 * (l1w + l2w)


def build_similarity_matrix(
    bundle: CaptionBundle,
    level: str = "sentence",
    gamma1: float = DEFAULT_GAMMA1,
    gamma2: float = DEFAULT_GAMMA2,
) -> np.ndarray:
    """Fill scores[i][j] with the matching score of image i against
    caption j, at sentence or word level."""
    m = bundle.m
    scores = np.empty((m, m), dtype=np.float64)
    if level == "sentence":
        img = _unit(np.asarray(bundle.image_vectors, dtype=np.float64))
        sent = _unit(np.asarray(bundle.sentence_vectors, dtype=np.float64))
        scores = img @ sent.T
    elif level == "word":
        if bundle.region_features is None or bundle.word_vectors is None:
            raise DimensionMismatch(
                "word-level scoring needs region and word features"
            )
        for i in range(m):
            regions = bundle.region_features[i]
            for j in range(m):
                words = bundle.word_vectors[j]
                ctx = attention_context(words, regions, gamma1)
                scores[i, j] = word_region_score(ctx, words, gamma2)
    else:
        raise ValueError(f"unknown level {level!r}")
    return scores


def rank_retrieval(
    scores: np.ndarray, ks: tuple[int, ...] = (1, 5, 10)
) -> RetrievalReport:
    """Recall@K in both directions with diagonal ground truth.

    Ties rank the lower index first, so results are deterministic.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise NonSquare(f"score matrix must be square, got {s.shape}")
    m = s.shape[0]

    def recalls(mat: np.ndarray) -> dict[int, float]:
        # rank of the true item i within row i, lower index wins ties
        hits = {k: 0 for k in ks}
        for i in range(m):
            row = mat[i]
            better = int(np.sum(row > row[i]))
            tied_before = int(np.sum(row[:i] == row[i]))
            rank = better + tied_before + 1
            for k in ks:
                if rank <= k:
                    hits[k] += 1
        return {k: 100.0 * hits[k] / m for k in ks}

    i2t = recalls(s)
    t2i = recalls(s.T)
    return RetrievalReport(
        r1_i2t=i2t[1], r5_i2t=i2t[5], r10_i2t=i2t[10],
        r1_t2i=t2i[1], r5_t2i=t2i[5], r10_t2i=t2i[10],
    )
