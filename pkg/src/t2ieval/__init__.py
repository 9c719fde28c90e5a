"""Evaluation toolkit for text-to-image generation systems.

Computes the cross-model distance (cmd) and its consistency component
(itdis) over generated-image, real-image, and text feature distributions,
plus classical Frechet/FID statistics, image-text matching scores and
losses, stage-wise adversarial loss formulas, and retrieval Recall@K. All
numerics operate on precomputed embedding bundles; no model inference
happens here.
"""

__version__ = "0.1.0"

from .cmd_metric import CmdReport, cmd_expanded, compute_cmd, compute_itdis
from .gan_losses import (
    d_adversarial_loss,
    g2_total,
    g3_total,
    g_adversarial_loss,
    mean_pool_words,
)
from .itm_scoring import (
    CaptionBundle,
    RetrievalReport,
    attention_context,
    build_similarity_matrix,
    contrastive_loss,
    itm_total,
    rank_retrieval,
    sentence_score,
    word_region_score,
)
from .linalg_stats import (
    GaussianStats,
    estimate_stats,
    frechet_distance,
    merge_stats,
    sqrtm_psd,
)

__all__ = [
    "CmdReport",
    "CaptionBundle",
    "GaussianStats",
    "RetrievalReport",
    "attention_context",
    "build_similarity_matrix",
    "cmd_expanded",
    "compute_cmd",
    "compute_itdis",
    "contrastive_loss",
    "d_adversarial_loss",
    "estimate_stats",
    "frechet_distance",
    "g2_total",
    "g3_total",
    "g_adversarial_loss",
    "itm_total",
    "mean_pool_words",
    "merge_stats",
    "rank_retrieval",
    "sentence_score",
    "sqrtm_psd",
    "word_region_score",
]
