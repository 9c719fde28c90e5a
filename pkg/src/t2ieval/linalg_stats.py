"""Gaussian sufficient statistics, PSD matrix square roots, and the
Frechet distance between two Gaussians.

All accumulation happens in float64 regardless of the on-disk precision of
the input embeddings. Covariances use the unbiased n-1 denominator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    FewerThanTwoSamples,
    IndefiniteMatrix,
    NonFiniteInput,
    NotSymmetric,
    NumericalFailure,
)

# Eigenvalues of a covariance in [-EIG_CLAMP_REL * max_eig, 0) are treated
# as round-off and clamped to zero; anything lower is a real indefiniteness.
EIG_CLAMP_REL = 1e-10

# Diagonal jitter used once as a fallback when the square root fails on
# near-singular covariances.
REGULARIZATION_EPS = 1e-6

_SYM_TOL = 1e-8


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2.0


@dataclass(frozen=True)
class GaussianStats:
    """Sufficient statistics of a feature distribution.

    The covariance is symmetrized on construction; n must be at least 2
    because the estimator divides by n - 1.
    """

    n: int
    mean: np.ndarray
    cov: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise FewerThanTwoSamples(f"need at least 2 samples, got {self.n}")
        mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        cov = np.asarray(self.cov, dtype=np.float64)
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(
                f"cov shape {cov.shape} does not match mean length {mean.size}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise NonFiniteInput("statistics contain NaN/Inf")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", _symmetrize(cov))

    @property
    def dim(self) -> int:
        return self.mean.size


def estimate_stats(emb: np.ndarray) -> GaussianStats:
    """Column-wise sample mean and unbiased sample covariance of a
    rows x dim embedding matrix."""
    x = np.asarray(emb, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got ndim={x.ndim}")
    if x.shape[0] < 2:
        raise FewerThanTwoSamples(f"need at least 2 rows, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("embedding matrix contains NaN/Inf")
    n = x.shape[0]
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    return GaussianStats(n=n, mean=mean, cov=cov)


def merge_stats(a: GaussianStats, b: GaussianStats) -> GaussianStats:
    """Pairwise merge of sufficient statistics, equivalent to estimating
    over the concatenated sample sets."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dim {a.dim} vs {b.dim}")
    n = a.n + b.n
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.n / n)
    m2 = (
        a.cov * (a.n - 1)
        + b.cov * (b.n - 1)
        + np.outer(delta, delta) * (a.n * b.n / n)
    )
    return GaussianStats(n=n, mean=mean, cov=m2 / (n - 1))


def estimate_stats_sharded(emb: np.ndarray, threads: int = 1) -> GaussianStats:
    """Shard rows into fixed-size chunks, estimate per chunk (optionally in
    parallel), and merge in index order.

    The chunking is a function of the data size only, so the result is
    bit-identical for any thread count.
    """
    x = np.asarray(emb, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got ndim={x.ndim}")
    rows = x.shape[0]
    chunk = 65536
    if threads <= 1 or rows <= 2 * chunk:
        return estimate_stats(x)
    bounds = list(range(0, rows, chunk))
    # last chunk must keep >= 2 rows
    if rows - bounds[-1] < 2:
        bounds.pop()
    shards = [x[lo:hi] for lo, hi in zip(bounds, bounds[1:] + [rows])]

    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(estimate_stats, shards))
    out = parts[0]
    for part in parts[1:]:
        out = merge_stats(out, part)
    return out


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Tiny negative eigenvalues from round-off are clamped to zero; genuinely
    negative spectra raise IndefiniteMatrix.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {m.shape}")
    scale = np.abs(m).max()
    if scale > 0 and np.abs(m - m.T).max() > _SYM_TOL * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    w, v = np.linalg.eigh(_symmetrize(m))
    max_eig = max(w[-1], 0.0)
    clamp = EIG_CLAMP_REL * max_eig
    if w[0] < -clamp:
        raise IndefiniteMatrix(
            f"eigenvalue {w[0]:.3e} below clamp threshold {-clamp:.3e}"
        )
    w = np.clip(w, 0.0, None)
    root = (v * np.sqrt(w)) @ v.T
    return _symmetrize(root)


def _trace_sqrt_product(cov_a: np.ndarray, cov_b: np.ndarray) -> float:
    """Tr sqrt(cov_a cov_b), computed through the symmetric congruence
    sqrt(cov_a)^T cov_b sqrt(cov_a) so the root stays real."""
    a_half = sqrtm_psd(cov_a)
    inner = _symmetrize(a_half @ cov_b @ a_half)
    return float(np.trace(sqrtm_psd(inner)))


def frechet_distance_with_info(
    a: GaussianStats, b: GaussianStats
) -> tuple[float, bool]:
    """Frechet distance between two Gaussians, plus a flag telling whether
    the diagonal-jitter fallback fired.

    Distance: ||mu_a - mu_b||^2 + Tr(cov_a + cov_b - 2 sqrt(cov_a cov_b)).
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"dim {a.dim} vs {b.dim}")
    diff = a.mean - b.mean
    mean_term = float(diff @ diff)
    regularized = False
    try:
        tr_sqrt = _trace_sqrt_product(a.cov, b.cov)
        cov_a, cov_b = a.cov, b.cov
    except IndefiniteMatrix:
        eye = REGULARIZATION_EPS * np.eye(a.dim)
        cov_a = a.cov + eye
        cov_b = b.cov + eye
        tr_sqrt = _trace_sqrt_product(cov_a, cov_b)
        regularized = True
    trace_term = float(np.trace(cov_a) + np.trace(cov_b)) - 2.0 * tr_sqrt
    if trace_term < -1e-8:
        raise NumericalFailure(
            f"trace term {trace_term:.3e} below -1e-8; inputs look broken"
        )
    value = mean_term + trace_term
    if -1e-8 <= value < 0.0:
        value = 0.0
    return value, regularized


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    return frechet_distance_with_info(a, b)[0]
