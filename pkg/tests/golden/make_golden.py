"""Regenerates the checked-in golden fixtures.

Run from the repository root:

    python3 tests/golden/make_golden.py

Outputs are deterministic; CI asserts their digests, so rerunning must be
a no-op unless the format itself changes.
"""

import json
from pathlib import Path

import numpy as np

from t2ieval.embedding_io import DTYPE_F32, DTYPE_I64, write_tensor, write_stats
from t2ieval.linalg_stats import GaussianStats

HERE = Path(__file__).parent


def orthonormal_rows(rng, m, d):
    q, _ = np.linalg.qr(rng.normal(size=(d, m)))
    return q.T  # m x d, orthonormal rows


def write_bundle(out, img, sent, regions, words, offsets, encoder):
    out.mkdir(parents=True, exist_ok=True)
    m, d = img.shape
    write_tensor(out / "img.grb", DTYPE_F32, img.shape, img.astype("<f4"))
    write_tensor(out / "sent.grb", DTYPE_F32, sent.shape, sent.astype("<f4"))
    write_tensor(out / "regions.grb", DTYPE_F32, regions.shape,
                 regions.astype("<f4"))
    write_tensor(out / "words.grb", DTYPE_F32, words.shape,
                 words.astype("<f4"))
    write_tensor(out / "word_offsets.grb", DTYPE_I64, (m + 1,),
                 np.asarray(offsets, dtype="<i8"))
    manifest = {
        "schema_version": 1,
        "counts": {"m": m, "d": d, "r": regions.shape[1],
                   "n_total": words.shape[0]},
        "encoder": encoder,
        "created": "1970-01-01T00:00:00+00:00",
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def planted_bundle(out, m, d, r_count, rank, seed):
    """Sentence scores form a circulant so caption j's true image ranks
    exactly `rank` in its row and its column, no ties anywhere."""
    rng = np.random.default_rng(seed)
    img = orthonormal_rows(rng, m, d)
    weights = np.empty((m, m))
    base = np.arange(m, 0, -1, dtype=np.float64)  # v_1 > ... > v_m > 0
    for j in range(m):
        for i in range(m):
            weights[i, j] = base[(i - j + rank - 1) % m]
    sent = weights.T @ img  # sent_j = sum_i w_ij img_i
    regions = rng.normal(size=(m, r_count, d))
    words_per = rng.integers(2, 6, size=m)
    offsets = np.concatenate([[0], np.cumsum(words_per)])
    words = rng.normal(size=(int(offsets[-1]), d))
    write_bundle(out, img, sent, regions, words, offsets, "synthetic")


def main():
    rng = np.random.default_rng(7)
    # identity bundle: orthonormal image rows reused as sentence vectors
    m, d, r_count = 4, 8, 3
    img = orthonormal_rows(rng, m, d)
    regions = rng.normal(size=(m, r_count, d))
    words_per = rng.integers(2, 5, size=m)
    offsets = np.concatenate([[0], np.cumsum(words_per)])
    words = rng.normal(size=(int(offsets[-1]), d))
    write_bundle(HERE / "bundle_identity", img, img.copy(), regions, words,
                 offsets, "synthetic")

    planted_bundle(HERE / "bundle_rank3", m=10, d=16, r_count=4, rank=3,
                   seed=11)

    # small raw tensors and cached statistics files
    write_tensor(HERE / "two_samples_1d.grb", DTYPE_F32, (2, 1),
                 np.array([[0.0], [2.0]], dtype="<f4"))
    write_stats(HERE / "diag_a.stats",
                GaussianStats(n=100, mean=[0.0, 0.0], cov=np.diag([1.0, 1.0])))
    write_stats(HERE / "diag_b.stats",
                GaussianStats(n=100, mean=[1.0, 1.0], cov=np.diag([4.0, 9.0])))


if __name__ == "__main__":
    main()
