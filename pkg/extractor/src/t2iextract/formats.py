"""Writer for the evaluation toolkit's bundle contract.

Tensor files: "GREB" magic, u32 version 1, u8 dtype (0 float32, 1 int64),
u8 ndim, ndim x u64 dims, row-major little-endian payload. A bundle
directory holds manifest.json plus img/sent/regions/words/word_offsets
tensors. This module deliberately re-implements the byte format from its
published description rather than importing the consumer package: the file
layout is the interface between the two components.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

TENSOR_MAGIC = b"GREB"
FORMAT_VERSION = 1
DTYPE_F32 = 0
DTYPE_I64 = 1
_DTYPES = {DTYPE_F32: np.dtype("<f4"), DTYPE_I64: np.dtype("<i8")}

# fixed timestamp keeps synthesized bundles byte-identical across runs
EPOCH_TIMESTAMP = "1970-01-01T00:00:00+00:00"


def write_tensor(path, dtype: int, dims, values) -> None:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ValueError("dims must be nonempty")
    arr = np.ascontiguousarray(values, dtype=_DTYPES[dtype])
    if arr.size != int(np.prod(dims)):
        raise ValueError(f"{arr.size} values do not fill shape {dims}")
    header = TENSOR_MAGIC + struct.pack(
        "<IBB", FORMAT_VERSION, dtype, len(dims)
    ) + struct.pack(f"<{len(dims)}Q", *dims)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes())


def write_bundle(
    out_dir,
    img: np.ndarray,
    sent: np.ndarray,
    regions: np.ndarray,
    words: np.ndarray,
    offsets: np.ndarray,
    encoder: str,
    timestamp: str = EPOCH_TIMESTAMP,
) -> Path:
    """Write a full bundle directory; shapes are validated against each
    other before anything touches disk."""
    out = Path(out_dir)
    m, d = img.shape
    if sent.shape != (m, d):
        raise ValueError(f"sent shape {sent.shape} != {(m, d)}")
    if regions.ndim != 3 or regions.shape[0] != m or regions.shape[2] != d:
        raise ValueError(f"regions shape {regions.shape} incompatible")
    if words.ndim != 2 or words.shape[1] != d:
        raise ValueError(f"words shape {words.shape} incompatible")
    offsets = np.asarray(offsets, dtype=np.int64)
    if offsets.shape != (m + 1,) or offsets[0] != 0 \
            or offsets[-1] != words.shape[0] or np.any(np.diff(offsets) < 1):
        raise ValueError("invalid word offsets")
    out.mkdir(parents=True, exist_ok=True)
    write_tensor(out / "img.grb", DTYPE_F32, img.shape, img)
    write_tensor(out / "sent.grb", DTYPE_F32, sent.shape, sent)
    write_tensor(out / "regions.grb", DTYPE_F32, regions.shape, regions)
    write_tensor(out / "words.grb", DTYPE_F32, words.shape, words)
    write_tensor(out / "word_offsets.grb", DTYPE_I64, offsets.shape, offsets)
    manifest = {
        "schema_version": 1,
        "counts": {
            "m": int(m),
            "d": int(d),
            "r": int(regions.shape[1]),
            "n_total": int(words.shape[0]),
        },
        "encoder": encoder,
        "created": timestamp,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return out
