"""Binary tensor files (.grb), Gaussian statistics files (.stats), and the
on-disk bundle layout connecting feature extractors to the numerical core.

Tensor layout, all little-endian:

    magic   4 bytes  "GREB"
    version u32      1
    dtype   u8       0 = float32, 1 = int64
    ndim    u8
    dims    ndim x u64
    payload row-major values

Statistics layout:

    magic   4 bytes  "GRST"
    version u32      1
    n       u64
    d       u64
    mean    d x f64
    cov     d*d x f64

No compression, no checksum; size checks catch truncation.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    IoFailure,
    ManifestMismatch,
    MissingFile,
    NonFiniteValue,
    OffsetsInvalid,
    ShapeMismatch,
    TrailingBytes,
    TruncatedFile,
    UnsupportedDtype,
    UnsupportedVersion,
)
from .linalg_stats import GaussianStats

TENSOR_MAGIC = b"GREB"
STATS_MAGIC = b"GRST"
FORMAT_VERSION = 1

DTYPE_F32 = 0
DTYPE_I64 = 1
_DTYPES = {DTYPE_F32: np.dtype("<f4"), DTYPE_I64: np.dtype("<i8")}


def write_tensor(path, dtype: int, dims, values) -> None:
    """Write values row-major per the tensor layout; byte-identical across
    platforms for identical inputs."""
    dims = tuple(int(d) for d in dims)
    if len(dims) == 0:
        raise ShapeMismatch("dims must be nonempty")
    if any(d < 0 for d in dims):
        raise ShapeMismatch(f"negative dimension in {dims}")
    if dtype not in _DTYPES:
        raise UnsupportedDtype(f"unknown dtype code {dtype}")
    arr = np.ascontiguousarray(values, dtype=_DTYPES[dtype])
    count = int(np.prod(dims, dtype=np.uint64))
    if arr.size != count:
        raise ShapeMismatch(
            f"{arr.size} values do not fill shape {dims} ({count} elements)"
        )
    header = TENSOR_MAGIC + struct.pack(
        "<IBB", FORMAT_VERSION, dtype, len(dims)
    ) + struct.pack(f"<{len(dims)}Q", *dims)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(arr.tobytes())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def read_tensor(path) -> tuple[int, tuple[int, ...], np.ndarray]:
    """Exact inverse of write_tensor; returns (dtype code, dims, array)."""
    try:
        blob = Path(path).read_bytes()
    except FileNotFoundError as exc:
        raise MissingFile(str(exc)) from exc
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if len(blob) < 4:
        raise TruncatedFile(f"{path}: shorter than the magic")
    if blob[:4] != TENSOR_MAGIC:
        raise BadMagic(f"{path}: bad magic {blob[:4]!r}")
    if len(blob) < 10:
        raise TruncatedFile(f"{path}: truncated header")
    version, dtype, ndim = struct.unpack_from("<IBB", blob, 4)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"{path}: version {version}")
    if dtype not in _DTYPES:
        raise UnsupportedDtype(f"{path}: dtype code {dtype}")
    offset = 10
    if len(blob) < offset + 8 * ndim:
        raise TruncatedFile(f"{path}: truncated dims")
    dims = struct.unpack_from(f"<{ndim}Q", blob, offset)
    offset += 8 * ndim
    np_dtype = _DTYPES[dtype]
    count = int(np.prod(dims, dtype=np.uint64)) if ndim else 0
    payload = count * np_dtype.itemsize
    if len(blob) < offset + payload:
        raise TruncatedFile(
            f"{path}: payload has {len(blob) - offset} of {payload} bytes"
        )
    if len(blob) > offset + payload:
        raise TrailingBytes(f"{path}: {len(blob) - offset - payload} extra bytes")
    arr = np.frombuffer(blob, dtype=np_dtype, count=count, offset=offset)
    arr = arr.reshape(dims)
    if dtype == DTYPE_F32 and not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{path}: payload contains NaN/Inf")
    return dtype, tuple(int(d) for d in dims), arr


def write_stats(path, stats: GaussianStats) -> None:
    header = STATS_MAGIC + struct.pack(
        "<IQQ", FORMAT_VERSION, stats.n, stats.dim
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(stats.mean.astype("<f8").tobytes())
            fh.write(np.ascontiguousarray(stats.cov, dtype="<f8").tobytes())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def read_stats(path) -> GaussianStats:
    try:
        blob = Path(path).read_bytes()
    except FileNotFoundError as exc:
        raise MissingFile(str(exc)) from exc
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if len(blob) < 4 or blob[:4] != STATS_MAGIC:
        raise BadMagic(f"{path}: not a statistics file")
    if len(blob) < 24:
        raise TruncatedFile(f"{path}: truncated header")
    version, n, d = struct.unpack_from("<IQQ", blob, 4)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"{path}: version {version}")
    payload = 8 * (d + d * d)
    if len(blob) < 24 + payload:
        raise TruncatedFile(f"{path}: truncated payload")
    if len(blob) > 24 + payload:
        raise TrailingBytes(f"{path}: trailing bytes")
    mean = np.frombuffer(blob, dtype="<f8", count=d, offset=24)
    cov = np.frombuffer(blob, dtype="<f8", count=d * d, offset=24 + 8 * d)
    return GaussianStats(n=n, mean=mean.copy(), cov=cov.reshape(d, d).copy())


def sniff_magic(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read(4)
    except FileNotFoundError as exc:
        raise MissingFile(str(exc)) from exc
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


@dataclass
class Bundle:
    """Validated in-memory view of a bundle directory."""

    manifest: dict
    img: np.ndarray                 # M x d
    sent: np.ndarray                # M x d
    regions: np.ndarray | None      # M x R x d
    words: np.ndarray | None        # N_total x d
    offsets: np.ndarray | None      # M + 1 int64

    @property
    def m(self) -> int:
        return self.img.shape[0]

    @property
    def dim(self) -> int:
        return self.img.shape[1]

    def caption_words(self, k: int) -> np.ndarray:
        return self.words[self.offsets[k]:self.offsets[k + 1]]

    def word_vector_list(self) -> list[np.ndarray]:
        return [self.caption_words(k) for k in range(self.m)]


def load_bundle(directory, require_words: bool = False) -> Bundle:
    """Load and cross-validate a bundle directory.

    regions/words/word_offsets may be absent for sentence-level-only
    workflows unless require_words is set.
    """
    root = Path(directory)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise MissingFile(f"{manifest_path} not found")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestMismatch(f"unreadable manifest: {exc}") from exc
    for key in ("schema_version", "counts"):
        if key not in manifest:
            raise ManifestMismatch(f"manifest missing {key!r}")
    if manifest["schema_version"] != 1:
        raise ManifestMismatch(
            f"unsupported schema_version {manifest['schema_version']}"
        )
    counts = manifest["counts"]
    for key in ("m", "d"):
        if key not in counts:
            raise ManifestMismatch(f"manifest counts missing {key!r}")
    m, d = int(counts["m"]), int(counts["d"])

    def load_float(name, expect_shape):
        path = root / name
        if not path.is_file():
            raise MissingFile(f"{path} not found")
        dtype, dims, arr = read_tensor(path)
        if dtype != DTYPE_F32:
            raise ManifestMismatch(f"{name}: expected float32 payload")
        if dims != expect_shape:
            raise ManifestMismatch(
                f"{name}: shape {dims} does not match manifest {expect_shape}"
            )
        return arr

    img = load_float("img.grb", (m, d))
    sent = load_float("sent.grb", (m, d))

    regions = words = offsets = None
    have_words = (root / "words.grb").is_file() or (root / "regions.grb").is_file()
    if require_words and not have_words:
        raise MissingFile(f"{root}: bundle has no region/word tensors")
    if have_words:
        r = int(counts.get("r", 0))
        n_total = int(counts.get("n_total", 0))
        regions = load_float("regions.grb", (m, r, d))
        words = load_float("words.grb", (n_total, d))
        off_path = root / "word_offsets.grb"
        if not off_path.is_file():
            raise MissingFile(f"{off_path} not found")
        dtype, dims, offsets = read_tensor(off_path)
        if dtype != DTYPE_I64 or dims != (m + 1,):
            raise ManifestMismatch(
                f"word_offsets.grb: expected {m + 1} int64 entries, got {dims}"
            )
        offsets = offsets.astype(np.int64)
        if offsets[0] != 0 or offsets[-1] != n_total:
            raise OffsetsInvalid(
                f"offsets endpoints {offsets[0]}..{offsets[-1]} != 0..{n_total}"
            )
        if np.any(np.diff(offsets) < 1):
            raise OffsetsInvalid("every caption needs at least one word")
    return Bundle(
        manifest=manifest, img=img, sent=sent,
        regions=regions, words=words, offsets=offsets,
    )
