import hashlib
import json
import shutil

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from t2ieval.embedding_io import (
    DTYPE_F32,
    DTYPE_I64,
    load_bundle,
    read_stats,
    read_tensor,
    write_stats,
    write_tensor,
)
from t2ieval.errors import (
    BadMagic,
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
from t2ieval.linalg_stats import GaussianStats
from conftest import GOLDEN


class TestTensorRoundTrip:
    def test_header_size_one_element(self, tmp_path):
        # 4 magic + 4 version + 1 dtype + 1 ndim + 8 per dim + 4 payload
        path = tmp_path / "t.grb"
        write_tensor(path, DTYPE_F32, (1,), [0.0])
        assert path.stat().st_size == 22
        write_tensor(path, DTYPE_F32, (1, 1), [0.0])
        assert path.stat().st_size == 30

    def test_empty_dims_rejected(self, tmp_path):
        with pytest.raises(ShapeMismatch):
            write_tensor(tmp_path / "t.grb", DTYPE_F32, (), [])

    def test_value_count_mismatch(self, tmp_path):
        with pytest.raises(ShapeMismatch):
            write_tensor(tmp_path / "t.grb", DTYPE_F32, (2, 2), [1.0, 2.0])

    def test_float_round_trip(self, tmp_path, rng):
        values = rng.normal(size=(3, 5)).astype(np.float32)
        path = tmp_path / "t.grb"
        write_tensor(path, DTYPE_F32, values.shape, values)
        dtype, dims, back = read_tensor(path)
        assert dtype == DTYPE_F32 and dims == (3, 5)
        np.testing.assert_array_equal(back, values)

    def test_int64_round_trip(self, tmp_path):
        values = np.array([0, 3, 5, 9], dtype=np.int64)
        path = tmp_path / "o.grb"
        write_tensor(path, DTYPE_I64, (4,), values)
        dtype, dims, back = read_tensor(path)
        assert dtype == DTYPE_I64 and dims == (4,)
        np.testing.assert_array_equal(back, values)

    def test_write_is_deterministic(self, tmp_path, rng):
        values = rng.normal(size=(4, 4)).astype(np.float32)
        a, b = tmp_path / "a.grb", tmp_path / "b.grb"
        write_tensor(a, DTYPE_F32, values.shape, values)
        write_tensor(b, DTYPE_F32, values.shape, values)
        assert a.read_bytes() == b.read_bytes()

    @given(
        dims=st.integers(1, 4).flatmap(
            lambda nd: st.lists(st.integers(1, 10), min_size=nd, max_size=nd)
        ),
        seed=st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=40, deadline=None)
    def test_round_trip_property(self, dims, seed):
        import tempfile
        from pathlib import Path

        rng = np.random.default_rng(seed)
        values = rng.normal(size=dims).astype(np.float32)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "t.grb"
            write_tensor(path, DTYPE_F32, dims, values)
            _, back_dims, back = read_tensor(path)
        assert back_dims == tuple(dims)
        assert back.tobytes() == values.tobytes()


class TestMalformedTensors:
    def _valid(self, tmp_path):
        path = tmp_path / "t.grb"
        write_tensor(path, DTYPE_F32, (2, 2), np.arange(4, dtype=np.float32))
        return path

    def test_bad_magic(self, tmp_path):
        path = self._valid(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(BadMagic):
            read_tensor(path)

    def test_bad_version(self, tmp_path):
        path = self._valid(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[4] = 99
        path.write_bytes(bytes(blob))
        with pytest.raises(UnsupportedVersion):
            read_tensor(path)

    def test_bad_dtype(self, tmp_path):
        path = self._valid(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[8] = 7
        path.write_bytes(bytes(blob))
        with pytest.raises(UnsupportedDtype):
            read_tensor(path)

    def test_truncated(self, tmp_path):
        path = self._valid(tmp_path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-4])  # drops one of 4 declared floats
        with pytest.raises(TruncatedFile):
            read_tensor(path)

    def test_trailing_bytes(self, tmp_path):
        path = self._valid(tmp_path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(TrailingBytes):
            read_tensor(path)

    def test_nonfinite_payload(self, tmp_path):
        path = tmp_path / "t.grb"
        values = np.array([1.0, np.inf], dtype=np.float32)
        # bypass write-side checks by writing the raw payload
        write_tensor(path, DTYPE_F32, (2,), [1.0, 2.0])
        blob = bytearray(path.read_bytes())
        blob[-8:] = values.tobytes()
        path.write_bytes(bytes(blob))
        with pytest.raises(NonFiniteValue):
            read_tensor(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            read_tensor(tmp_path / "nope.grb")


class TestStatsFiles:
    def test_round_trip(self, tmp_path, rng):
        a = rng.normal(size=(5, 5))
        stats = GaussianStats(42, rng.normal(size=5), a @ a.T)
        path = tmp_path / "s.stats"
        write_stats(path, stats)
        back = read_stats(path)
        assert back.n == 42
        np.testing.assert_array_equal(back.mean, stats.mean)
        np.testing.assert_array_equal(back.cov, stats.cov)

    def test_deterministic_bytes(self, tmp_path, rng):
        stats = GaussianStats(7, rng.normal(size=3), np.eye(3))
        a, b = tmp_path / "a.stats", tmp_path / "b.stats"
        write_stats(a, stats)
        write_stats(b, stats)
        assert a.read_bytes() == b.read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "s.stats"
        path.write_bytes(b"NOPE" + b"\x00" * 40)
        with pytest.raises(BadMagic):
            read_stats(path)


class TestGoldenFixtures:
    # digests pin the byte-level layout across platforms
    DIGESTS = {
        "two_samples_1d.grb":
            "a62a523e44c880c76253ab80e15ba27777abe22e54d27740554d8520cebd3edb",
    }

    def test_golden_digest(self):
        for name, digest in self.DIGESTS.items():
            blob = (GOLDEN / name).read_bytes()
            assert hashlib.sha256(blob).hexdigest() == digest, name

    def test_golden_tensor_contents(self):
        dtype, dims, values = read_tensor(GOLDEN / "two_samples_1d.grb")
        assert dtype == DTYPE_F32 and dims == (2, 1)
        np.testing.assert_array_equal(values, [[0.0], [2.0]])


class TestLoadBundle:
    def test_loads_golden(self):
        bundle = load_bundle(GOLDEN / "bundle_identity")
        assert bundle.m == 4 and bundle.dim == 8
        assert bundle.regions.shape == (4, 3, 8)
        assert len(bundle.word_vector_list()) == 4
        assert all(len(w) >= 1 for w in bundle.word_vector_list())

    def test_sentence_only_bundle(self, tmp_path):
        src = GOLDEN / "bundle_identity"
        dst = tmp_path / "b"
        dst.mkdir()
        for name in ("manifest.json", "img.grb", "sent.grb"):
            shutil.copy(src / name, dst / name)
        bundle = load_bundle(dst)
        assert bundle.regions is None
        with pytest.raises(MissingFile):
            load_bundle(dst, require_words=True)

    def _copy_bundle(self, tmp_path):
        dst = tmp_path / "b"
        shutil.copytree(GOLDEN / "bundle_identity", dst)
        return dst

    def test_nonmonotone_offsets(self, tmp_path):
        dst = self._copy_bundle(tmp_path)
        manifest = json.loads((dst / "manifest.json").read_text())
        m = manifest["counts"]["m"]
        n_total = manifest["counts"]["n_total"]
        bad = np.linspace(0, n_total, m + 1).astype(np.int64)
        bad[1], bad[2] = bad[2], bad[1]
        write_tensor(dst / "word_offsets.grb", DTYPE_I64, (m + 1,), bad)
        with pytest.raises(OffsetsInvalid):
            load_bundle(dst)

    def test_manifest_count_mismatch(self, tmp_path):
        dst = self._copy_bundle(tmp_path)
        manifest = json.loads((dst / "manifest.json").read_text())
        manifest["counts"]["m"] += 1
        (dst / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(ManifestMismatch):
            load_bundle(dst)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(MissingFile):
            load_bundle(tmp_path)
