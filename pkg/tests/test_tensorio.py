import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fooddetect.errors import (
    AlignmentError,
    CorruptionError,
    FormatError,
    ValidationError,
)
from fooddetect.tensorio import (
    DatasetManifest,
    FeatureMatrix,
    ManifestEntry,
    align,
    read_feature_file,
    read_manifest,
    write_feature_file,
    write_manifest,
)


def matrix(values, ids):
    return FeatureMatrix(values=np.asarray(values, dtype=float), ids=tuple(ids))


class TestFeatureMatrix:
    def test_rejects_duplicate_ids(self):
        with pytest.raises(ValidationError):
            matrix([[1.0], [2.0]], ["a", "a"])

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            matrix([[np.nan]], ["a"])

    def test_rejects_id_count_mismatch(self):
        with pytest.raises(ValidationError):
            matrix([[1.0], [2.0]], ["a"])


class TestFeatureFile:
    def test_round_trip(self, tmp_path):
        m = matrix([[1, 2, 3], [4, 5, 6]], ["a", "b"])
        path = tmp_path / "m.fvb"
        write_feature_file(m, path)
        back = read_feature_file(path)
        assert back.n == 2 and back.d == 3
        assert back.ids == ("a", "b")
        np.testing.assert_array_equal(back.values, m.values)

    def test_f32_bit_pattern_of_one(self, tmp_path):
        path = tmp_path / "one.fvb"
        write_feature_file(matrix([[1.0]], ["x"]), path)
        blob = path.read_bytes()
        # header: magic + u32 + u64 + u32, id table: u16 + 1 byte
        off = 4 + 4 + 8 + 4 + 2 + 1
        assert blob[off : off + 4] == struct.pack("<I", 0x3F800000)

    def test_empty_matrix_round_trips(self, tmp_path):
        m = FeatureMatrix(values=np.empty((0, 5)), ids=())
        path = tmp_path / "empty.fvb"
        write_feature_file(m, path)
        back = read_feature_file(path)
        assert back.n == 0 and back.d == 5

    def test_write_is_deterministic(self, tmp_path):
        m = matrix([[0.25, -7.5]], ["only"])
        a, b = tmp_path / "a.fvb", tmp_path / "b.fvb"
        write_feature_file(m, a)
        write_feature_file(m, b)
        assert a.read_bytes() == b.read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.fvb"
        path.write_bytes(b"XXXX" + b"\x00" * 32)
        with pytest.raises(FormatError):
            read_feature_file(path)

    def test_truncated_rows(self, tmp_path):
        m = matrix(np.arange(27, dtype=float).reshape(9, 3), [f"s{i}" for i in range(9)])
        path = tmp_path / "m.fvb"
        write_feature_file(m, path)
        blob = bytearray(path.read_bytes())
        # claim n=10 while only 9 rows of ids/values are present
        struct.pack_into("<Q", blob, 8, 10)
        path.write_bytes(bytes(blob))
        with pytest.raises(CorruptionError):
            read_feature_file(path)

    def test_truncated_payload(self, tmp_path):
        m = matrix([[1.0, 2.0]], ["a"])
        path = tmp_path / "m.fvb"
        write_feature_file(m, path)
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(CorruptionError):
            read_feature_file(path)

    def test_nonfinite_value_rejected(self, tmp_path):
        m = matrix([[1.0]], ["a"])
        path = tmp_path / "m.fvb"
        write_feature_file(m, path)
        blob = bytearray(path.read_bytes())
        blob[-4:] = struct.pack("<f", np.inf)
        path.write_bytes(bytes(blob))
        with pytest.raises(ValidationError):
            read_feature_file(path)

    def test_duplicate_ids_rejected(self, tmp_path):
        m = matrix([[1.0], [2.0]], ["a", "b"])
        path = tmp_path / "m.fvb"
        write_feature_file(m, path)
        blob = bytearray(path.read_bytes())
        idx = blob.find(b"b")
        blob[idx] = ord("a")
        path.write_bytes(bytes(blob))
        with pytest.raises(ValidationError):
            read_feature_file(path)

    @given(
        n=st.integers(1, 6),
        d=st.integers(1, 5),
        data=st.data(),
    )
    @settings(max_examples=40)
    def test_round_trip_matches_after_f32_quantization(self, n, d, data, tmp_path_factory):
        raw = data.draw(
            st.lists(
                st.floats(-1e30, 1e30, allow_nan=False, allow_infinity=False),
                min_size=n * d,
                max_size=n * d,
            )
        )
        ids = [f"id{i}" for i in range(n)]
        m = matrix(np.array(raw).reshape(n, d), ids)
        path = tmp_path_factory.mktemp("fvb") / "m.fvb"
        write_feature_file(m, path)
        back = read_feature_file(path)
        assert back.ids == m.ids
        expected = m.values.astype("<f4").astype(np.float64)
        np.testing.assert_array_equal(back.values, expected)


MANIFEST_BODY = "id,path,label,split\nimg1,a.ppm,food,train\nimg2,b.ppm,nonfood,test\nimg3,c.ppm,food,train\n"


class TestManifest:
    def test_reads_three_entries(self, tmp_path):
        path = tmp_path / "man.csv"
        path.write_text(MANIFEST_BODY)
        man = read_manifest(path)
        assert len(man) == 3
        assert man.entries[1].label == "nonfood"
        assert man.entries[2].split == "train"

    def test_unknown_label_names_line(self, tmp_path):
        path = tmp_path / "man.csv"
        path.write_text("id,path,label,split\nimg1,a.ppm,drink,train\n")
        with pytest.raises(ValidationError, match=":2:"):
            read_manifest(path)

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "man.csv"
        path.write_text("id,path,label,split\nimg7,a.ppm,food,train\nimg7,b.ppm,food,test\n")
        with pytest.raises(ValidationError, match="img7"):
            read_manifest(path)

    def test_unknown_split(self, tmp_path):
        path = tmp_path / "man.csv"
        path.write_text("id,path,label,split\nimg1,a.ppm,food,holdout\n")
        with pytest.raises(ValidationError, match="holdout"):
            read_manifest(path)

    def test_empty_split_means_unassigned(self, tmp_path):
        path = tmp_path / "man.csv"
        path.write_text("id,path,label,split\nimg1,a.ppm,food,\n")
        man = read_manifest(path)
        assert man.entries[0].split is None

    def test_bad_header(self, tmp_path):
        path = tmp_path / "man.csv"
        path.write_text("id,file,label\nx,y,z\n")
        with pytest.raises(FormatError):
            read_manifest(path)

    def test_write_read_round_trip_with_lf(self, tmp_path):
        path = tmp_path / "man.csv"
        path.write_text(MANIFEST_BODY)
        man = read_manifest(path)
        out = tmp_path / "out.csv"
        write_manifest(man, out)
        assert out.read_bytes() == MANIFEST_BODY.encode()


class TestAlign:
    def manifest(self):
        return DatasetManifest(
            (
                ManifestEntry("t1", "p1", "food", "train"),
                ManifestEntry("t2", "p2", "nonfood", "train"),
                ManifestEntry("e1", "p3", "food", "test"),
            )
        )

    def test_selects_in_manifest_order(self):
        m = matrix([[3.0], [1.0], [2.0]], ["e1", "t1", "t2"])
        sub, labels = align(m, self.manifest(), "train")
        assert sub.ids == ("t1", "t2")
        np.testing.assert_array_equal(sub.values, [[1.0], [2.0]])
        np.testing.assert_array_equal(labels, [1, -1])

    def test_empty_split(self):
        m = matrix([[3.0], [1.0], [2.0]], ["e1", "t1", "t2"])
        man = DatasetManifest(
            (
                ManifestEntry("t1", "p1", "food", "train"),
                ManifestEntry("t2", "p2", "nonfood", "train"),
            )
        )
        sub, labels = align(m, man, "test")
        assert sub.n == 0 and sub.d == 1
        assert labels.shape == (0,)

    def test_missing_id(self):
        m = matrix([[1.0]], ["t1"])
        with pytest.raises(AlignmentError, match="t2"):
            align(m, self.manifest(), "train")

    @given(st.data())
    @settings(max_examples=30)
    def test_row_count_matches_split_membership(self, data):
        n = data.draw(st.integers(1, 12))
        splits = data.draw(
            st.lists(st.sampled_from(["train", "val", "test"]), min_size=n, max_size=n)
        )
        labels = data.draw(
            st.lists(st.sampled_from(["food", "nonfood"]), min_size=n, max_size=n)
        )
        entries = tuple(
            ManifestEntry(f"s{i}", f"p{i}", labels[i], splits[i]) for i in range(n)
        )
        man = DatasetManifest(entries)
        m = matrix(np.arange(n, dtype=float)[:, None], [f"s{i}" for i in range(n)])
        for split in ("train", "val", "test"):
            sub, y = align(m, man, split)
            assert sub.n == splits.count(split) == y.shape[0]
            assert list(sub.ids) == [f"s{i}" for i in range(n) if splits[i] == split]
