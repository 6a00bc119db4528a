"""Feature-matrix and manifest data model plus their on-disk formats.

Two formats are defined here and consumed everywhere else:

* FVB1, the binary feature file: magic ``FVB1``, u32 version=1, u64 n,
  u32 d (little-endian), an id table (u16 byte length + UTF-8 bytes per
  row), then n*d float32 values row-major little-endian. Values are
  widened to float64 in memory.
* Manifest CSV: header ``id,path,label,split``, UTF-8, LF line endings.
  Labels are exactly ``food``/``nonfood``; splits are ``train``/``val``/
  ``test`` or empty while still unassigned.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlignmentError,
    CorruptionError,
    FormatError,
    ShapeError,
    ValidationError,
    VersionError,
)

FVB1_MAGIC = b"FVB1"
FVB1_VERSION = 1

LABELS = ("food", "nonfood")
SPLITS = ("train", "val", "test")

FOOD = 1
NONFOOD = -1

_LABEL_TO_INT = {"food": FOOD, "nonfood": NONFOOD}
_INT_TO_LABEL = {FOOD: "food", NONFOOD: "nonfood"}


def label_to_int(token: str) -> int:
    try:
        return _LABEL_TO_INT[token]
    except KeyError:
        raise ValidationError(f"unknown label {token!r}") from None


def int_to_label(value: int) -> str:
    try:
        return _INT_TO_LABEL[int(value)]
    except KeyError:
        raise ValidationError(f"label value must be +1 or -1, got {value}") from None


@dataclass(frozen=True)
class FeatureMatrix:
    """n x d feature values (float64 in memory) with per-row sample ids."""

    values: np.ndarray
    ids: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ShapeError(f"feature values must be 2-d, got shape {values.shape}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ids", tuple(self.ids))
        if len(self.ids) != values.shape[0]:
            raise ValidationError(
                f"{len(self.ids)} ids for {values.shape[0]} rows"
            )
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("sample ids must be pairwise distinct")
        if values.size and not np.isfinite(values).all():
            raise ValidationError("feature values must be finite (no NaN/Inf)")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: str
    label: str
    split: str | None = None  # None while unassigned


@dataclass(frozen=True)
class DatasetManifest:
    """Ordered per-sample records; ordering is stable, as read."""

    entries: tuple[ManifestEntry, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        for e in self.entries:
            if e.id in seen:
                raise ValidationError(f"duplicate manifest id {e.id!r}")
            seen.add(e.id)
            if e.label not in LABELS:
                raise ValidationError(f"unknown label {e.label!r} for id {e.id!r}")
            if e.split is not None and e.split not in SPLITS:
                raise ValidationError(f"unknown split {e.split!r} for id {e.id!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.entries)

    def with_splits(self, split_of: dict[str, str]) -> "DatasetManifest":
        """Return a copy with splits assigned from an id -> split mapping."""
        return DatasetManifest(
            tuple(
                ManifestEntry(e.id, e.path, e.label, split_of.get(e.id, e.split))
                for e in self.entries
            )
        )


def write_feature_file(m: FeatureMatrix, path) -> None:
    """Serialize a feature matrix to FVB1. Deterministic: no timestamps."""
    buf = io.BytesIO()
    buf.write(FVB1_MAGIC)
    buf.write(struct.pack("<IQI", FVB1_VERSION, m.n, m.d))
    for sample_id in m.ids:
        raw = sample_id.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValidationError(f"id too long for FVB1 id table: {sample_id!r}")
        buf.write(struct.pack("<H", len(raw)))
        buf.write(raw)
    buf.write(np.ascontiguousarray(m.values, dtype="<f4").tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def read_feature_file(path) -> FeatureMatrix:
    """Parse an FVB1 file back into a FeatureMatrix (float32 widened to float64)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != FVB1_MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:4]!r}, expected {FVB1_MAGIC!r}")
    off = 4
    try:
        version, n, d = struct.unpack_from("<IQI", blob, off)
    except struct.error:
        raise CorruptionError(f"{path}: truncated header") from None
    off += struct.calcsize("<IQI")
    if version != FVB1_VERSION:
        raise VersionError(f"{path}: unsupported FVB1 version {version}")
    ids = []
    for _ in range(n):
        if off + 2 > len(blob):
            raise CorruptionError(f"{path}: truncated id table")
        (length,) = struct.unpack_from("<H", blob, off)
        off += 2
        if off + length > len(blob):
            raise CorruptionError(f"{path}: truncated id table")
        ids.append(blob[off : off + length].decode("utf-8"))
        off += length
    payload = n * d * 4
    if len(blob) - off != payload:
        raise CorruptionError(
            f"{path}: expected {payload} value bytes, found {len(blob) - off}"
        )
    values = np.frombuffer(blob, dtype="<f4", count=n * d, offset=off)
    values = values.astype(np.float64).reshape(n, d)
    try:
        return FeatureMatrix(values=values, ids=tuple(ids))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def read_manifest(path) -> DatasetManifest:
    """Parse a manifest CSV, validating tokens with line numbers."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty manifest file") from None
        if header != ["id", "path", "label", "split"]:
            raise FormatError(
                f"{path}: manifest header must be id,path,label,split, got {header}"
            )
        entries = []
        seen: set[str] = set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValidationError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            sample_id, sample_path, label, split = row
            if sample_id in seen:
                raise ValidationError(f"{path}:{lineno}: duplicate id {sample_id!r}")
            seen.add(sample_id)
            if label not in LABELS:
                raise ValidationError(f"{path}:{lineno}: unknown label {label!r}")
            if split and split not in SPLITS:
                raise ValidationError(f"{path}:{lineno}: unknown split {split!r}")
            entries.append(
                ManifestEntry(sample_id, sample_path, label, split if split else None)
            )
    return DatasetManifest(tuple(entries))


def write_manifest(man: DatasetManifest, path) -> None:
    """Write a manifest CSV (UTF-8, LF endings); deterministic byte-for-byte."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "path", "label", "split"])
        for e in man.entries:
            writer.writerow([e.id, e.path, e.label, e.split or ""])


def align(
    m: FeatureMatrix, man: DatasetManifest, split: str
) -> tuple[FeatureMatrix, np.ndarray]:
    """Rows of ``m`` restricted to one split, in manifest order, with +/-1 labels."""
    if split not in SPLITS:
        raise ValidationError(f"unknown split selector {split!r}")
    selected = [e for e in man.entries if e.split == split]
    row_of = {sample_id: i for i, sample_id in enumerate(m.ids)}
    missing = [e.id for e in selected if e.id not in row_of]
    if missing:
        raise AlignmentError(
            f"{len(missing)} manifest id(s) missing from feature matrix: "
            + ", ".join(missing[:10])
            + ("..." if len(missing) > 10 else "")
        )
    idx = [row_of[e.id] for e in selected]
    values = m.values[idx] if idx else np.empty((0, m.d))
    labels = np.array([label_to_int(e.label) for e in selected], dtype=np.int64)
    out = FeatureMatrix(values=values, ids=tuple(e.id for e in selected))
    return out, labels
