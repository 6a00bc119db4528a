"""The two file interfaces this tool speaks: manifest CSV in, FVB1 out.

Both are implemented against their published layouts so the exporter works
standalone: manifest CSV carries header ``id,path,label,split``; FVB1 is
magic ``FVB1``, u32 version=1, u64 n, u32 d (little-endian), an id table
(u16 byte length + UTF-8 bytes per row), then n*d float32 values row-major
little-endian.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass

import numpy as np

FVB1_MAGIC = b"FVB1"
FVB1_VERSION = 1


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestRow:
    id: str
    path: str


def read_manifest_rows(path) -> list[ManifestRow]:
    """ids and paths in file order; labels/splits are not this tool's concern."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(f"{path}: empty manifest") from None
        if header != ["id", "path", "label", "split"]:
            raise ManifestError(
                f"{path}: manifest header must be id,path,label,split, got {header}"
            )
        rows = []
        seen: set[str] = set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ManifestError(f"{path}:{lineno}: expected 4 fields")
            if row[0] in seen:
                raise ManifestError(f"{path}:{lineno}: duplicate id {row[0]!r}")
            seen.add(row[0])
            rows.append(ManifestRow(id=row[0], path=row[1]))
    return rows


def write_fvb1(ids: list[str], values: np.ndarray, path) -> None:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != len(ids):
        raise ValueError(f"{len(ids)} ids for value block of shape {values.shape}")
    if values.size and not np.isfinite(values).all():
        raise ValueError("refusing to write non-finite feature values")
    if len(set(ids)) != len(ids):
        raise ValueError("ids must be unique")
    buf = io.BytesIO()
    buf.write(FVB1_MAGIC)
    buf.write(struct.pack("<IQI", FVB1_VERSION, values.shape[0], values.shape[1]))
    for sample_id in ids:
        raw = sample_id.encode("utf-8")
        buf.write(struct.pack("<H", len(raw)))
        buf.write(raw)
    buf.write(np.ascontiguousarray(values, dtype="<f4").tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())
