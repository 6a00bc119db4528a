"""Color-histogram features from binary PPM images, and variance-based
per-category image selection.

The 512-d histogram row (8 bins per channel) is the desk-scale feature
source; the selection operation ranks a category's images by squared
distance of their histogram to the category mean and keeps the most
diverse ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CorruptionError, DomainError, FormatError, ShapeError, ValidationError

DEFAULT_BINS = 8


@dataclass(frozen=True)
class RgbImage:
    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.uint8)
        if pixels.shape != (self.height, self.width, 3):
            raise ShapeError(
                f"pixel block shape {pixels.shape} does not match "
                f"{self.height}x{self.width}x3"
            )
        object.__setattr__(self, "pixels", pixels)


@dataclass(frozen=True)
class ColorHistogram:
    bins_per_channel: int
    values: np.ndarray  # bins^3, sums to 1

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.bins_per_channel**3,):
            raise ShapeError("histogram length must be bins_per_channel cubed")
        if abs(float(values.sum()) - 1.0) > 1e-9:
            raise ValidationError("histogram mass must sum to 1")
        object.__setattr__(self, "values", values)


def _read_ppm_token(blob: bytes, off: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comments, then take one token
    n = len(blob)
    while off < n:
        ch = blob[off : off + 1]
        if ch.isspace():
            off += 1
        elif ch == b"#":
            while off < n and blob[off : off + 1] not in (b"\n", b"\r"):
                off += 1
        else:
            break
    start = off
    while off < n and not blob[off : off + 1].isspace():
        off += 1
    if start == off:
        raise CorruptionError("unexpected end of PPM header")
    return blob[start:off], off


def load_image(path) -> RgbImage:
    """Decode a binary PPM (P6, maxval 255) exactly as stored."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:2] != b"P6":
        raise FormatError(f"{path}: not a binary PPM (magic {blob[:2]!r})")
    off = 2
    try:
        width_tok, off = _read_ppm_token(blob, off)
        height_tok, off = _read_ppm_token(blob, off)
        maxval_tok, off = _read_ppm_token(blob, off)
    except CorruptionError as exc:
        raise CorruptionError(f"{path}: {exc}") from None
    try:
        width, height, maxval = int(width_tok), int(height_tok), int(maxval_tok)
    except ValueError:
        raise FormatError(f"{path}: malformed PPM header") from None
    if width <= 0 or height <= 0:
        raise FormatError(f"{path}: non-positive dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"{path}: only maxval 255 is supported, got {maxval}")
    off += 1  # exactly one whitespace byte separates header and raster
    need = width * height * 3
    raster = blob[off : off + need]
    if len(raster) < need:
        raise CorruptionError(
            f"{path}: raster holds {len(raster)} bytes, header promises {need}"
        )
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return RgbImage(width=width, height=height, pixels=pixels)


def color_histogram(img: RgbImage, bins: int) -> ColorHistogram:
    """Normalized joint RGB histogram; bin index floor(channel*bins/256)."""
    if not (2 <= bins <= 16):
        raise DomainError(f"bins must lie in [2, 16], got {bins}")
    channels = img.pixels.reshape(-1, 3).astype(np.int64)
    binned = (channels * bins) // 256
    flat = (binned[:, 0] * bins + binned[:, 1]) * bins + binned[:, 2]
    counts = np.bincount(flat, minlength=bins**3).astype(np.float64)
    return ColorHistogram(bins_per_channel=bins, values=counts / channels.shape[0])


def histogram_features(img: RgbImage, bins: int = DEFAULT_BINS) -> np.ndarray:
    """One feature row per image: the flattened normalized histogram."""
    return color_histogram(img, bins).values


def variance_scores(vectors: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance of each row to the row mean.

    Translation-free: shifting every row by the same vector leaves the
    score ranking unchanged.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    mean = vectors.mean(axis=0)
    return ((vectors - mean) ** 2).sum(axis=1)


def select_by_variance(
    category: list[tuple[str, ColorHistogram]], n_keep: int
) -> list[str]:
    """Keep the n_keep ids whose histograms sit farthest from the category mean.

    Scores are squared Euclidean distances to the mean histogram; ties
    resolve by lexicographic id. Categories at or below n_keep pass
    through whole.
    """
    if n_keep < 1:
        raise DomainError(f"n_keep must be >= 1, got {n_keep}")
    if not category:
        raise ValidationError("category must not be empty")
    lengths = {h.values.shape[0] for _, h in category}
    if len(lengths) != 1:
        raise ShapeError("all histograms in a category must have equal length")
    scores = variance_scores(np.stack([h.values for _, h in category]))
    ranked = sorted((-scores[i], category[i][0]) for i in range(len(category)))
    return [sample_id for _, sample_id in ranked[: min(n_keep, len(category))]]
