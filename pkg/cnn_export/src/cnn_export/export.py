"""Batch image inference dumping penultimate-layer embeddings to FVB1.

The default extractor is torchvision's ImageNet-pretrained GoogLeNet with
the 1024-d global-average-pool output (the layer feeding the classifier),
inference-only: resize to 256x256, center-crop 224, ImageNet mean/std
normalization, no augmentation. Extractors are pluggable through a
registry; ``stub-<dim>`` provides a deterministic weight-free extractor so
the pipeline machinery can run and be tested offline.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .fvb import read_manifest_rows, write_fvb1

RESIZE_TO = 256
CROP_TO = 224
IMAGENET_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
IMAGENET_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)

GOOGLENET_DIM = 1024


class ConfigError(ValueError):
    pass


class ImageError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExportConfig:
    manifest: str
    out: str
    model: str = "googlenet"
    batch: int = 32
    on_error: str = "abort"  # or "skip": log to stderr and drop the row

    def __post_init__(self):
        if self.batch < 1:
            raise ConfigError(f"batch size must be >= 1, got {self.batch}")
        if self.on_error not in ("abort", "skip"):
            raise ConfigError(f"on_error must be abort or skip, got {self.on_error!r}")


def preprocess(image: Image.Image) -> np.ndarray:
    """Resize 256x256, center-crop 224, scale to [0,1], ImageNet-normalize.

    Returns HWC float32; extractors needing CHW transpose themselves.
    """
    rgb = image.convert("RGB").resize((RESIZE_TO, RESIZE_TO), Image.BILINEAR)
    arr = np.asarray(rgb, dtype=np.float32) / 255.0
    lo = (RESIZE_TO - CROP_TO) // 2
    arr = arr[lo : lo + CROP_TO, lo : lo + CROP_TO, :]
    return (arr - IMAGENET_MEAN) / IMAGENET_STD


class StubExtractor:
    """Deterministic, weight-free features: cell-averaged channel intensities
    followed by a fixed seeded projection to the requested dimension."""

    GRID = 8

    def __init__(self, dim: int):
        self.dim = dim
        cells = self.GRID * self.GRID * 3
        rng = np.random.default_rng(dim)
        self._projection = rng.standard_normal((cells, dim)).astype(np.float64)

    def __call__(self, batch: np.ndarray) -> np.ndarray:
        b, h, w, _ = batch.shape
        cell = h // self.GRID
        trimmed = batch[:, : cell * self.GRID, : cell * self.GRID, :]
        pooled = trimmed.reshape(b, self.GRID, cell, self.GRID, cell, 3).mean(axis=(2, 4))
        return pooled.reshape(b, -1).astype(np.float64) @ self._projection


class GoogLeNetExtractor:
    """ImageNet-pretrained GoogLeNet, 1024-d pool layer before the classifier."""

    dim = GOOGLENET_DIM

    def __init__(self):
        try:
            import torch
            from torchvision.models import GoogLeNet_Weights, googlenet
        except ImportError as exc:
            raise ConfigError(
                "the googlenet extractor needs torch and torchvision installed"
            ) from exc
        try:
            model = googlenet(weights=GoogLeNet_Weights.IMAGENET1K_V1)
        except Exception as exc:
            raise ConfigError(
                f"pretrained GoogLeNet weights are not available locally: {exc}"
            ) from exc
        model.eval()
        torch.set_num_threads(1)  # bit-deterministic inference
        self._torch = torch
        self._model = model
        self._pooled = None
        model.avgpool.register_forward_hook(self._capture)

    def _capture(self, module, args, output):
        self._pooled = output

    def __call__(self, batch: np.ndarray) -> np.ndarray:
        torch = self._torch
        tensor = torch.from_numpy(np.ascontiguousarray(batch.transpose(0, 3, 1, 2)))
        with torch.no_grad():
            self._model(tensor)
        pooled = self._pooled.flatten(1)
        return pooled.numpy().astype(np.float64)


def build_extractor(model: str):
    if model == "googlenet":
        return GoogLeNetExtractor()
    if model.startswith("stub-"):
        try:
            dim = int(model.split("-", 1)[1])
        except ValueError:
            raise ConfigError(f"stub extractor wants stub-<dim>, got {model!r}") from None
        if dim < 1:
            raise ConfigError("stub dimension must be >= 1")
        return StubExtractor(dim)
    raise ConfigError(f"unknown model identifier {model!r}")


def export_features(cfg: ExportConfig) -> int:
    """Embed every manifest image and write the FVB1 file; returns row count.

    Rows come out in manifest order with manifest ids. With
    ``on_error="abort"`` any unreadable image raises; with ``"skip"`` it is
    logged to stderr and dropped.
    """
    rows = read_manifest_rows(cfg.manifest)
    extractor = build_extractor(cfg.model)
    base = os.path.dirname(os.path.abspath(cfg.manifest))

    kept_ids: list[str] = []
    chunks: list[np.ndarray] = []
    pending: list[np.ndarray] = []

    def flush():
        if not pending:
            return
        features = extractor(np.stack(pending))
        if features.shape != (len(pending), extractor.dim):
            raise ConfigError(
                f"extractor produced shape {features.shape}, declared dim {extractor.dim}"
            )
        chunks.append(features)
        pending.clear()

    for row in rows:
        path = row.path if os.path.isabs(row.path) else os.path.join(base, row.path)
        try:
            with Image.open(path) as image:
                pending.append(preprocess(image))
        except (OSError, ValueError) as exc:
            if cfg.on_error == "abort":
                raise ImageError(f"{row.id}: cannot read {path}: {exc}") from exc
            print(f"skipping {row.id}: {exc}", file=sys.stderr)
            continue
        kept_ids.append(row.id)
        if len(pending) >= cfg.batch:
            flush()
    flush()

    if chunks:
        values = np.vstack(chunks)
    else:
        values = np.empty((0, extractor.dim))
    write_fvb1(kept_ids, values, cfg.out)
    return len(kept_ids)
