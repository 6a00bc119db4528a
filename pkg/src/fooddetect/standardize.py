"""Per-dimension zero-mean/unit-variance transform, fit on training data only.

Scaling uses the population (divide-by-n) standard deviation; columns with
exactly zero variance get scale 1.0 so the transform stays total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ShapeError
from .tensorio import FeatureMatrix


@dataclass(frozen=True)
class StandardizerModel:
    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        scale = np.asarray(self.scale, dtype=np.float64)
        if mean.ndim != 1 or scale.shape != mean.shape:
            raise ShapeError("mean and scale must be 1-d vectors of equal length")
        if not (scale > 0).all():
            raise ShapeError("every scale component must be > 0")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "scale", scale)

    @property
    def d(self) -> int:
        return self.mean.shape[0]


def fit_standardizer(train: FeatureMatrix) -> StandardizerModel:
    if train.n < 2:
        raise InsufficientDataError(
            f"standardizer needs at least 2 training rows, got {train.n}"
        )
    mean = train.values.mean(axis=0)
    scale = np.sqrt(train.values.var(axis=0))  # population: divide by n
    scale = np.where(scale == 0.0, 1.0, scale)
    return StandardizerModel(mean=mean, scale=scale)


def apply_standardizer(s: StandardizerModel, m: FeatureMatrix) -> FeatureMatrix:
    if m.d != s.d:
        raise ShapeError(f"standardizer has d={s.d}, matrix has d={m.d}")
    return FeatureMatrix(values=(m.values - s.mean) / s.scale, ids=m.ids)
