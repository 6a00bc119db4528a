"""3-fold cross-validated grid search over (C, gamma), then final retraining.

The default grids are 14 values per parameter, log-uniform with exact
endpoints: C in [1e-4, 1e2], gamma in [1e-8, 1e-2]. Fold assignment is
stratified per class, round-robin after a seeded shuffle, so the search
is deterministic given its seed. The best cell maximizes mean CV
accuracy; ties prefer smaller C, then smaller gamma.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SearchError, ValidationError
from .svm import KernelParams, SvmModel, SvmSettings, decision_values, smo_train

DEFAULT_C_RANGE = (1e-4, 1e2, 14)
DEFAULT_GAMMA_RANGE = (1e-8, 1e-2, 14)
DEFAULT_FOLDS = 3
DEFAULT_SEED = 42


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n values uniformly spaced on a base-10 log scale, endpoints exact."""
    if not (lo > 0):
        raise DomainError(f"grid lower bound must be > 0, got {lo}")
    if not (hi > lo):
        raise DomainError(f"grid upper bound must exceed lower, got [{lo}, {hi}]")
    if n < 2:
        raise DomainError(f"grid needs at least 2 values, got {n}")
    e0 = math.log10(lo)
    e1 = math.log10(hi)
    values = np.array([10.0 ** (e0 + i * (e1 - e0) / (n - 1)) for i in range(n)])
    values[0] = lo
    values[-1] = hi
    return values


@dataclass(frozen=True)
class SearchGrid:
    c_values: np.ndarray
    gamma_values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c_values", np.asarray(self.c_values, dtype=np.float64))
        object.__setattr__(self, "gamma_values", np.asarray(self.gamma_values, dtype=np.float64))

    @classmethod
    def default(cls) -> "SearchGrid":
        return cls(log_grid(*DEFAULT_C_RANGE), log_grid(*DEFAULT_GAMMA_RANGE))


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    fold_of: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "fold_of", np.asarray(self.fold_of, dtype=np.int64))


@dataclass(frozen=True)
class SearchResult:
    best_c: float
    best_gamma: float
    table: np.ndarray  # mean CV accuracy per (c, gamma) cell
    per_cell_folds: np.ndarray  # (n_c, n_gamma, k) fold accuracies
    converged: np.ndarray  # (n_c, n_gamma, k) solver convergence flags
    grid: SearchGrid


def stratified_kfold(labels: np.ndarray, k: int, seed: int) -> FoldAssignment:
    """Per-class round-robin fold assignment after a seeded shuffle.

    Positives (+1) are assigned first, then negatives. The round-robin
    offset carries over between classes so that both the per-class and
    the total fold sizes differ by at most 1.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if k < 2:
        raise DomainError(f"fold count must be >= 2, got {k}")
    if n < k:
        raise ValidationError(f"{n} samples cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    fold_of = np.full(n, -1, dtype=np.int64)
    offset = 0
    for cls in (1, -1):
        members = np.flatnonzero(labels == cls)
        if members.shape[0] < k:
            raise ValidationError(
                f"class {cls:+d} has {members.shape[0]} members, fewer than k={k}"
            )
        order = rng.permutation(members)
        fold_of[order] = (offset + np.arange(order.shape[0])) % k
        offset = (offset + order.shape[0]) % k
    return FoldAssignment(k=k, fold_of=fold_of, seed=seed)


def grid_search(
    x: np.ndarray,
    y: np.ndarray,
    grid: SearchGrid,
    folds: FoldAssignment,
    settings: SvmSettings = SvmSettings(),
) -> SearchResult:
    """Evaluate every (C, gamma) cell with k-fold CV accuracy.

    Cells whose solver hits the iteration cap still score their achieved
    accuracy; the flag lands in ``converged``. A cell whose training is
    outright invalid (e.g. a single-class fold) aborts the search.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.shape[0] != y.shape[0]:
        raise ValidationError("feature rows and labels differ in length")
    if folds.fold_of.shape[0] != y.shape[0]:
        raise ValidationError("fold assignment does not match the sample count")
    n_c = grid.c_values.shape[0]
    n_g = grid.gamma_values.shape[0]
    per_cell = np.zeros((n_c, n_g, folds.k))
    converged = np.zeros((n_c, n_g, folds.k), dtype=bool)

    for ci, c in enumerate(grid.c_values):
        for gi, gamma in enumerate(grid.gamma_values):
            params = KernelParams(gamma=float(gamma), coef0=settings.coef0)
            for f in range(folds.k):
                train_mask = folds.fold_of != f
                try:
                    model = smo_train(
                        x[train_mask],
                        y[train_mask],
                        float(c),
                        params,
                        tol=settings.tol,
                        max_iter=settings.max_iter,
                        cache_mb=settings.cache_mb,
                    )
                except ValidationError as exc:
                    raise SearchError(
                        f"cell (C={c:g}, gamma={gamma:g}), fold {f}: {exc}"
                    ) from exc
                val = x[~train_mask]
                pred = _predict_rows(model, val)
                per_cell[ci, gi, f] = float(np.mean(pred == y[~train_mask]))
                converged[ci, gi, f] = model.meta.converged

    table = per_cell.mean(axis=2)
    best_ci, best_gi = _select_best(table)
    return SearchResult(
        best_c=float(grid.c_values[best_ci]),
        best_gamma=float(grid.gamma_values[best_gi]),
        table=table,
        per_cell_folds=per_cell,
        converged=converged,
        grid=grid,
    )


def _predict_rows(model: SvmModel, rows: np.ndarray) -> np.ndarray:
    dec = decision_values(model, rows)
    return np.where(dec >= 0.0, 1, -1)


def _select_best(table: np.ndarray) -> tuple[int, int]:
    # ascending scan with strict improvement: ties resolve to the
    # smallest C index, then the smallest gamma index
    best = (-np.inf, 0, 0)
    for ci in range(table.shape[0]):
        for gi in range(table.shape[1]):
            if table[ci, gi] > best[0]:
                best = (table[ci, gi], ci, gi)
    return best[1], best[2]


def train_final(
    x: np.ndarray,
    y: np.ndarray,
    best: tuple[float, float],
    settings: SvmSettings = SvmSettings(),
) -> SvmModel:
    """Retrain on the full training set with the selected (C, gamma)."""
    c, gamma = best
    params = KernelParams(gamma=float(gamma), coef0=settings.coef0)
    return smo_train(
        x,
        y,
        float(c),
        params,
        tol=settings.tol,
        max_iter=settings.max_iter,
        cache_mb=settings.cache_mb,
    )


def write_search_csv(result: SearchResult, path) -> None:
    """Export per-fold accuracies as c,gamma,fold,accuracy plus a summary row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["c", "gamma", "fold", "accuracy"])
        n_c, n_g, k = result.per_cell_folds.shape
        for ci in range(n_c):
            for gi in range(n_g):
                for f in range(k):
                    writer.writerow(
                        [
                            format(result.grid.c_values[ci], ".17g"),
                            format(result.grid.gamma_values[gi], ".17g"),
                            f,
                            format(result.per_cell_folds[ci, gi, f], ".17g"),
                        ]
                    )
        best_mean = result.table[
            int(np.argmax(result.grid.c_values == result.best_c)),
            int(np.argmax(result.grid.gamma_values == result.best_gamma)),
        ]
        writer.writerow(
            [
                format(result.best_c, ".17g"),
                format(result.best_gamma, ".17g"),
                "best",
                format(best_mean, ".17g"),
            ]
        )
