"""Soft-margin binary SVM with sigmoid kernel, trained by SMO.

The solver is sequential minimal optimization with maximal-violating-pair
working-set selection, stopping when the KKT violation (gap between the
most violating up/low candidates) drops below ``tol``. The sigmoid kernel
tanh(gamma*<x,y> + coef0) is not positive semi-definite; whenever the
pairwise curvature eta = K_ii + K_jj - 2*K_ij is non-positive it is
replaced by 1e-12, which drives the update to the box boundary. Kernel
rows are memoized in an LRU bounded by a memory budget so large training
sets never materialize a full Gram matrix.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeError, ValidationError
from .tensorio import FeatureMatrix

CURVATURE_FLOOR = 1e-12  # eta substitute for non-PSD kernel directions
SV_THRESHOLD = 1e-12  # alphas at or below this are stripped from the model


@dataclass(frozen=True)
class KernelParams:
    gamma: float
    coef0: float = 0.0

    def __post_init__(self):
        if not (self.gamma > 0):
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        if not np.isfinite(self.coef0):
            raise DomainError("coef0 must be finite")


@dataclass(frozen=True)
class SvmSettings:
    """Solver knobs shared by grid search and final training."""

    tol: float = 1e-3
    max_iter: int = 10_000_000
    coef0: float = 0.0
    cache_mb: float = 512.0


@dataclass(frozen=True)
class TrainingMeta:
    iterations: int
    kkt_violation: float
    converged: bool
    dual_objective: float


@dataclass(frozen=True)
class SvmModel:
    params: KernelParams
    c: float
    support_vectors: np.ndarray  # m x k
    dual_coefs: np.ndarray  # m, alpha_i * y_i
    bias: float
    meta: TrainingMeta

    def __post_init__(self):
        sv = np.asarray(self.support_vectors, dtype=np.float64)
        dc = np.asarray(self.dual_coefs, dtype=np.float64)
        if sv.ndim != 2 or dc.shape != (sv.shape[0],):
            raise ShapeError("support_vectors must be m x k with an m-vector of dual coefs")
        if np.any(np.abs(dc) > self.c + 1e-12):
            raise ValidationError("dual coefficients exceed the box constraint")
        if np.any(dc == 0.0):
            raise ValidationError("dual coefficients must be nonzero")
        if dc.size and abs(dc.sum()) > 1e-6 * self.c * dc.size:
            raise ValidationError("dual coefficients violate the equality constraint")
        object.__setattr__(self, "support_vectors", sv)
        object.__setattr__(self, "dual_coefs", dc)

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]


def sigmoid_kernel(x: np.ndarray, y: np.ndarray, p: KernelParams) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError(f"kernel operands must be equal-length vectors, got {x.shape} vs {y.shape}")
    return float(np.tanh(p.gamma * (x @ y) + p.coef0))


class KernelCache:
    """LRU over kernel rows; capacity derived from a byte budget."""

    def __init__(self, x: np.ndarray, params: KernelParams, budget_mb: float = 512.0):
        self.x = x
        self.params = params
        n = x.shape[0]
        row_bytes = max(1, n * 8)
        self.capacity = max(1, int(budget_mb * 2**20) // row_bytes)
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self.diag = np.tanh(
            params.gamma * np.einsum("ij,ij->i", x, x) + params.coef0
        )

    def row(self, i: int) -> np.ndarray:
        cached = self._rows.get(i)
        if cached is not None:
            self._rows.move_to_end(i)
            return cached
        row = np.tanh(self.params.gamma * (self.x @ self.x[i]) + self.params.coef0)
        self._rows[i] = row
        if len(self._rows) > self.capacity:
            self._rows.popitem(last=False)
        return row


def _dual_objective(alpha: np.ndarray, y: np.ndarray, cache: KernelCache) -> float:
    """W(alpha) = sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij, recomputed fresh."""
    active = np.flatnonzero(alpha > 0)
    quad = 0.0
    for i in active:
        quad += alpha[i] * y[i] * float(cache.row(i)[active] @ (alpha[active] * y[active]))
    return float(alpha.sum() - 0.5 * quad)


def smo_train(
    x: np.ndarray,
    y: np.ndarray,
    c: float,
    params: KernelParams,
    tol: float = 1e-3,
    max_iter: int = 10_000_000,
    cache_mb: float = 512.0,
    audit: bool = False,
) -> SvmModel:
    """Solve the soft-margin dual to KKT violation < tol and package the model.

    With ``audit=True`` the dual objective is tracked each iteration and
    asserted non-decreasing (slow; intended for tests).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ShapeError(f"X must be n x k with an n-vector y, got {x.shape} vs {y.shape}")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValidationError("labels must be +1/-1")
    n = x.shape[0]
    if n < 2:
        raise ValidationError(f"training needs at least 2 samples, got {n}")
    if not ((y > 0).any() and (y < 0).any()):
        raise ValidationError("training set must contain both classes")
    if not (c > 0):
        raise DomainError(f"C must be > 0, got {c}")

    cache = KernelCache(x, params, budget_mb=cache_mb)
    qd = cache.diag
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a'Qa - sum(a)
    pos = y > 0

    iterations = 0
    gap = np.inf
    converged = False
    prev_dual = -np.inf

    while iterations < max_iter:
        r = -y * grad
        up = np.where(pos, alpha < c, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < c)
        up_vals = np.where(up, r, -np.inf)
        low_vals = np.where(low, r, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        gap = up_vals[i] - low_vals[j]
        if gap <= tol:
            converged = True
            break

        ki = cache.row(i)
        kj = cache.row(j)
        eta = qd[i] + qd[j] - 2.0 * ki[j]
        if eta <= 0:
            eta = CURVATURE_FLOOR  # non-PSD direction: step lands on the box
        old_ai = alpha[i]
        old_aj = alpha[j]
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / eta
            diff = old_ai - old_aj
            ai = old_ai + delta
            aj = old_aj + delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
            if diff > 0:
                if ai > c:
                    ai = c
                    aj = c - diff
            else:
                if aj > c:
                    aj = c
                    ai = c + diff
        else:
            delta = (grad[i] - grad[j]) / eta
            total = old_ai + old_aj
            ai = old_ai - delta
            aj = old_aj + delta
            if total > c:
                if ai > c:
                    ai = c
                    aj = total - c
            else:
                if aj < 0:
                    aj = 0.0
                    ai = total
            if total > c:
                if aj > c:
                    aj = c
                    ai = total - c
            else:
                if ai < 0:
                    ai = 0.0
                    aj = total
        alpha[i] = ai
        alpha[j] = aj
        grad += (y * ki) * (y[i] * (ai - old_ai))
        grad += (y * kj) * (y[j] * (aj - old_aj))
        iterations += 1

        if audit:
            dual = 0.5 * (alpha.sum() - alpha @ grad)
            scale = max(1.0, abs(dual))
            if dual < prev_dual - 1e-9 * scale:
                raise AssertionError(
                    f"dual objective decreased: {prev_dual!r} -> {dual!r} at iter {iterations}"
                )
            prev_dual = dual

    dual_objective = _dual_objective(alpha, y, cache)

    sv_mask = alpha > SV_THRESHOLD
    free = sv_mask & (alpha < c * (1.0 - 1e-12))
    r = -y * grad
    if free.any():
        bias = float(r[free].mean())
    else:
        # every SV sits at C here: alphas at 0 with y=+1 and at C with
        # y=-1 bound b from below, the mirror cases from above; take the
        # midpoint of the interval
        at_zero = alpha <= SV_THRESHOLD
        lb_mask = (at_zero & pos) | (sv_mask & ~pos)
        ub_mask = (at_zero & ~pos) | (sv_mask & pos)
        lb = r[lb_mask].max() if lb_mask.any() else -np.inf
        ub = r[ub_mask].min() if ub_mask.any() else np.inf
        if np.isfinite(lb) and np.isfinite(ub):
            bias = float((lb + ub) / 2.0)
        elif np.isfinite(lb):
            bias = float(lb)
        else:
            bias = float(ub)

    meta = TrainingMeta(
        iterations=iterations,
        kkt_violation=float(gap),
        converged=converged,
        dual_objective=dual_objective,
    )
    return SvmModel(
        params=params,
        c=float(c),
        support_vectors=x[sv_mask].copy(),
        dual_coefs=(alpha * y)[sv_mask].copy(),
        bias=bias,
        meta=meta,
    )


def decision_values(m: SvmModel, x: np.ndarray) -> np.ndarray:
    """Decision function for a batch of rows (n x k)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != m.dim:
        raise ShapeError(f"expected rows of dimension {m.dim}, got shape {x.shape}")
    if x.shape[0] == 0:
        return np.empty(0)
    if m.support_vectors.shape[0] == 0:
        return np.full(x.shape[0], m.bias)
    k = np.tanh(m.params.gamma * (x @ m.support_vectors.T) + m.params.coef0)
    return k @ m.dual_coefs + m.bias


def decision(m: SvmModel, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != m.dim:
        raise ShapeError(f"expected a vector of dimension {m.dim}, got shape {x.shape}")
    return float(decision_values(m, x[None, :])[0])


def predict(m: SvmModel, features: FeatureMatrix) -> np.ndarray:
    """Sign of the decision value per row; exact zero maps to +1 (food)."""
    dec = decision_values(m, features.values)
    return np.where(dec >= 0.0, 1, -1).astype(np.int64)
