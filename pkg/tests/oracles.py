"""Independent reference computations the test suite checks the library against.

Nothing here may import solver internals: the eigen oracle goes through the
characteristic polynomial, and the SVM oracles enumerate the dual feasible
set directly (full lattice enumeration for small n, stationary-point
enumeration over box faces for the rest).
"""

from __future__ import annotations

import itertools

import numpy as np


def char_poly_coeffs(c: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients via the Faddeev-LeVerrier recursion.

    Returns [1, a_1, ..., a_d] with p(x) = x^d + a_1 x^(d-1) + ... + a_d.
    """
    d = c.shape[0]
    coeffs = [1.0]
    m = np.zeros_like(c)
    a = 1.0
    for k in range(1, d + 1):
        m = c @ m + a * np.eye(d)
        a = -np.trace(c @ m) / k
        coeffs.append(a)
    return np.array(coeffs)


def char_poly_eigenvalues(c: np.ndarray) -> np.ndarray:
    """Eigenvalues as roots of the characteristic polynomial, descending.

    Independent of any symmetric eigensolver: coefficients come from the
    trace recursion, roots from companion-matrix root finding.
    """
    roots = np.roots(char_poly_coeffs(c))
    return np.sort(roots.real)[::-1]


def sigmoid_gram(x: np.ndarray, gamma: float, coef0: float) -> np.ndarray:
    return np.tanh(gamma * (x @ x.T) + coef0)


def dual_objective(alpha: np.ndarray, y: np.ndarray, k: np.ndarray) -> float:
    q = (y[:, None] * y[None, :]) * k
    return float(alpha.sum() - 0.5 * alpha @ q @ alpha)


def lattice_dual_oracle(
    x: np.ndarray, y: np.ndarray, c: float, gamma: float, coef0: float, steps: int = 200
) -> float:
    """Exhaustive max of the dual over the lattice {0, C/steps, ..., C}^n
    intersected with the equality constraint sum(alpha*y) == 0.

    The first n-1 coordinates enumerate freely; the last is solved from the
    constraint and kept only when it lands inside the box (it is always on
    the lattice because labels are +/-1). Feasible only for small n.
    """
    n = x.shape[0]
    k = sigmoid_gram(x, gamma, coef0)
    q = (y[:, None] * y[None, :]) * k
    h = c / steps
    axis = np.arange(steps + 1) * h
    best = -np.inf
    # chunk over the first free coordinate to bound memory
    free = n - 1
    grids = np.meshgrid(*([axis] * (free - 1)), indexing="ij") if free > 1 else []
    for a0 in axis:
        if free == 1:
            partial = np.array([[a0]])
        else:
            partial = np.stack([np.full_like(grids[0], a0)] + list(grids), axis=-1)
            partial = partial.reshape(-1, free)
        s = partial @ y[:free]
        last = -y[-1] * s
        ok = (last >= 0.0) & (last <= c)
        if not ok.any():
            continue
        alpha = np.concatenate([partial[ok], last[ok][:, None]], axis=1)
        w = alpha.sum(axis=1) - 0.5 * np.einsum("bi,ij,bj->b", alpha, q, alpha)
        best = max(best, float(w.max()))
    return best


def face_dual_oracle(
    x: np.ndarray, y: np.ndarray, c: float, gamma: float, coef0: float
) -> float:
    """Global max of the continuous dual by stationary-point enumeration.

    Every candidate optimum lies on some box face {alpha_i in {0, C} fixed,
    rest free}; on each face the stationarity system with the equality
    multiplier is linear. Upper-bounds any lattice maximum, so asserting
    `solver >= face_oracle - tol` is stronger than the lattice comparison.
    """
    n = x.shape[0]
    k = sigmoid_gram(x, gamma, coef0)
    q = (y[:, None] * y[None, :]) * k
    best = -np.inf
    for statuses in itertools.product((0.0, c, None), repeat=n):
        fixed = np.array([s if s is not None else 0.0 for s in statuses])
        free_idx = [i for i, s in enumerate(statuses) if s is None]
        if not free_idx:
            if abs(fixed @ y) <= 1e-9 * max(1.0, c):
                best = max(best, dual_objective(fixed, y, k))
            continue
        f = np.array(free_idx)
        others = np.array([i for i in range(n) if statuses[i] is not None], dtype=int)
        qff = q[np.ix_(f, f)]
        rhs_top = np.ones(len(f))
        ssum = 0.0
        if others.size:
            rhs_top = rhs_top - q[np.ix_(f, others)] @ fixed[others]
            ssum = -(y[others] @ fixed[others])
        system = np.zeros((len(f) + 1, len(f) + 1))
        system[: len(f), : len(f)] = qff
        system[: len(f), -1] = y[f]
        system[-1, : len(f)] = y[f]
        rhs = np.concatenate([rhs_top, [ssum]])
        try:
            sol = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError:
            sol, *_ = np.linalg.lstsq(system, rhs, rcond=None)
            if np.linalg.norm(system @ sol - rhs) > 1e-8 * max(1.0, np.linalg.norm(rhs)):
                continue  # inconsistent: no stationary point on this face
        alpha_f = sol[:-1]
        if np.any(alpha_f < -1e-9) or np.any(alpha_f > c + 1e-9):
            continue
        alpha = fixed.copy()
        alpha[f] = np.clip(alpha_f, 0.0, c)
        if abs(alpha @ y) > 1e-7 * max(1.0, c):
            continue
        best = max(best, dual_objective(alpha, y, k))
    return best


def make_blobs(
    seed: int, n_per_class: int, dim: int, separation: float
) -> tuple[np.ndarray, np.ndarray]:
    """Two unit-covariance Gaussian blobs at +/- separation/2 along each axis."""
    rng = np.random.default_rng(seed)
    shift = (separation / 2.0) * np.ones(dim)
    pos = rng.normal(size=(n_per_class, dim)) + shift
    neg = rng.normal(size=(n_per_class, dim)) - shift
    x = np.vstack([pos, neg])
    y = np.concatenate([np.ones(n_per_class), -np.ones(n_per_class)])
    return x, y
