"""Dense linear algebra helpers: norms, spectral norm, seeded Gaussian sampling.

Matrices and vectors are plain float64 numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_POWER_ITERS = 10_000
POWER_RTOL = 1e-10


class DimensionError(ValueError):
    """Raised when array shapes are empty or inconsistent."""


@dataclass(frozen=True)
class SpectralResult:
    value: float
    iterations: int
    fallback: bool


def make_rng(seed, stream: int | None = None) -> np.random.Generator:
    """Seeded PCG64 generator; ``stream`` selects an independent substream."""
    if stream is None:
        return np.random.default_rng(seed)
    return np.random.default_rng([int(seed), int(stream)])


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {a.shape}")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise DimensionError(f"empty matrix of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def euclidean_norm(v) -> float:
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size == 0:
        return 0.0
    # scaled to avoid overflow for huge entries
    s = np.max(np.abs(v))
    if s == 0.0:
        return 0.0
    return float(s * np.sqrt(np.sum((v / s) ** 2)))


def frobenius_norm(m) -> float:
    return euclidean_norm(np.asarray(m))


def _gram_top_eig_2x2(g: np.ndarray) -> float:
    a, b, d = g[0, 0], g[0, 1], g[1, 1]
    half_tr = 0.5 * (a + d)
    disc = np.hypot(0.5 * (a - d), b)
    return float(half_tr + disc)


def _is_top_eigenvalue(g: np.ndarray, lam: float) -> bool:
    shifted = lam * (1.0 + 1e-9) * np.eye(g.shape[0]) - g
    try:
        np.linalg.cholesky(shifted)
    except np.linalg.LinAlgError:
        return False
    return True


def operator_norm_info(m) -> SpectralResult:
    """Largest singular value with convergence diagnostics.

    Power iteration on the smaller Gram matrix from the normalized all-ones
    vector. Iteration stops once the eigen-residual ``||G v - lam v||`` drops
    below ``POWER_RTOL * lam``, which bounds the relative eigenvalue error by
    the same tolerance. The converged value is accepted only if
    ``lam (1 + 1e-9) I - G`` admits a Cholesky factorization, which certifies
    that no larger eigenvalue was missed (the start vector can be orthogonal
    to the top eigenvector). Otherwise, or without convergence, a dense
    symmetric eigen solve is used and ``fallback`` is set.
    """
    a = as_matrix(m)
    g = a.T @ a if a.shape[1] <= a.shape[0] else a @ a.T
    k = g.shape[0]
    if k == 1:
        return SpectralResult(float(np.sqrt(max(g[0, 0], 0.0))), 0, False)
    if k == 2:
        return SpectralResult(float(np.sqrt(max(_gram_top_eig_2x2(g), 0.0))), 0, False)

    trace = float(np.trace(g))
    if trace == 0.0:
        return SpectralResult(0.0, 0, False)

    v = np.full(k, 1.0 / np.sqrt(k))
    lam = 0.0
    for it in range(1, MAX_POWER_ITERS + 1):
        w = g @ v
        lam = float(v @ w)
        resid = euclidean_norm(w - lam * v)
        if lam > 0.0 and resid <= POWER_RTOL * lam:
            if _is_top_eigenvalue(g, lam):
                return SpectralResult(float(np.sqrt(lam)), it, False)
            break
        nw = euclidean_norm(w)
        if nw == 0.0:
            break
        v = w / nw
    top = float(np.linalg.eigvalsh(g)[-1])
    return SpectralResult(float(np.sqrt(max(top, 0.0))), MAX_POWER_ITERS, True)


def operator_norm(m) -> float:
    """Largest singular value of ``m``."""
    return operator_norm_info(m).value


def gaussian_matrix(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise DimensionError(f"rows and cols must be >= 1, got {rows}x{cols}")
    return rng.standard_normal((rows, cols))
