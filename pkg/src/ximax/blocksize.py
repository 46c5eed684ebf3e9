"""Mean-squared-error optimal block length selection.

The bootstrap variance proxy V of a studentization-free draw has, under
independence, mean 2/5 + 1/(10 q) and a variance with the closed piecewise
form below, while the target it estimates is the exact finite-sample
variance of the scaled coefficient. Balancing squared bias against variance
over the feasible grid gives the optimal block length; a cube-root rule
localizes the search to two candidates.
"""

from __future__ import annotations

import numpy as np

from .errors import BlockTooLarge, SampleTooSmall


def exact_null_variance(n: int) -> float:
    """Variance of sqrt(n) times the coefficient under independence.

    Equals n(n-2)(4n-7) / (10 (n-1)^2 (n+1)); increases with n toward the
    limit 2/5.
    """
    if n < 3:
        raise SampleTooSmall(f"need at least 3 observations, got {n}")
    n = float(n)
    return n * (n - 2.0) * (4.0 * n - 7.0) / (10.0 * (n - 1.0) ** 2 * (n + 1.0))


def bootstrap_variance_mean(q):
    """Mean of the variance proxy for block length q: 2/5 + 1/(10 q)."""
    if np.any(np.asarray(q) < 1):
        raise ValueError(f"block length must be >= 1, got {q}")
    return 0.4 + 0.1 / q


def _variance_numerator(q):
    """m times the variance of the proxy; piecewise in q, elementwise-safe."""
    general = 8.0 / 25.0 + 88.0 / (175.0 * q) - 229.0 / (700.0 * q * q)
    return np.where(q == 1, 7.0 / 20.0, np.where(q == 2, 1353.0 / 2800.0, general))


def bootstrap_variance_var(q, m):
    """Variance of the proxy for block length q over m blocks."""
    if np.any(np.asarray(q) < 1):
        raise ValueError(f"block length must be >= 1, got {q}")
    if np.any(np.asarray(m) < 1):
        raise ValueError(f"need at least one block, got {m}")
    out = _variance_numerator(np.asarray(q, dtype=np.float64)) / m
    return float(out) if out.ndim == 0 else out


def block_size_mse(n: int, q: int) -> float:
    """Mean squared error of the variance proxy against the exact variance."""
    target = exact_null_variance(n)
    if q < 1 or q > (n - 1) // 2:
        raise BlockTooLarge(f"block length {q} outside 1..{(n - 1) // 2} for n={n}")
    m = (n - 1) // (q + 1)
    bias = bootstrap_variance_mean(float(q)) - target
    return bootstrap_variance_var(float(q), m) + bias * bias


def _mse_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    target = exact_null_variance(n)
    qs = np.arange(1, (n - 1) // 2 + 1, dtype=np.float64)
    m = (n - 1) // (qs.astype(np.int64) + 1)
    bias = bootstrap_variance_mean(qs) - target
    return qs.astype(np.int64), _variance_numerator(qs) / m + bias * bias


def optimal_block_size(n: int) -> int:
    """Block length minimizing the proxy MSE; ties go to the smaller length."""
    qs, mse = _mse_grid(n)
    return int(qs[int(np.argmin(mse))])


def approx_block_size(n: int) -> float:
    """Cube-root approximation (n/16)^(1/3) to the optimal block length."""
    if n < 1:
        raise ValueError(f"need a positive sample size, got {n}")
    return float(np.cbrt(n / 16.0))


def optimal_block_size_fast(n: int) -> int:
    """Optimal block length via the two cube-root candidates.

    Compares the MSE at floor and ceil of the cube-root rule (floor clamped
    to 1) and keeps the better, preferring the ceiling on ties. Agrees with
    the full grid search.
    """
    guide = approx_block_size(n)
    lo = max(1, int(np.floor(guide)))
    hi = max(1, int(np.ceil(guide)))
    hi = min(hi, max(1, (n - 1) // 2))
    lo = min(lo, hi)
    if lo == hi:
        return lo
    return hi if block_size_mse(n, hi) <= block_size_mse(n, lo) else lo
