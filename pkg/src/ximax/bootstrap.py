"""Block multiplier bootstrap for the max rank-correlation statistic.

The n-1 per-gap influence terms of each coefficient form a 1-dependent
sequence under independence. They are grouped into m non-overlapping blocks
of length q separated by single discarded terms (plus a discarded tail), the
block totals are reweighted by i.i.d. standard normal multipliers shared
across hypotheses, and the max over hypotheses of each reweighted sum
approximates the null distribution of the test statistic.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BlockTooLarge, DegenerateVariance, EmptySubset, SampleTooSmall
from . import rng as _rng

MODES = ("none", "fixed", "empirical")
STORAGE = ("dense", "streaming", "auto")

# below this many columns the thread pool costs more than it saves
_MIN_COLS_PER_THREAD = 64
_STREAM_CHUNK = 2048


@dataclass(frozen=True)
class BlockScheme:
    """Partition of the n-1 influence terms into bootstrap blocks.

    Big block k (0-based) covers term rows k*(q+1) .. k*(q+1)+q-1; the
    following single row is a separator that decorrelates adjacent blocks,
    and the final r rows are an unused remainder.
    """

    n: int
    q: int
    m: int
    r: int

    @property
    def num_terms(self) -> int:
        return self.n - 1

    @property
    def big_blocks(self) -> list[range]:
        w = self.q + 1
        return [range(k * w, k * w + self.q) for k in range(self.m)]

    @property
    def separator_indices(self) -> np.ndarray:
        return np.arange(self.m) * (self.q + 1) + self.q

    @property
    def remainder_indices(self) -> range:
        return range(self.m * (self.q + 1), self.n - 1)


def build_block_scheme(n: int, q: int) -> BlockScheme:
    """Block layout for n observations and block length q.

    Requires q >= 1 and q + 1 <= n - 1 so at least one complete block plus
    its separator fits.
    """
    if n < 3:
        raise SampleTooSmall(f"need at least 3 observations, got {n}")
    if q < 1:
        raise ValueError(f"block length must be >= 1, got {q}")
    if q + 1 > n - 1:
        raise BlockTooLarge(f"block length {q} leaves no complete block for n={n}")
    m = (n - 1) // (q + 1)
    r = (n - 1) - m * (q + 1)
    return BlockScheme(n=n, q=q, m=m, r=r)


def influence_terms(u: np.ndarray) -> np.ndarray:
    """Per-gap influence terms of the coefficient, one column per hypothesis.

    For consecutive rank fractions u_i, u_{i+1} of one column the term is
    2 - 3|u_{i+1} - u_i| - 6 u_i (1 - u_i); it has mean zero under
    independence and magnitude at most 2. Returns an (n-1, p) matrix.
    """
    u = np.asarray(u, dtype=np.float64)
    head = u[:-1]
    return 2.0 - 3.0 * np.abs(u[1:] - head) - 6.0 * head * (1.0 - head)


def block_sums(terms: np.ndarray, scheme: BlockScheme) -> np.ndarray:
    """Totals of the influence terms over each big block, shape (m, p)."""
    terms = np.asarray(terms, dtype=np.float64)
    if terms.shape[0] != scheme.num_terms:
        raise ValueError(
            f"expected {scheme.num_terms} term rows, got {terms.shape[0]}"
        )
    m, q = scheme.m, scheme.q
    used = terms[: m * (q + 1)].reshape(m, q + 1, -1)
    return used[:, :q, :].sum(axis=1)


def draw_multipliers(b_reps: int, m: int, seed: int) -> np.ndarray:
    """B x m matrix of standard normal multipliers.

    Row b comes from the stream keyed (seed, b), entry k being the k-th
    deviate, so every (b, k) cell is reproducible independently of how
    replications are scheduled.
    """
    if b_reps < 1:
        raise ValueError(f"need at least one replication, got {b_reps}")
    if m < 1:
        raise ValueError(f"need at least one block, got {m}")
    out = np.empty((b_reps, m), dtype=np.float64)
    for b in range(b_reps):
        out[b] = _rng.keyed_rng(seed, _rng.MULTIPLIERS, b).standard_normal(m)
    return out


@dataclass(frozen=True)
class BootstrapConfig:
    """Bootstrap and test settings.

    studentize selects the draw scaling: "none" divides block sums by
    sqrt(m q); "fixed" divides by sqrt(m) times the deterministic standard
    deviation sqrt(0.4 q + 0.1) of a length-q block total; "empirical"
    centers the block sums and divides by sqrt(m) times the raw second
    moment of each column's sums. q_choice "auto" picks the MSE-optimal
    block length for the sample size. storage "dense" materializes the
    B x p draw matrix, "streaming" recomputes columns on demand, "auto"
    goes dense only while B*p values fit in memory_cap_bytes.
    """

    b_reps: int = 999
    q_choice: int | str = "auto"
    studentize: str = "fixed"
    alpha: float = 0.05
    seed: int = 0
    storage: str = "dense"
    memory_cap_bytes: int = 256 << 20

    def __post_init__(self) -> None:
        if self.b_reps < 1:
            raise ValueError(f"need at least one replication, got {self.b_reps}")
        if self.q_choice != "auto":
            if not isinstance(self.q_choice, int) or self.q_choice < 1:
                raise ValueError(f"q_choice must be 'auto' or a positive int")
        if self.studentize not in MODES:
            raise ValueError(f"unknown studentize mode: {self.studentize!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.storage not in STORAGE:
            raise ValueError(f"unknown storage mode: {self.storage!r}")
        if self.memory_cap_bytes < 1:
            raise ValueError("memory_cap_bytes must be positive")


def _columns_product(multipliers: np.ndarray, coeffs: np.ndarray,
                     cols: np.ndarray, threads: int = 1) -> np.ndarray:
    """Draw statistics for the given hypothesis columns, shape (B, len(cols)).

    Each column is computed by its own matrix-vector product; dense and
    streaming storage and any thread count therefore produce bit-identical
    values.
    """
    out = np.empty((multipliers.shape[0], len(cols)), dtype=np.float64)

    def run(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            out[:, i] = multipliers @ coeffs[:, cols[i]]

    if threads <= 1 or len(cols) < _MIN_COLS_PER_THREAD:
        run(0, len(cols))
    else:
        step = math.ceil(len(cols) / threads)
        bounds = [(i, min(i + step, len(cols))) for i in range(0, len(cols), step)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda se: run(*se), bounds))
    return out


@dataclass
class BootstrapDraws:
    """Multiplier draws for all hypotheses under one block scheme.

    `dense` holds the B x p draw matrix when storage permits; otherwise
    columns are recomputed from `multipliers` and the (m, p) coefficient
    matrix on demand. All hypotheses share the same multiplier rows.
    """

    multipliers: np.ndarray
    coeffs: np.ndarray
    mode: str
    scheme: BlockScheme
    dense: np.ndarray | None = None
    threads: int = 1

    @property
    def b_reps(self) -> int:
        return self.multipliers.shape[0]

    @property
    def p(self) -> int:
        return self.coeffs.shape[1]

    def statistics(self, cols: np.ndarray | None = None) -> np.ndarray:
        """Draw statistics for the requested columns (all by default)."""
        if cols is None:
            cols = np.arange(self.p)
        cols = np.asarray(cols, dtype=np.int64)
        if self.dense is not None:
            return self.dense[:, cols]
        return _columns_product(self.multipliers, self.coeffs, cols, self.threads)


def bootstrap_statistics(totals: np.ndarray, scheme: BlockScheme,
                         multipliers: np.ndarray, mode: str,
                         storage: str = "dense",
                         memory_cap_bytes: int = 256 << 20,
                         threads: int = 1) -> BootstrapDraws:
    """Reweight block totals into bootstrap draw statistics.

    See BootstrapConfig for the studentize modes. The empirical mode raises
    DegenerateVariance if some column's block totals are all zero.
    """
    totals = np.asarray(totals, dtype=np.float64)
    if totals.ndim != 2 or totals.shape[0] != scheme.m:
        raise ValueError(f"expected ({scheme.m}, p) block totals, got {totals.shape}")
    if multipliers.ndim != 2 or multipliers.shape[1] != scheme.m:
        raise ValueError(
            f"expected (B, {scheme.m}) multipliers, got {multipliers.shape}"
        )
    m, q = scheme.m, scheme.q
    if mode == "none":
        coeffs = totals / math.sqrt(m * q)
    elif mode == "fixed":
        coeffs = totals / (math.sqrt(m) * math.sqrt(0.4 * q + 0.1))
    elif mode == "empirical":
        second = np.mean(totals * totals, axis=0)
        zero = second == 0.0
        if zero.any():
            j = int(np.flatnonzero(zero)[0])
            raise DegenerateVariance(f"block totals of column {j} are all zero")
        coeffs = (totals - totals.mean(axis=0)) / (math.sqrt(m) * np.sqrt(second))
    else:
        raise ValueError(f"unknown studentize mode: {mode!r}")

    if storage not in STORAGE:
        raise ValueError(f"unknown storage mode: {storage!r}")
    p = totals.shape[1]
    if storage == "auto":
        storage = (
            "dense"
            if multipliers.shape[0] * p * 8 <= memory_cap_bytes
            else "streaming"
        )
    dense = None
    if storage == "dense":
        dense = _columns_product(multipliers, coeffs, np.arange(p), threads)
    return BootstrapDraws(
        multipliers=multipliers,
        coeffs=coeffs,
        mode=mode,
        scheme=scheme,
        dense=dense,
        threads=threads,
    )


def subset_max(draws: BootstrapDraws, subset: np.ndarray) -> np.ndarray:
    """Per-replication maximum of the draw statistics over a hypothesis subset."""
    subset = np.asarray(subset, dtype=np.int64)
    if subset.ndim != 1 or subset.size == 0:
        raise EmptySubset("hypothesis subset is empty")
    if subset.min() < 0 or subset.max() >= draws.p:
        raise IndexError(f"subset indices must lie in [0, {draws.p})")
    if draws.dense is not None:
        return draws.dense[:, subset].max(axis=1)
    acc = np.full(draws.b_reps, -np.inf)
    for lo in range(0, subset.size, _STREAM_CHUNK):
        chunk = draws.statistics(subset[lo : lo + _STREAM_CHUNK])
        np.maximum(acc, chunk.max(axis=1), out=acc)
    return acc


def critical_value(draw_maxima: np.ndarray, alpha: float) -> float:
    """Upper alpha critical value from B draw maxima.

    Uses the k-th smallest with k = min(B, ceil((1-alpha)(B+1))). The product
    is snapped to the nearest integer before the ceiling so float rounding
    cannot shift k off its exact rational value.
    """
    draw_maxima = np.asarray(draw_maxima, dtype=np.float64)
    if draw_maxima.ndim != 1 or draw_maxima.size < 1:
        raise ValueError("need at least one draw maximum")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    b_reps = draw_maxima.size
    t = (1.0 - alpha) * (b_reps + 1)
    nearest = round(t)
    k = int(nearest) if abs(t - nearest) < 1e-9 else math.ceil(t)
    k = min(b_reps, k)
    return float(np.partition(draw_maxima, k - 1)[k - 1])
