"""Rank machinery and the rank correlation coefficient.

The coefficient for one hypothesis column is computed from the ranks of the
column's values after sorting rows by x (concomitant ranks): with u_i the
rank fraction of the value paired with the i-th smallest x,

    xi = 1 - 3n/(n^2 - 1) * sum_i |u_{i+1} - u_i|.

It is 1 - 3/(n+1) exactly when the column is a monotone function of x and
concentrates near 0 under independence. Everything here requires tie-free
columns; `resolve_ties` enforces or repairs that up front.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateColumn, SampleTooSmall, TiesPresent
from . import rng as _rng

_JITTER_ATTEMPTS = 16


@dataclass
class PairedSample:
    """An x vector paired with p hypothesis columns.

    Parameters
    ----------
    x : array, shape (n,)
        Conditioning variable.
    y : array, shape (n, p)
        One column per hypothesis.
    names : tuple of str, optional
        Column labels; defaults to y1..yp.
    """

    x: np.ndarray
    y: np.ndarray
    names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.x.ndim != 1:
            raise ValueError("x must be one-dimensional")
        if self.y.ndim != 2:
            raise ValueError("y must be two-dimensional")
        if self.y.shape[0] != self.x.shape[0]:
            raise ValueError(
                f"x has {self.x.shape[0]} rows but y has {self.y.shape[0]}"
            )
        if self.x.shape[0] < 3:
            raise SampleTooSmall(f"need at least 3 observations, got {self.x.shape[0]}")
        if self.y.shape[1] < 1:
            raise ValueError("need at least one hypothesis column")
        if not np.isfinite(self.x).all() or not np.isfinite(self.y).all():
            raise ValueError("sample contains non-finite values")
        if not self.names:
            self.names = tuple(f"y{j + 1}" for j in range(self.y.shape[1]))
        else:
            self.names = tuple(self.names)
            if len(self.names) != self.y.shape[1]:
                raise ValueError(
                    f"{len(self.names)} names for {self.y.shape[1]} columns"
                )

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class TieBreakConfig:
    """How to handle duplicate values within a column.

    policy "error" raises on any duplicate; "jitter" perturbs every value of
    an affected column by a uniform draw scaled to the column's smallest
    nonzero gap, small enough that originally-distinct values keep their
    order. Jitter streams are keyed by (seed, column index), so the repaired
    sample is reproducible and column-local.
    """

    policy: str = "error"
    jitter_relative_scale: float = 1e-9
    seed: int = 0

    def __post_init__(self) -> None:
        if self.policy not in ("error", "jitter"):
            raise ValueError(f"unknown tie policy: {self.policy!r}")
        if not 0.0 < self.jitter_relative_scale < 0.5:
            # above 0.5 the perturbation can cross half the smallest gap and
            # reorder originally-distinct values
            raise ValueError("jitter_relative_scale must be in (0, 0.5)")


def _has_duplicates(values: np.ndarray) -> bool:
    s = np.sort(values)
    return bool((s[1:] == s[:-1]).any())


def _jitter_column(values: np.ndarray, label: str, col_index: int,
                   cfg: TieBreakConfig) -> np.ndarray:
    uniq = np.unique(values)
    if uniq.size == 1:
        raise DegenerateColumn(f"column {label!r} is constant")
    half_width = cfg.jitter_relative_scale * float(np.diff(uniq).min())
    stream = _rng.keyed_rng(cfg.seed, _rng.JITTER, col_index)
    for _ in range(_JITTER_ATTEMPTS):
        out = values + stream.uniform(-half_width, half_width, size=values.shape[0])
        if not _has_duplicates(out):
            return out
    raise TiesPresent(f"column {label!r} still has ties after jitter")


def resolve_ties(sample: PairedSample, cfg: TieBreakConfig) -> PairedSample:
    """Return a tie-free copy of `sample` per the configured policy.

    Columns without duplicates pass through untouched. Column index 0 is x,
    index j is the j-th hypothesis column; each gets its own jitter stream.
    """
    x = sample.x
    y = sample.y.copy()
    if _has_duplicates(x):
        if cfg.policy == "error":
            raise TiesPresent("column 'x' has duplicate values")
        x = _jitter_column(x, "x", 0, cfg)
    for j in range(sample.p):
        if _has_duplicates(y[:, j]):
            if cfg.policy == "error":
                raise TiesPresent(f"column {sample.names[j]!r} has duplicate values")
            y[:, j] = _jitter_column(y[:, j], sample.names[j], j + 1, cfg)
    return PairedSample(x=x, y=y, names=sample.names)


def concomitant_ranks(sample: PairedSample) -> np.ndarray:
    """Rank fractions of each y column after sorting rows by x.

    Returns an (n, p) matrix u with u[i, j] = rank(y[sigma(i), j]) / n where
    sigma orders x increasingly. Each column of the result is a permutation
    of {1/n, ..., 1}. Raises TiesPresent if any column has duplicates.
    """
    n = sample.n
    if _has_duplicates(sample.x):
        raise TiesPresent("column 'x' has duplicate values")
    sigma = np.argsort(sample.x)
    ys = sample.y[sigma]
    order = np.argsort(ys, axis=0)
    sorted_vals = np.take_along_axis(ys, order, axis=0)
    dup = (sorted_vals[1:] == sorted_vals[:-1]).any(axis=0)
    if dup.any():
        j = int(np.flatnonzero(dup)[0])
        raise TiesPresent(f"column {sample.names[j]!r} has duplicate values")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(1, n + 1)[:, None], axis=0)
    return ranks / n


def _xi_from_rank_fractions(u: np.ndarray, n: int) -> np.ndarray:
    jumps = np.abs(np.diff(u, axis=0)).sum(axis=0)
    return 1.0 - 3.0 * n / (n * n - 1.0) * jumps


def xi(u_col: np.ndarray) -> float:
    """Coefficient for one column of concomitant rank fractions."""
    u_col = np.asarray(u_col, dtype=np.float64)
    n = u_col.shape[0]
    if n < 3:
        raise SampleTooSmall(f"need at least 3 observations, got {n}")
    return float(_xi_from_rank_fractions(u_col[:, None], n)[0])


def xi_all(sample: PairedSample) -> np.ndarray:
    """Coefficients for all p hypothesis columns, in column order."""
    u = concomitant_ranks(sample)
    return _xi_from_rank_fractions(u, sample.n)
