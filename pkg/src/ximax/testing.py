"""Single-step test and stepdown screening built on the block bootstrap.

The global statistic is sqrt(n) times the largest coefficient across
hypotheses, divided by the exact null standard deviation when a studentized
mode is selected. Critical values come from the per-replication maxima of
the bootstrap draws; the stepdown procedure re-applies the single-step rule
to the surviving subset until nothing more is rejected, reusing the same
draws throughout so critical values can only shrink.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import blocksize
from .bootstrap import (
    BootstrapConfig,
    BootstrapDraws,
    block_sums,
    bootstrap_statistics,
    build_block_scheme,
    critical_value,
    draw_multipliers,
    influence_terms,
    subset_max,
)
from .ranks import PairedSample, TieBreakConfig, concomitant_ranks, _xi_from_rank_fractions


@dataclass(frozen=True)
class TestConfig:
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    tie_break: TieBreakConfig = field(default_factory=TieBreakConfig)


@dataclass(frozen=True)
class HypothesisRecord:
    name: str
    xi: float
    statistic: float


@dataclass
class TestResult:
    """Outcome of the single-step max test."""

    t_stat: float
    critical: float
    reject: bool
    p_value: float
    names: tuple[str, ...]
    xi: np.ndarray
    statistics: np.ndarray
    q_used: int
    m: int
    r: int
    mode: str
    b_reps: int
    alpha: float
    seed: int

    @property
    def rejected(self) -> np.ndarray:
        """Indices of hypotheses whose statistic exceeds the critical value."""
        return np.flatnonzero(self.statistics > self.critical)

    @property
    def per_hypothesis(self) -> list[HypothesisRecord]:
        return [
            HypothesisRecord(name, float(self.xi[j]), float(self.statistics[j]))
            for j, name in enumerate(self.names)
        ]


@dataclass
class StepdownStep:
    active: np.ndarray
    t_stat: float
    critical: float
    rejected: np.ndarray


@dataclass
class StepdownResult:
    """Outcome of the stepdown screening procedure."""

    steps: list[StepdownStep]
    final_rejected: np.ndarray
    final_survivors: np.ndarray
    names: tuple[str, ...]
    xi: np.ndarray
    statistics: np.ndarray
    q_used: int
    m: int
    r: int
    mode: str
    b_reps: int
    alpha: float
    seed: int


@dataclass
class _Prepared:
    names: tuple[str, ...]
    xi: np.ndarray
    statistics: np.ndarray
    draws: BootstrapDraws
    q_used: int
    m: int
    r: int


def _prepare(sample: PairedSample, cfg: TestConfig, threads: int) -> _Prepared:
    from .ranks import resolve_ties

    sample = resolve_ties(sample, cfg.tie_break)
    boot = cfg.bootstrap
    n = sample.n
    u = concomitant_ranks(sample)
    xis = _xi_from_rank_fractions(u, n)
    q = blocksize.optimal_block_size(n) if boot.q_choice == "auto" else boot.q_choice
    scheme = build_block_scheme(n, q)
    totals = block_sums(influence_terms(u), scheme)
    mult = draw_multipliers(boot.b_reps, scheme.m, boot.seed)
    draws = bootstrap_statistics(
        totals,
        scheme,
        mult,
        boot.studentize,
        storage=boot.storage,
        memory_cap_bytes=boot.memory_cap_bytes,
        threads=threads,
    )
    scale = math.sqrt(n)
    if boot.studentize != "none":
        scale /= math.sqrt(blocksize.exact_null_variance(n))
    return _Prepared(
        names=sample.names,
        xi=xis,
        statistics=scale * xis,
        draws=draws,
        q_used=q,
        m=scheme.m,
        r=scheme.r,
    )


def max_test(sample: PairedSample, cfg: TestConfig | None = None,
             threads: int = 1) -> TestResult:
    """Test whether any hypothesis column depends on x.

    Rejects when the max statistic exceeds the bootstrap critical value at
    the configured level. The p-value uses the add-one convention
    (1 + #{draw maxima >= observed}) / (B + 1), so p <= alpha exactly when
    the test rejects.
    """
    cfg = cfg or TestConfig()
    boot = cfg.bootstrap
    prep = _prepare(sample, cfg, threads)
    maxima = subset_max(prep.draws, np.arange(sample.p))
    crit = critical_value(maxima, boot.alpha)
    t_stat = float(prep.statistics.max())
    p_value = (1.0 + int((maxima >= t_stat).sum())) / (boot.b_reps + 1.0)
    return TestResult(
        t_stat=t_stat,
        critical=crit,
        reject=bool(t_stat > crit),
        p_value=p_value,
        names=prep.names,
        xi=prep.xi,
        statistics=prep.statistics,
        q_used=prep.q_used,
        m=prep.m,
        r=prep.r,
        mode=boot.studentize,
        b_reps=boot.b_reps,
        alpha=boot.alpha,
        seed=boot.seed,
    )


def stepdown(sample: PairedSample, cfg: TestConfig | None = None,
             threads: int = 1) -> StepdownResult:
    """Screen hypotheses with familywise error control.

    Applies the max test to the active set, removes the rejected hypotheses,
    and repeats on the survivors with the same bootstrap draws until a step
    rejects nothing. The first step equals the single-step test, so the
    final rejections always contain the single-step ones.
    """
    cfg = cfg or TestConfig()
    boot = cfg.bootstrap
    prep = _prepare(sample, cfg, threads)
    p = prep.statistics.shape[0]
    active = np.arange(p)
    rejected_mask = np.zeros(p, dtype=bool)
    steps: list[StepdownStep] = []
    while active.size > 0:
        maxima = subset_max(prep.draws, active)
        crit = critical_value(maxima, boot.alpha)
        stats = prep.statistics[active]
        newly = active[stats > crit]
        steps.append(
            StepdownStep(
                active=active.copy(),
                t_stat=float(stats.max()),
                critical=crit,
                rejected=newly,
            )
        )
        if newly.size == 0:
            break
        rejected_mask[newly] = True
        active = active[stats <= crit]
    return StepdownResult(
        steps=steps,
        final_rejected=np.flatnonzero(rejected_mask),
        final_survivors=np.flatnonzero(~rejected_mask),
        names=prep.names,
        xi=prep.xi,
        statistics=prep.statistics,
        q_used=prep.q_used,
        m=prep.m,
        r=prep.r,
        mode=boot.studentize,
        b_reps=boot.b_reps,
        alpha=boot.alpha,
        seed=boot.seed,
    )
