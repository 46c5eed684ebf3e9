"""Synthetic data models and Monte Carlo studies.

Three generators cover the standard benchmark layouts: a joint Gaussian
with one informative column, and two noisy-oscillation designs where one or
all columns carry a cosine signal in x. Study helpers estimate rejection
rates over replicated tests and check the influence-term moment identities
by simulation.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO

import numpy as np

from .bootstrap import BootstrapConfig, build_block_scheme, block_sums, influence_terms
from .errors import BadTau, NotPositiveDefinite, SampleTooSmall
from .ranks import PairedSample, TieBreakConfig
from .testing import TestConfig, max_test
from . import rng as _rng

MODELS = ("model1", "model2", "model3")
VARIANTS = {"bmb0": "none", "bmb1": "fixed", "bmb2": "empirical"}


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of one synthetic design.

    model1: (x, y) jointly Gaussian, corr(x, y1) = rho, corr(yi, yj) = tau,
    x independent of y2..yp. model2: x uniform on [-1, 1],
    y1 = 2 rho cos(8 pi x) + noise, other columns pure noise. model3: every
    column carries the cosine signal. Noise columns are equicorrelated with
    coefficient tau.
    """

    model: str
    n: int
    p: int
    rho: float = 0.0
    tau: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model: {self.model!r}")
        if self.n < 3:
            raise SampleTooSmall(f"need at least 3 observations, got {self.n}")
        if self.p < 1:
            raise ValueError(f"need at least one hypothesis column, got {self.p}")
        if self.model in ("model2", "model3") and not 0.0 <= self.tau < 1.0:
            raise BadTau(f"tau must be in [0, 1) for {self.model}, got {self.tau}")


def _cholesky(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("covariance matrix is not positive definite")


def _equicorrelated_noise(rng: np.random.Generator, n: int, p: int,
                          tau: float) -> np.ndarray:
    z = rng.standard_normal((n, p))
    if tau == 0.0 or p == 1:
        return z
    cov = np.full((p, p), tau)
    np.fill_diagonal(cov, 1.0)
    return z @ _cholesky(cov).T


def gen_model1(spec: ModelSpec, replicate: int) -> PairedSample:
    """Joint Gaussian draw for the given replicate index."""
    p = spec.p
    cov = np.zeros((p + 1, p + 1))
    cov[1:, 1:] = spec.tau
    cov[0, 1] = cov[1, 0] = spec.rho
    np.fill_diagonal(cov, 1.0)
    left = _cholesky(cov)
    rng = _rng.keyed_rng(spec.seed, _rng.MODEL, replicate)
    data = rng.standard_normal((spec.n, p + 1)) @ left.T
    return PairedSample(x=data[:, 0], y=data[:, 1:])


def _cosine_model(spec: ModelSpec, replicate: int, signal_cols: slice) -> PairedSample:
    # draw order is fixed: x first, then the noise block
    rng = _rng.keyed_rng(spec.seed, _rng.MODEL, replicate)
    x = rng.uniform(-1.0, 1.0, spec.n)
    y = _equicorrelated_noise(rng, spec.n, spec.p, spec.tau)
    y[:, signal_cols] += 2.0 * spec.rho * np.cos(8.0 * math.pi * x)[:, None]
    return PairedSample(x=x, y=y)


def gen_model2(spec: ModelSpec, replicate: int) -> PairedSample:
    """Cosine signal in the first column only."""
    return _cosine_model(spec, replicate, slice(0, 1))


def gen_model3(spec: ModelSpec, replicate: int) -> PairedSample:
    """Cosine signal in every column."""
    return _cosine_model(spec, replicate, slice(0, spec.p))


_GENERATORS = {"model1": gen_model1, "model2": gen_model2, "model3": gen_model3}


def generate(spec: ModelSpec, replicate: int) -> PairedSample:
    """Draw one replicate from the spec's model."""
    return _GENERATORS[spec.model](spec, replicate)


@dataclass(frozen=True)
class MCResult:
    """Rejection rate of one (design, block length, variant) cell."""

    model: str
    n: int
    p: int
    rho: float
    tau: float
    q: int
    variant: str
    b_reps: int
    s_reps: int
    rejection_rate: float
    mc_stderr: float


def run_rejection_study(spec: ModelSpec, q_grid, variant: str, s_reps: int,
                        b_reps: int, alpha: float, seed: int = 0,
                        threads: int = 1) -> list[MCResult]:
    """Rejection rate of the max test over s_reps fresh replicates per q.

    q_grid entries are block lengths or "auto". Data streams are keyed by
    spec.seed and the replicate index; bootstrap streams by a per-replicate
    seed derived from `seed`, so every cell is reproducible and independent
    of the thread count.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant: {variant!r}")
    if s_reps < 1:
        raise ValueError(f"need at least one replicate, got {s_reps}")
    mode = VARIANTS[variant]
    gen = _GENERATORS[spec.model]

    def one(rep: int, q_choice) -> tuple[bool, int]:
        sample = gen(spec, rep)
        cfg = TestConfig(
            bootstrap=BootstrapConfig(
                b_reps=b_reps,
                q_choice=q_choice,
                studentize=mode,
                alpha=alpha,
                seed=_rng.derive_seed(seed, _rng.STUDY, rep),
            ),
            tie_break=TieBreakConfig(),
        )
        res = max_test(sample, cfg)
        return res.reject, res.q_used

    results = []
    for q_choice in q_grid:
        if q_choice != "auto" and (not isinstance(q_choice, int) or q_choice < 1):
            raise ValueError(f"block length must be 'auto' or a positive int: {q_choice!r}")
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outcomes = list(pool.map(lambda rep: one(rep, q_choice), range(s_reps)))
        else:
            outcomes = [one(rep, q_choice) for rep in range(s_reps)]
        rate = sum(r for r, _ in outcomes) / s_reps
        results.append(
            MCResult(
                model=spec.model,
                n=spec.n,
                p=spec.p,
                rho=spec.rho,
                tau=spec.tau,
                q=outcomes[0][1],
                variant=variant,
                b_reps=b_reps,
                s_reps=s_reps,
                rejection_rate=rate,
                mc_stderr=math.sqrt(rate * (1.0 - rate) / s_reps),
            )
        )
    return results


def results_to_csv(results: list[MCResult], out: IO[str]) -> None:
    """Write study results as a tidy CSV, one row per cell."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["model", "n", "p", "rho", "tau", "q", "variant", "B", "S",
         "rejection_rate", "mc_stderr"]
    )
    for res in results:
        writer.writerow(
            [res.model, res.n, res.p, res.rho, res.tau, res.q, res.variant,
             res.b_reps, res.s_reps, res.rejection_rate, res.mc_stderr]
        )


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    stderr: float


def simulate_influence_moments(num_samples: int, seed: int = 0) -> dict[str, MomentEstimate]:
    """Monte Carlo moments of influence terms built from i.i.d. uniforms.

    Draws num_samples independent strips of five uniforms, forms the four
    consecutive influence terms w1..w4 of each strip, and estimates the
    moments that drive the bootstrap variance identities:

      mean                E[w1]                  square             E[w1^2]
      lag1_product        E[w1 w2]               fourth_power       E[w1^4]
      square_pair         E[w1^2 w2^2]           lag1_weighted      E[w1 w2 (w1^2+w2^2)]
      triple_sum_product  E[w1 w2 w3 (w1+w2+w3)] quadruple_product  E[w1 w2 w3 w4]

    Each estimate carries its Monte Carlo standard error.
    """
    if num_samples < 10_000:
        raise ValueError(f"need at least 10000 samples, got {num_samples}")
    uniforms = _rng.keyed_rng(seed, _rng.MOMENTS, 0).uniform(size=(num_samples, 5))
    w = influence_terms(uniforms.T).T
    w1, w2, w3, w4 = (w[:, k] for k in range(4))
    samples = {
        "mean": w1,
        "square": w1 * w1,
        "lag1_product": w1 * w2,
        "fourth_power": w1 ** 4,
        "square_pair": (w1 * w1) * (w2 * w2),
        "lag1_weighted": w1 * w2 * (w1 * w1 + w2 * w2),
        "triple_sum_product": w1 * w2 * w3 * (w1 + w2 + w3),
        "quadruple_product": w1 * w2 * w3 * w4,
    }
    root_n = math.sqrt(num_samples)
    return {
        name: MomentEstimate(
            value=float(vals.mean()), stderr=float(vals.std(ddof=1) / root_n)
        )
        for name, vals in samples.items()
    }


@dataclass(frozen=True)
class VarianceProxyStudy:
    """Simulated mean and variance of the bootstrap variance proxy."""

    n: int
    q: int
    m: int
    num_samples: int
    mean: float
    mean_stderr: float
    variance: float
    variance_stderr: float


def simulate_bootstrap_variance(n: int, q: int, num_samples: int,
                                seed: int = 0) -> VarianceProxyStudy:
    """Monte Carlo distribution of the variance proxy under independence.

    Each replicate draws n i.i.d. uniforms, forms influence terms and block
    totals under the (n, q) scheme, and records V = sum_k A_k^2 / (m q).
    Returns the sample mean and variance of V with standard errors.
    """
    if num_samples < 2:
        raise ValueError(f"need at least 2 samples, got {num_samples}")
    scheme = build_block_scheme(n, q)
    stream = _rng.keyed_rng(seed, _rng.MOMENTS, 1)
    chunk = max(1, 1_000_000 // n)
    pieces = []
    done = 0
    while done < num_samples:
        take = min(chunk, num_samples - done)
        uniforms = stream.uniform(size=(take, n))
        totals = block_sums(influence_terms(uniforms.T), scheme)
        pieces.append((totals * totals).sum(axis=0) / (scheme.m * scheme.q))
        done += take
    proxy = np.concatenate(pieces)
    mean = float(proxy.mean())
    centered = proxy - mean
    variance = float(np.sum(centered ** 2) / (num_samples - 1))
    fourth = float(np.mean(centered ** 4))
    var_of_var = (
        fourth - (num_samples - 3) / (num_samples - 1) * variance * variance
    ) / num_samples
    return VarianceProxyStudy(
        n=n,
        q=q,
        m=scheme.m,
        num_samples=num_samples,
        mean=mean,
        mean_stderr=float(proxy.std(ddof=1) / math.sqrt(num_samples)),
        variance=variance,
        variance_stderr=math.sqrt(max(var_of_var, 0.0)),
    )
