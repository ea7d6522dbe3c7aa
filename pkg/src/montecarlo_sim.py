# src/montecarlo_sim.py
"""
Monte Carlo validation of the Gram calculus.

Every trial t draws from its own substream keyed by (master_seed, t), so
results do not depend on how trials are split across workers; aggregation
always runs in trial-index order.
"""
from __future__ import annotations
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .config import CODEBOOK_MAX_BITS, GENIE_REL_TOL, MC_CHUNK_TRIALS, MC_WORKERS, STANDARD_ERRORS
from .errors import CapExceeded, DimensionMismatch, TooFewTrials
from .gaussian_space import GaussianSet, innovations
from .hermitian_kernel import CMatrix, HermitianGram, solve_unit_lower
from .logs import log_json
from .scenarios import (
    ChannelScenario,
    DfeFilters,
    block_predictor,
    build_joint_gram,
    dfe_filters,
    incremental_rates,
)

_U64 = 2 ** 64


# ---------- Seeds ----------
@dataclass(frozen=True)
class SeedSpec:
    master_seed: int

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < _U64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def generator(self, trial: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(trial),))
        return np.random.Generator(np.random.PCG64(ss))


def _run_trials(n_trials: int, width: int, draw: Callable[[np.random.Generator], np.ndarray],
                seed: SeedSpec, dtype=np.float64) -> np.ndarray:
    """Row t of the result is draw(seed.generator(t)); chunks may run in parallel."""
    out = np.empty((n_trials, width), dtype=dtype)

    def work(start: int, stop: int) -> None:
        for t in range(start, stop):
            out[t] = draw(seed.generator(t))

    chunks = [(s, min(s + MC_CHUNK_TRIALS, n_trials)) for s in range(0, n_trials, MC_CHUNK_TRIALS)]
    if MC_WORKERS > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=MC_WORKERS) as pool:
            list(pool.map(lambda c: work(*c), chunks))
    else:
        for c in chunks:
            work(*c)
    return out


def proper_normals(rng: np.random.Generator, size: int) -> np.ndarray:
    """Unit-variance proper complex normals: (G1 + i G2) / sqrt(2)."""
    g = rng.standard_normal(2 * size)
    return (g[:size] + 1j * g[size:]) * math.sqrt(0.5)


# ---------- Sampling ----------
@dataclass(frozen=True, eq=False)
class SampleBatch:
    labels: Tuple[str, ...]
    values: CMatrix
    innovations: Optional[CMatrix] = None

    @property
    def n_trials(self) -> int:
        return int(self.values.shape[0])


def sample_gaussian(x: GaussianSet, seed: SeedSpec, n_trials: int) -> SampleBatch:
    """X = L E with independent E_i ~ CN(0, d2_i); one row per trial."""
    if n_trials < 0:
        raise ValueError("n_trials must be non-negative")
    f = innovations(x)
    n = x.dim
    unit = _run_trials(n_trials, n, lambda rng: proper_normals(rng, n), seed, dtype=np.complex128)
    e = unit * np.sqrt(f.d2)
    values = e @ f.L.T
    return SampleBatch(x.labels, values, e)


def empirical_gram(b: SampleBatch) -> HermitianGram:
    """(1/n) sum_t x_t x_t*."""
    if b.n_trials < 2:
        raise TooFewTrials(f"need at least 2 trials, got {b.n_trials}")
    v = b.values
    g = v.T @ v.conj() / b.n_trials
    return HermitianGram(g, check_psd=False)


def standard_error_scores(empirical: CMatrix, theory: CMatrix, n_trials: int) -> np.ndarray:
    """|empirical - theory| in units of sqrt(R_ii R_jj / n) (proper complex)."""
    d = np.sqrt(np.outer(theory.diagonal().real, theory.diagonal().real) / n_trials)
    diff = np.abs(np.asarray(empirical) - np.asarray(theory))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(d > 0, diff / d, np.where(diff > 0, np.inf, 0.0))
    return z


# ---------- Genie-aided successive decoding ----------
@dataclass(frozen=True, eq=False)
class GenieRunReport:
    order: Tuple[str, ...]
    n_trials: int
    theory_vars: Tuple[float, ...]
    empirical_vars: Tuple[float, ...]
    # one per input dimension (not per group); scalar groups give theory_vars
    error_pivots: Tuple[float, ...]
    orthogonality_residual: float
    orthogonality_bound: float
    forward_error_gram: CMatrix
    forward_error_max_score: float
    stage_variance_scores: Tuple[float, ...]
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def rel_errs(self) -> Tuple[float, ...]:
        return tuple(
            abs(e - t) / t if t > 0 else abs(e - t)
            for e, t in zip(self.empirical_vars, self.theory_vars)
        )

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def _sample_channel(s: ChannelScenario, seed: SeedSpec, n_trials: int) -> Tuple[CMatrix, CMatrix]:
    # (X, N) are independent: sample them as one block-diagonal set
    nx, ny = s.input_gram.dim, s.noise_gram.dim
    joint = np.zeros((nx + ny, nx + ny), dtype=np.complex128)
    joint[:nx, :nx] = s.input_gram.matrix
    joint[nx:, nx:] = s.noise_gram.matrix
    labels = tuple(s.input_labels) + tuple(f"n_{l}" for l in s.output_labels)
    batch = sample_gaussian(GaussianSet(labels, HermitianGram.derived(joint)), seed, n_trials)
    x, noise = batch.values[:, :nx], batch.values[:, nx:]
    y = x @ s.H.T + noise
    return x, y


def run_genie_dfe(s: ChannelScenario, order: Sequence[str], f: DfeFilters, seed: SeedSpec,
                  n_trials: int) -> GenieRunReport:
    """Decision-point errors with the true previous inputs fed back."""
    if n_trials < 2:
        raise TooFewTrials(f"need at least 2 trials, got {n_trials}")
    if tuple(order) != f.order:
        raise DimensionMismatch(f"filters were built for order {list(f.order)}, not {list(order)}")
    started = time.perf_counter()
    x, y = _sample_channel(s, seed, n_trials)
    cols = [s.input_labels.index(l) for l in f.input_labels]
    x = x[:, cols]
    x_hat = y @ f.forward.T
    e = x - x_hat
    decision = f.noise_predictive_input(y, x)
    err = x - decision

    # stage-wise decision-point error variances
    theory_vars = f.stage_variances
    emp_vars, scores = [], []
    start = 0
    for g, t in zip(f.stage_error_grams, theory_vars):
        block = err[:, start:start + g.dim]
        emp = float(np.mean(np.abs(block) ** 2))
        emp_vars.append(emp)
        # |e|^2 of a proper complex Gaussian is exponential: sd = mean
        scores.append(abs(emp - t) / (t / math.sqrt(n_trials)) if t > 0 else (0.0 if emp == 0 else math.inf))
        start += g.dim

    # orthogonality of the forward error to every observation, normalized
    cross = e.T @ y.conj() / n_trials
    var_e = np.mean(np.abs(e) ** 2, axis=0)
    var_y = np.mean(np.abs(y) ** 2, axis=0)
    norm = np.sqrt(np.outer(var_e, var_y))
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(norm > 0, np.abs(cross) / norm, 0.0)
    ortho = float(np.max(rho)) if rho.size else 0.0
    bound = STANDARD_ERRORS / math.sqrt(n_trials)

    emp_e = e.T @ e.conj() / n_trials
    fwd_scores = standard_error_scores(emp_e, f.error_gram.matrix, n_trials)
    fwd_max = float(np.max(fwd_scores)) if fwd_scores.size else 0.0

    checks = {
        "stage_variances": all(sc <= STANDARD_ERRORS for sc in scores),
        "orthogonality": ortho <= bound,
        "forward_error_gram": fwd_max <= STANDARD_ERRORS,
    }
    report = GenieRunReport(
        order=tuple(order),
        n_trials=n_trials,
        theory_vars=tuple(theory_vars),
        empirical_vars=tuple(emp_vars),
        error_pivots=tuple(float(d) for d in f.error_gram.innovations.d2),
        orthogonality_residual=ortho,
        orthogonality_bound=bound,
        forward_error_gram=emp_e,
        forward_error_max_score=fwd_max,
        stage_variance_scores=tuple(scores),
        checks=checks,
    )
    rel = report.rel_errs
    log_json(kind="genie_run", order=list(order), n_trials=n_trials, max_rel_err=max(rel, default=0.0),
             within_genie_tol=all(r < GENIE_REL_TOL for r in rel), checks=checks,
             seconds=round(time.perf_counter() - started, 3))
    return report


# ---------- Random-codebook experiment ----------
@dataclass(frozen=True)
class CodebookExperiment:
    stage: int
    group: str
    n: int
    rate_bits: float
    incremental_rate_bits: float
    codebook_size: int
    trials: int
    errors: int

    @property
    def wer(self) -> float:
        return self.errors / self.trials if self.trials else 0.0


def codebook_size(n: int, rate_bits: float) -> int:
    return max(1, math.ceil(2.0 ** (n * rate_bits) - 1e-9))


def run_codebook_experiment(s: ChannelScenario, order: Sequence[str], stage: int, n: int, rate_bits: float,
                            seed: SeedSpec, trials: int) -> CodebookExperiment:
    """
    Word error rate of a fresh Gaussian random code for one stage.

    Codewords are n independent uses of the stage's conditional law given the
    previous stages; previous stages are fed back exactly (genie) and later
    stages act as interference. The decoder picks the codeword whose
    decision-point trajectory is closest in the metric of the stage error Gram.
    """
    if n < 1:
        raise ValueError("block length n must be positive")
    if rate_bits < 0:
        raise ValueError("rate must be non-negative")
    if n * rate_bits > CODEBOOK_MAX_BITS + 1e-12:
        raise CapExceeded(f"n*R = {n * rate_bits:g} exceeds the {CODEBOOK_MAX_BITS}-bit cap")
    if trials < 1:
        raise TooFewTrials("need at least 1 trial")
    order = list(order)
    if not 1 <= stage <= len(order):
        raise ValueError(f"stage must be in 1..{len(order)}, got {stage}")

    j = build_joint_gram(s)
    f = dfe_filters(j, order)
    profile = incremental_rates(j, order)
    name = order[stage - 1]

    # block innovations of the input: X = (I - P)^{-1} W, W_i ~ CN(0, C_i)
    groups = tuple((g, tuple(j.group_labels(g))) for g in order)
    x_gram = j.sub_gram(order)
    p, prior_grams = block_predictor(x_gram, groups)
    m_inv = np.eye(x_gram.dim) - p
    widths = [len(ls) for _, ls in groups]
    offs = np.cumsum([0] + widths)
    sl = slice(int(offs[stage - 1]), int(offs[stage]))
    k = widths[stage - 1]
    factors = [np.linalg.cholesky(g.matrix) if g.dim else g.matrix for g in prior_grams]
    # metric of the stage error Gram: |S^{-1/2} d|^2
    whiten = np.linalg.inv(np.linalg.cholesky(f.stage_error_grams[stage - 1].matrix))
    size = codebook_size(n, rate_bits)
    nx, ny = x_gram.dim, s.noise_gram.dim
    noise_chol = np.linalg.cholesky(s.noise_gram.matrix)
    cols = [s.input_labels.index(l) for l in f.input_labels]
    h = s.H[:, cols]

    def trial(rng: np.random.Generator) -> np.ndarray:
        if size == 1:
            return np.zeros(1)
        code = proper_normals(rng, size * n * k).reshape(size, n, k) @ factors[stage - 1].T
        sent = int(rng.integers(size))
        w = np.empty((n, nx), dtype=np.complex128)
        for i, c in enumerate(factors):
            a, b = int(offs[i]), int(offs[i + 1])
            w[:, a:b] = proper_normals(rng, n * (b - a)).reshape(n, b - a) @ c.T
        w[:, sl] = code[sent]
        x = solve_unit_lower(m_inv, w.T).T
        y = x @ h.T + proper_normals(rng, n * ny).reshape(n, ny) @ noise_chol.T
        z = f.noise_predictive_input(y, x)[:, sl]
        # known part of the stage given previous stages
        known = (x @ p.T)[:, sl]
        cand = known[None, :, :] + code
        diff = (z[None, :, :] - cand).reshape(size * n, k)
        dist = np.sum(np.abs(diff @ whiten.T) ** 2, axis=1).reshape(size, n).sum(axis=1)
        return np.array([float(int(np.argmin(dist)) != sent)])

    started = time.perf_counter()
    errs = _run_trials(trials, 1, trial, seed)
    result = CodebookExperiment(
        stage=stage,
        group=name,
        n=n,
        rate_bits=float(rate_bits),
        incremental_rate_bits=float(profile.rates_bits[stage - 1]),
        codebook_size=size,
        trials=trials,
        errors=int(errs.sum()),
    )
    log_json(kind="codebook", stage=stage, n=n, rate_bits=rate_bits, size=size, trials=trials,
             wer=result.wer, seconds=round(time.perf_counter() - started, 3))
    return result


def union_error_bound(experiments: Sequence[CodebookExperiment]) -> float:
    """Sum of per-stage word error rates: bounds the whole decoder's error rate."""
    return float(min(1.0, math.fsum(e.wer for e in experiments)))
