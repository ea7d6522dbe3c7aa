# src/scenarios.py
"""
Linear Gaussian channels Y = H X + N and their successive-decoding analysis.

A scenario is turned into a JointGram over the input groups followed by the
observation group ``y``. Rates, DFE filters and observation reduction all
work on that JointGram with an explicit decoding order.
"""
from __future__ import annotations
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import toeplitz

from .errors import DimensionMismatch, SingularGram
from .gaussian_space import LOG_PI_E
from .hermitian_kernel import (
    CMatrix,
    HermitianGram,
    as_cmatrix,
    ldl_semidefinite,
    log_det_from_pivots,
)
from .logs import log_json
from .mmse_estimation import JointGram, MutualInfo, condition_on, mmse_project, mutual_information

OBSERVED = "y"


class ChannelKind(str, Enum):
    ISI = "isi"
    MIMO = "mimo"
    MAC = "mac"


Groups = Tuple[Tuple[str, Tuple[str, ...]], ...]


def group_name(labels: Sequence[str]) -> str:
    return labels[0] if len(labels) == 1 else "+".join(labels)


def make_groups(label_lists: Sequence[Sequence[str]]) -> Groups:
    return tuple((group_name(list(ls)), tuple(ls)) for ls in label_lists)


# ---------- Scenario ----------
@dataclass(frozen=True, eq=False)
class ChannelScenario:
    kind: ChannelKind
    H: CMatrix
    input_gram: HermitianGram
    noise_gram: HermitianGram
    groups: Groups
    input_labels: Tuple[str, ...]
    output_labels: Tuple[str, ...]

    def __post_init__(self):
        h = as_cmatrix(self.H, "H")
        object.__setattr__(self, "H", h)
        if h.shape != (self.noise_gram.dim, self.input_gram.dim):
            raise DimensionMismatch(
                f"H is {h.shape[0]}x{h.shape[1]} but noise dim is {self.noise_gram.dim} "
                f"and input dim is {self.input_gram.dim}"
            )
        if len(self.input_labels) != self.input_gram.dim or len(self.output_labels) != self.noise_gram.dim:
            raise DimensionMismatch("label counts do not match the Gram dimensions")
        grouped = sorted(l for _, ls in self.groups for l in ls)
        if grouped != sorted(self.input_labels):
            raise ValueError(f"groups must partition the input labels {list(self.input_labels)}")
        if OBSERVED in [g for g, _ in self.groups]:
            raise ValueError(f"group name {OBSERVED!r} is reserved for the observation")
        f = ldl_semidefinite(self.noise_gram)
        if not f.is_full_rank:
            raise SingularGram("R_nn", f.rank, f.dim)

    @property
    def group_names(self) -> List[str]:
        return [g for g, _ in self.groups]


def _input_gram(dim: int, powers: Optional[Sequence[float]], input_gram) -> HermitianGram:
    if input_gram is not None:
        return input_gram if isinstance(input_gram, HermitianGram) else HermitianGram(as_cmatrix(input_gram, "input_gram"))
    powers = [1.0] * dim if powers is None else list(powers)
    if len(powers) == 1 and dim > 1:
        powers = powers * dim
    if len(powers) != dim:
        raise DimensionMismatch(f"{len(powers)} powers for {dim} inputs")
    return HermitianGram(np.diag(np.asarray(powers, dtype=np.complex128)))


def _noise_gram(dim: int, noise_variance: Optional[float], noise_gram) -> HermitianGram:
    if noise_gram is not None:
        return noise_gram if isinstance(noise_gram, HermitianGram) else HermitianGram(as_cmatrix(noise_gram, "noise_gram"))
    return HermitianGram.identity(dim, 1.0 if noise_variance is None else float(noise_variance))


def isi_scenario(
    taps: Sequence[complex],
    block_length: int,
    powers: Optional[Sequence[float]] = None,
    noise_variance: Optional[float] = None,
    input_gram=None,
    noise_gram=None,
    groups: Optional[Sequence[Sequence[str]]] = None,
) -> ChannelScenario:
    """Causal convolution truncated to the block: lower-triangular banded Toeplitz H."""
    if block_length < 1:
        raise ValueError("block_length must be positive")
    if len(taps) == 0:
        raise ValueError("at least one tap is required")
    col = np.zeros(block_length, dtype=np.complex128)
    k = min(len(taps), block_length)
    col[:k] = np.asarray(taps, dtype=np.complex128)[:k]
    row = np.zeros(block_length, dtype=np.complex128)
    row[0] = col[0]
    h = toeplitz(col, row)
    xs = tuple(f"x{i + 1}" for i in range(block_length))
    ys = tuple(f"y{i + 1}" for i in range(block_length))
    return ChannelScenario(
        ChannelKind.ISI, h,
        _input_gram(block_length, powers, input_gram),
        _noise_gram(block_length, noise_variance, noise_gram),
        make_groups(groups or [[x] for x in xs]), xs, ys,
    )


def mimo_scenario(
    H,
    powers: Optional[Sequence[float]] = None,
    noise_variance: Optional[float] = None,
    input_gram=None,
    noise_gram=None,
    groups: Optional[Sequence[Sequence[str]]] = None,
) -> ChannelScenario:
    h = as_cmatrix(H, "H")
    r, t = h.shape
    xs = tuple(f"x{i + 1}" for i in range(t))
    ys = tuple(f"y{i + 1}" for i in range(r))
    return ChannelScenario(
        ChannelKind.MIMO, h,
        _input_gram(t, powers, input_gram),
        _noise_gram(r, noise_variance, noise_gram),
        make_groups(groups or [[x] for x in xs]), xs, ys,
    )


def mac_scenario(
    gains: Sequence[complex],
    powers: Optional[Sequence[float]] = None,
    noise_variance: Optional[float] = None,
    input_gram=None,
    noise_gram=None,
    groups: Optional[Sequence[Sequence[str]]] = None,
) -> ChannelScenario:
    """K users, one receive dimension: H is the 1xK row of gains."""
    h = np.asarray(gains, dtype=np.complex128).reshape(1, -1)
    us = tuple(f"u{i + 1}" for i in range(h.shape[1]))
    return ChannelScenario(
        ChannelKind.MAC, h,
        _input_gram(h.shape[1], powers, input_gram),
        _noise_gram(1, noise_variance, noise_gram),
        make_groups(groups or [[u] for u in us]), us, ("y1",),
    )


def build_joint_gram(s: ChannelScenario) -> JointGram:
    """Groups (inputs..., y) with R_yy = H R_xx H* + R_nn and R_xy = R_xx H*."""
    r_xx = s.input_gram.matrix
    h = s.H
    r_xy = r_xx @ h.conj().T
    r_yy = h @ r_xy + s.noise_gram.matrix
    full = np.block([[r_xx, r_xy], [r_xy.conj().T, r_yy]])
    # input order in the Gram follows the groups, not input_labels
    perm = [s.input_labels.index(l) for _, ls in s.groups for l in ls]
    n = len(perm)
    idx = perm + list(range(n, n + len(s.output_labels)))
    full = full[np.ix_(idx, idx)]
    groups = s.groups + ((OBSERVED, s.output_labels),)
    return JointGram(groups, HermitianGram.derived(full))


# ---------- Rates ----------
@dataclass(frozen=True)
class RateProfile:
    order: Tuple[str, ...]
    rates_nats: Tuple[float, ...]
    reference_mi: MutualInfo

    @property
    def rates_bits(self) -> Tuple[float, ...]:
        return tuple(r / math.log(2.0) for r in self.rates_nats)

    @property
    def total_nats(self) -> float:
        return float(math.fsum(self.rates_nats))

    @property
    def total_bits(self) -> float:
        return self.total_nats / math.log(2.0)

    @property
    def rate_sum_gap(self) -> float:
        return abs(self.total_nats - self.reference_mi.nats)


def _check_order(j: JointGram, order: Sequence[str], observed: str) -> List[str]:
    order = [str(o) for o in order]
    inputs = [g for g in j.group_names if g != observed]
    if sorted(order) != sorted(inputs) or len(set(order)) != len(order):
        raise ValueError(f"order {order} must list every input group exactly once: {inputs}")
    return order


def _stage_slices(j: JointGram, order: Sequence[str]) -> List[slice]:
    out, start = [], 0
    for name in order:
        n = len(j.group_labels(name))
        out.append(slice(start, start + n))
        start += n
    return out


def incremental_rates(j: JointGram, order: Sequence[str], observed: str = OBSERVED) -> RateProfile:
    """R_i = h(X_i | X_1^{i-1}) - h(E_i | E_1^{i-1}) from Cholesky pivots."""
    order = _check_order(j, order, observed)
    fx = ldl_semidefinite(j.sub_gram(order))
    if not fx.is_full_rank:
        raise SingularGram("R_xx", fx.rank, fx.dim)
    fe = ldl_semidefinite(mmse_project(j, order, observed).error_gram)
    if not fe.is_full_rank:
        raise SingularGram("R_ee", fe.rank, fe.dim)
    # pi*e cancels between the two conditional entropies
    rates = tuple(
        float(np.sum(np.log(fx.d2[sl])) - np.sum(np.log(fe.d2[sl])))
        for sl in _stage_slices(j, order)
    )
    profile = RateProfile(tuple(order), rates, mutual_information(j, order, observed))
    log_json(kind="incremental_rates", order=list(order), rates_nats=list(rates),
             gap_nats=profile.rate_sum_gap)
    return profile


def stagewise_mutual_information(j: JointGram, order: Sequence[str], observed: str = OBSERVED) -> Tuple[float, ...]:
    """R_i = I(X_i; Y | X_1^{i-1}), each term from conditional projections."""
    order = _check_order(j, order, observed)
    out = []
    for i, name in enumerate(order):
        prior = order[:i]
        cond_x = condition_on(j, name, prior)
        cond_xy = condition_on(j, name, prior + [observed])
        fx = ldl_semidefinite(cond_x.gram)
        fe = ldl_semidefinite(cond_xy.gram)
        if not fe.is_full_rank:
            raise SingularGram("R_ee", fe.rank, fe.dim)
        out.append(log_det_from_pivots(fx) - log_det_from_pivots(fe))
    return tuple(out)


def entropy_table(j: JointGram, order: Sequence[str], observed: str = OBSERVED) -> Dict[str, float]:
    """h(X), h(E), and both per complex dimension, in nats."""
    order = _check_order(j, order, observed)
    fx = ldl_semidefinite(j.sub_gram(order))
    fe = ldl_semidefinite(mmse_project(j, order, observed).error_gram)
    n = fx.dim
    h_x = n * LOG_PI_E + log_det_from_pivots(fx)
    h_e = n * LOG_PI_E + log_det_from_pivots(fe)
    return {
        "h(X)": h_x,
        "h(E)": h_e,
        "h(X)/N": h_x / n if n else 0.0,
        "h(E)/N": h_e / n if n else 0.0,
    }


# ---------- Decision feedback ----------
def block_predictor(gram: HermitianGram, groups: Groups) -> Tuple[CMatrix, List[HermitianGram]]:
    """
    Strictly lower block triangular MMSE predictor of each group from the
    previous ones, plus the Gram of each stage's prediction error.
    """
    j = JointGram(groups, gram)
    names = j.group_names
    slices = _stage_slices(j, names)
    b = np.zeros((gram.dim, gram.dim), dtype=np.complex128)
    stage_grams: List[HermitianGram] = []
    for i, name in enumerate(names):
        p = mmse_project(j, name, names[:i])
        if i > 0:
            b[slices[i], 0:slices[i].start] = p.coefficients
        stage_grams.append(p.error_gram)
    return b, stage_grams


@dataclass(frozen=True, eq=False)
class DfeFilters:
    order: Tuple[str, ...]
    input_labels: Tuple[str, ...]
    forward: CMatrix
    predictor: CMatrix
    stage_error_grams: Tuple[HermitianGram, ...]
    error_gram: HermitianGram

    @property
    def feedforward_std(self) -> CMatrix:
        return (np.eye(self.predictor.shape[0]) - self.predictor) @ self.forward

    @property
    def feedback_std(self) -> CMatrix:
        return self.predictor

    @property
    def stage_variances(self) -> Tuple[float, ...]:
        return tuple(float(np.mean(g.matrix.diagonal().real)) for g in self.stage_error_grams)

    def noise_predictive_input(self, y: CMatrix, x: CMatrix) -> CMatrix:
        """X_{|Y} + B (x - X_{|Y}); sample rows, columns in label order."""
        x_hat = np.asarray(y) @ self.forward.T
        return x_hat + (np.asarray(x) - x_hat) @ self.predictor.T

    def standard_input(self, y: CMatrix, x: CMatrix) -> CMatrix:
        """(I - B) A y + B x."""
        return np.asarray(y) @ self.feedforward_std.T + np.asarray(x) @ self.feedback_std.T


def dfe_filters(j: JointGram, order: Sequence[str], observed: str = OBSERVED) -> DfeFilters:
    order = _check_order(j, order, observed)
    p = mmse_project(j, order, observed)
    fe = ldl_semidefinite(p.error_gram)
    if not fe.is_full_rank:
        raise SingularGram("R_ee", fe.rank, fe.dim)
    groups = tuple((name, tuple(j.group_labels(name))) for name in order)
    b, stage_grams = block_predictor(p.error_gram, groups)
    return DfeFilters(
        order=tuple(order),
        input_labels=p.target_labels,
        forward=p.coefficients,
        predictor=b,
        stage_error_grams=tuple(stage_grams),
        error_gram=p.error_gram,
    )


def reduce_observations(j: JointGram, y: str = OBSERVED) -> JointGram:
    """Drop observation variables with a zero innovations pivot (label order)."""
    labels = j.group_labels(y)
    f = ldl_semidefinite(j.sub_gram(y))
    keep = [l for l, d in zip(labels, f.d2) if d > 0.0]
    if len(keep) == len(labels):
        return j
    dropped = [l for l in labels if l not in keep]
    log_json(kind="reduce_observations", group=y, dropped=dropped)
    groups = tuple((name, ls if name != y else tuple(keep)) for name, ls in j.groups)
    pos = {l: i for i, l in enumerate(j.labels)}
    idx = [pos[l] for _, ls in groups for l in ls]
    return JointGram(groups, j.gram.principal(idx))
