# src/mmse_estimation.py
"""
MMSE projection on partitioned Gram matrices.

Everything is Gram algebra: X_{|Y} = A Y with A = R_xy R_yy^{-1}, and the
error X_{perp Y} has Gram R_xx - A R_yx (a Schur complement).
"""
from __future__ import annotations
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from .config import ALGEBRAIC_TOL
from .errors import DimensionMismatch, SingularGram, UnknownLabel
from .gaussian_space import GaussianSet
from .hermitian_kernel import (
    CMatrix,
    HermitianGram,
    gram_scale,
    ldl_semidefinite,
    log_det_from_pivots,
    max_abs,
    solve_psd,
)

GroupRef = Union[str, Sequence[str]]


# ---------- Types ----------
@dataclass(frozen=True, eq=False)
class JointGram:
    """Gram over the concatenation of named, disjoint label groups."""
    groups: Tuple[Tuple[str, Tuple[str, ...]], ...]
    gram: HermitianGram

    def __post_init__(self):
        groups = tuple((str(name), tuple(str(l) for l in labels)) for name, labels in self.groups)
        names = [g for g, _ in groups]
        if len(set(names)) != len(names):
            raise ValueError(f"group names must be unique: {names}")
        labels = [l for _, ls in groups for l in ls]
        if len(set(labels)) != len(labels):
            raise ValueError("group label lists must be disjoint")
        if len(labels) != self.gram.dim:
            raise DimensionMismatch(f"{len(labels)} labels for a gram of dim {self.gram.dim}")
        object.__setattr__(self, "groups", groups)

    @property
    def group_names(self) -> List[str]:
        return [g for g, _ in self.groups]

    @property
    def labels(self) -> List[str]:
        return [l for _, ls in self.groups for l in ls]

    def group_labels(self, ref: GroupRef) -> List[str]:
        table: Dict[str, Tuple[str, ...]] = dict(self.groups)
        out: List[str] = []
        for name in _names(ref):
            if name not in table:
                raise UnknownLabel(f"unknown group {name!r}; known {self.group_names}")
            out.extend(table[name])
        return out

    def indices(self, ref: GroupRef) -> List[int]:
        pos = {l: i for i, l in enumerate(self.labels)}
        return [pos[l] for l in self.group_labels(ref)]

    def block(self, a: GroupRef, b: GroupRef) -> CMatrix:
        return self.gram.matrix[np.ix_(self.indices(a), self.indices(b))]

    def sub_gram(self, ref: GroupRef) -> HermitianGram:
        return self.gram.principal(self.indices(ref))

    def select(self, refs: Sequence[str]) -> "JointGram":
        """Keep the named groups, in the given order."""
        refs = list(refs)
        idx = self.indices(refs)
        groups = tuple((name, tuple(self.group_labels(name))) for name in refs)
        return JointGram(groups, self.gram.principal(idx))

    def as_gaussian_set(self) -> GaussianSet:
        return GaussianSet(tuple(self.labels), self.gram)


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    coefficients: CMatrix
    estimate_gram: HermitianGram
    error_gram: HermitianGram
    target_labels: Tuple[str, ...] = ()
    observed_labels: Tuple[str, ...] = ()


@dataclass(frozen=True)
class MutualInfo:
    """I(X;Y); ``nats == +inf`` flags a singular error Gram."""
    nats: float

    @property
    def bits(self) -> float:
        return self.nats / math.log(2.0)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.nats)


def _names(ref: GroupRef) -> List[str]:
    return [ref] if isinstance(ref, str) else list(ref)


def _disjoint(*refs: GroupRef) -> None:
    seen: List[str] = []
    for ref in refs:
        for name in _names(ref):
            if name in seen:
                raise ValueError(f"group {name!r} used twice in one projection")
            seen.append(name)


# ---------- Projection ----------
def mmse_project(j: JointGram, target: GroupRef, observed: GroupRef) -> ProjectionResult:
    """Project the target groups onto the span of the observed groups."""
    _disjoint(target, observed)
    r_xx = j.sub_gram(target)
    r_yy = j.sub_gram(observed)
    r_yx = j.block(observed, target)
    tx = tuple(j.group_labels(target))
    ty = tuple(j.group_labels(observed))
    if r_yy.dim == 0:
        a = np.zeros((r_xx.dim, 0), dtype=np.complex128)
        zero = HermitianGram.derived(np.zeros_like(r_xx.matrix), scale=r_xx.scale)
        return ProjectionResult(a, zero, r_xx, tx, ty)
    # A R_yy = R_xy  <=>  R_yy A* = R_yx
    a = solve_psd(r_yy, r_yx, which="R_yy").conj().T
    est = a @ r_yx
    estimate = HermitianGram.derived(est, scale=r_xx.scale)
    error = HermitianGram.derived(r_xx.matrix - est, scale=r_xx.scale)
    return ProjectionResult(a, estimate, error, tx, ty)


def orthogonality_residual(j: JointGram, p: ProjectionResult, target: GroupRef, observed: GroupRef) -> float:
    """max |<X - A Y, Y>| = max |R_xy - A R_yy|."""
    r_xy = j.block(target, observed)
    r_yy = j.sub_gram(observed).matrix
    if p.coefficients.shape != r_xy.shape:
        raise DimensionMismatch(f"coefficients {p.coefficients.shape} do not match R_xy {r_xy.shape}")
    return max_abs(r_xy - p.coefficients @ r_yy)


def condition_on(j: JointGram, keep: GroupRef, given: GroupRef) -> JointGram:
    """Joint Gram of (keep)_{perp given}: the Schur complement, groups preserved."""
    keep = _names(keep)
    p = mmse_project(j, keep, given)
    groups = tuple((name, tuple(j.group_labels(name))) for name in keep)
    return JointGram(groups, p.error_gram)


def mutual_information(j: JointGram, x: GroupRef, y: GroupRef) -> MutualInfo:
    """I(X;Y) = ln |R_xx| / |R_ee|."""
    fx = ldl_semidefinite(j.sub_gram(x))
    if not fx.is_full_rank:
        raise SingularGram("R_xx", fx.rank, fx.dim)
    p = mmse_project(j, x, y)
    fe = ldl_semidefinite(p.error_gram)
    if not fe.is_full_rank:
        return MutualInfo(math.inf)
    return MutualInfo(log_det_from_pivots(fx) - log_det_from_pivots(fe))


def chain_rule_project(j: JointGram, x: GroupRef, y: GroupRef, z: GroupRef) -> ProjectionResult:
    """
    X_{|YZ} = X_{|Y} + (X_{perp Y})_{|Z_{perp Y}}.

    The second stage is an ordinary projection inside the Schur complement
    of (X, Z) given Y; coefficients are mapped back onto (Y, Z).
    """
    _disjoint(x, y, z)
    xs, zs = _names(x), _names(z)
    first = mmse_project(j, xs + zs, y)
    nx = len(j.group_labels(xs))
    a_xy = first.coefficients[:nx]
    a_zy = first.coefficients[nx:]
    cond = JointGram(
        tuple((name, tuple(j.group_labels(name))) for name in xs + zs),
        first.error_gram,
    )
    try:
        second = mmse_project(cond, xs, zs)
    except SingularGram as exc:
        raise SingularGram("R_{z perp y}", exc.rank, exc.dim) from exc
    a_z = second.coefficients
    coefficients = np.hstack([a_xy - a_z @ a_zy, a_z])
    r_xx = j.sub_gram(xs)
    estimate_first = first.estimate_gram.matrix[:nx, :nx]
    estimate = HermitianGram.derived(estimate_first + second.estimate_gram.matrix, scale=r_xx.scale)
    error = HermitianGram.derived(second.error_gram.matrix, scale=r_xx.scale)
    observed = tuple(j.group_labels(y)) + tuple(j.group_labels(zs))
    return ProjectionResult(coefficients, estimate, error, tuple(j.group_labels(xs)), observed)


def project_sequence(j: JointGram, x: GroupRef, ys: Sequence[GroupRef]) -> ProjectionResult:
    """Iterated chain rule over observations Y_1, Y_2, ... (finite)."""
    ys = [_names(y) for y in ys]
    if not ys:
        return mmse_project(j, x, [])
    xs = _names(x)
    result = mmse_project(j, xs, ys[0])
    seen = list(ys[0])
    for y in ys[1:]:
        result = chain_rule_project(j.select(xs + seen + y), xs, seen, y)
        seen += y
    return result


def sufficiency_check(j: JointGram, x: GroupRef, y: GroupRef) -> float:
    """|I(X;Y) - I(X; X_{|Y})| in nats (data processing with equality)."""
    direct = mutual_information(j, x, y)
    if direct.is_infinite:
        raise SingularGram("R_ee")
    p = mmse_project(j, x, y)
    r_xx = j.sub_gram(x).matrix
    est = p.estimate_gram.matrix
    # <X, X_{|Y}> = R_xy A* = A R_yy A* = estimate Gram
    stacked = np.block([[r_xx, est], [est.conj().T, est]])
    x_labels = tuple(j.group_labels(x))
    est_labels = tuple(f"{l}|y" for l in x_labels)
    stacked_gram = HermitianGram.derived(stacked, scale=j.gram.scale)
    pair = JointGram((("x", x_labels), ("x_est", est_labels)), stacked_gram)
    try:
        via_estimate = mutual_information(pair, "x", "x_est")
    except SingularGram as exc:
        raise SingularGram("estimate Gram", exc.rank, exc.dim) from exc
    return abs(direct.nats - via_estimate.nats)


def projection_tolerance(j: JointGram, target: GroupRef) -> float:
    return ALGEBRAIC_TOL * gram_scale(j.sub_gram(target))
