# src/gaussian_space.py
"""
Finite sets of zero-mean proper complex Gaussian variables.

A set is fully described by its labels and its Gram matrix
R_xx[i, j] = E[X_i X_j*]; every quantity here is second-order.
"""
from __future__ import annotations
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, InvalidPermutation, SingularGram, UnknownLabel
from .hermitian_kernel import (
    CMatrix,
    HermitianGram,
    InnovationsForm,
    ldl_semidefinite,
    log_det_from_pivots,
)

LOG_PI_E = math.log(math.pi * math.e)


@dataclass(frozen=True, eq=False)
class GaussianSet:
    labels: Tuple[str, ...]
    gram: HermitianGram

    def __post_init__(self):
        labels = tuple(str(l) for l in self.labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"labels must be unique: {list(labels)}")
        if len(labels) != self.gram.dim:
            raise DimensionMismatch(f"{len(labels)} labels for a gram of dim {self.gram.dim}")
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index_of(self, names: Sequence[str]) -> List[int]:
        pos = {l: i for i, l in enumerate(self.labels)}
        missing = [n for n in names if n not in pos]
        if missing:
            raise UnknownLabel(f"unknown labels {missing}; known {list(self.labels)}")
        return [pos[n] for n in names]


@dataclass(frozen=True)
class EntropyValue:
    """Differential entropy; ``nats == -inf`` flags a singular Gram."""
    nats: float

    @property
    def bits(self) -> float:
        return self.nats / math.log(2.0)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.nats)


def gaussian_set(labels: Sequence[str], matrix: CMatrix) -> GaussianSet:
    return GaussianSet(tuple(labels), HermitianGram(np.asarray(matrix, dtype=np.complex128)))


def innovations(x: GaussianSet) -> InnovationsForm:
    """X = L E with E orthogonal; pivots are ||E_i||^2 in label order."""
    return ldl_semidefinite(x.gram)


def differential_entropy(x: GaussianSet) -> EntropyValue:
    # chain rule: h(X) = sum_i h(E_i) = sum_i ln(pi e ||E_i||^2)
    f = innovations(x)
    if not f.is_full_rank:
        return EntropyValue(-math.inf)
    return EntropyValue(float(np.sum(LOG_PI_E + np.log(f.d2))))


def entropy_rate_per_dim(x: GaussianSet) -> float:
    """ln(pi e |R_xx|^(1/N)): the geometric mean of the Cholesky factors."""
    f = innovations(x)
    if not f.is_full_rank:
        raise SingularGram("R_xx", f.rank, f.dim)
    if f.dim == 0:
        raise DimensionMismatch("entropy per dimension of an empty set")
    return LOG_PI_E + log_det_from_pivots(f) / f.dim


def permute(x: GaussianSet, order: Sequence[str]) -> GaussianSet:
    order = [str(o) for o in order]
    if sorted(order) != sorted(x.labels) or len(set(order)) != len(order):
        raise InvalidPermutation(f"{order} is not a permutation of {list(x.labels)}")
    idx = x.index_of(order)
    return GaussianSet(tuple(order), x.gram.principal(idx))


def restrict(x: GaussianSet, subset: Sequence[str]) -> GaussianSet:
    subset = [str(s) for s in subset]
    if len(set(subset)) != len(subset):
        raise ValueError(f"subset repeats labels: {subset}")
    idx = x.index_of(subset)
    return GaussianSet(tuple(subset), x.gram.principal(idx))


def conditional_entropy(x: GaussianSet, target: Sequence[str], given: Sequence[str] = ()) -> EntropyValue:
    """h(X_target | X_given) from the pivots of the set ordered (given, target)."""
    given = list(given)
    target = list(target)
    if set(given) & set(target):
        raise ValueError("target and given must be disjoint")
    f = innovations(restrict(x, given + target))
    tail = f.d2[len(given):]
    if np.any(tail == 0.0):
        return EntropyValue(-math.inf)
    return EntropyValue(float(np.sum(LOG_PI_E + np.log(tail))))
