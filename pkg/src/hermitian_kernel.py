# src/hermitian_kernel.py
"""
Double-precision complex matrix primitives for the Gram calculus.

Matrices are plain ``numpy`` complex128 arrays (``CMatrix``). Hermitian Gram
matrices are wrapped in :class:`HermitianGram`, which symmetrizes its input,
rejects genuinely non-Hermitian data and (by default) checks positive
semidefiniteness through the order-preserving LDL* factorization.
"""
from __future__ import annotations
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import numpy.typing as npt
from scipy.linalg import solve_triangular

from .config import DERIVED_PIVOT_SLACK, HERMITIAN_ASYMMETRY_TOL
from .errors import DimensionMismatch, NotHermitian, NotPositiveSemidefinite, SingularGram
from .logs import log_json

CMatrix = npt.NDArray[np.complex128]

_EPS = 2.0 ** -52


def as_cmatrix(a, name: str = "matrix") -> CMatrix:
    """Copy ``a`` into a 2-D complex128 array; rejects NaN/Inf."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name}: expected a 2-D matrix, got {m.ndim} dimensions")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name}: entries must be finite")
    return m


def pivot_tolerance(dim: int, scale: float) -> float:
    """Zero-pivot threshold: dim * 2^-52 * max(scale, 1)."""
    return max(dim, 1) * _EPS * max(float(scale), 1.0)


# ---------- Types ----------
@dataclass(frozen=True, eq=False)
class InnovationsForm:
    """Monic lower-triangular ``L`` and pivots ``d2`` with R = L diag(d2) L*."""
    L: CMatrix
    d2: npt.NDArray[np.float64]
    rank: int

    @property
    def dim(self) -> int:
        return int(self.d2.shape[0])

    @property
    def is_full_rank(self) -> bool:
        return self.rank == self.dim

    def reconstruct(self) -> CMatrix:
        return (self.L * self.d2) @ self.L.conj().T


@dataclass(frozen=True, eq=False)
class HermitianGram:
    """
    Square Hermitian positive-semidefinite matrix of inner products.

    ``scale`` is the diagonal scale used by the zero-pivot threshold. Grams
    derived from another Gram (Schur complements, estimate Grams) pass the
    source scale so that round-off is judged against it.

    ``slack`` widens only the negative side of the pivot test: a Gram that is
    PSD by construction may show pivots down to -slack * tol, which count as
    zero. Whether a pivot is zero or positive never depends on it.
    """
    matrix: CMatrix
    scale: float = 0.0
    check_psd: bool = True
    slack: float = 1.0

    def __post_init__(self):
        m = as_cmatrix(self.matrix, "gram")
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"gram must be square, got {m.shape[0]}x{m.shape[1]}")
        size = 1.0 + (float(np.max(np.abs(m))) if m.size else 0.0)
        asym = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if asym > HERMITIAN_ASYMMETRY_TOL * size:
            raise NotHermitian(f"gram is not Hermitian (asymmetry {asym:.3g})")
        m = 0.5 * (m + m.conj().T)
        m[np.diag_indices_from(m)] = m.diagonal().real
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        own = float(np.max(m.diagonal().real)) if m.size else 0.0
        object.__setattr__(self, "scale", max(own, float(self.scale)))
        if self.check_psd:
            # raises NotPositiveSemidefinite
            _ = self.innovations

    @classmethod
    def identity(cls, dim: int, power: float = 1.0) -> "HermitianGram":
        return cls(power * np.eye(dim, dtype=np.complex128))

    @classmethod
    def derived(cls, matrix, scale: float = 0.0, check_psd: bool = True) -> "HermitianGram":
        """A Gram computed from checked Grams (estimates, Schur complements, H R H* + N)."""
        return cls(matrix, scale=scale, check_psd=check_psd, slack=DERIVED_PIVOT_SLACK)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def tol(self) -> float:
        return pivot_tolerance(self.dim, self.scale)

    @cached_property
    def innovations(self) -> InnovationsForm:
        return _ldl(self.matrix, self.tol, self.scale, self.slack)

    def principal(self, idx) -> "HermitianGram":
        idx = np.asarray(idx, dtype=int)
        # a principal submatrix of a PSD Gram is PSD; only its round-off is new
        return HermitianGram.derived(self.matrix[np.ix_(idx, idx)], scale=self.scale, check_psd=False)


# ---------- Products ----------
def matmul(a: CMatrix, b: CMatrix) -> CMatrix:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def conj_transpose(a: CMatrix) -> CMatrix:
    return np.ascontiguousarray(np.asarray(a, dtype=np.complex128).conj().T)


# ---------- Factorization ----------
def _ldl(g: CMatrix, tol: float, scale: float, slack: float = 1.0) -> InnovationsForm:
    # column-by-column innovations recursion in the given variable order
    n = g.shape[0]
    L = np.eye(n, dtype=np.complex128)
    d2 = np.zeros(n, dtype=np.float64)
    # a zero Schur diagonal forces a zero Schur column (|r|^2 <= d * scale)
    coupling_tol = 10.0 * np.sqrt(slack * tol * max(scale, 1.0))
    floor = -slack * tol
    for j in range(n):
        w = d2[:j] * L[j, :j].conj()
        d = float((g[j, j] - L[j, :j] @ w).real)
        if d < floor:
            raise NotPositiveSemidefinite(j, d, -floor)
        r = g[j + 1:, j] - L[j + 1:, :j] @ w
        if d <= tol:
            if r.size and float(np.max(np.abs(r))) > coupling_tol:
                raise NotPositiveSemidefinite(j, d, tol)
            # dependent variable: zero innovation, column left empty
            continue
        d2[j] = d
        L[j + 1:, j] = r / d
    rank = int(np.count_nonzero(d2))
    if rank < n:
        log_json(kind="ldl_rank_deficient", dim=n, rank=rank)
    return InnovationsForm(L=L, d2=d2, rank=rank)


def ldl_semidefinite(g: HermitianGram) -> InnovationsForm:
    """Innovations (Cholesky) factorization R = L D^2 L*, without pivoting."""
    return g.innovations


def det_from_pivots(f: InnovationsForm) -> float:
    return float(np.prod(f.d2))


def log_det_from_pivots(f: InnovationsForm) -> float:
    if not f.is_full_rank:
        return -np.inf
    return float(np.sum(np.log(f.d2)))


# ---------- Solves ----------
def solve_unit_lower(l: CMatrix, b: CMatrix) -> CMatrix:
    """Forward substitution for monic lower-triangular ``l``."""
    l = np.asarray(l, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if l.ndim != 2 or l.shape[0] != l.shape[1] or b.shape[0] != l.shape[0]:
        raise DimensionMismatch(f"cannot solve {l.shape} system with right-hand side {b.shape}")
    if l.shape[0] == 0:
        return b.copy()
    return solve_triangular(l, b, lower=True, unit_diagonal=True, check_finite=False)


def solve_psd(g: HermitianGram, b: CMatrix, which: str = "gram") -> CMatrix:
    """Solve g x = b through L, D^2 and L*; ``which`` names g in SingularGram."""
    b = np.asarray(b, dtype=np.complex128)
    if b.shape[0] != g.dim:
        raise DimensionMismatch(f"right-hand side has {b.shape[0]} rows, gram has dim {g.dim}")
    f = ldl_semidefinite(g)
    if not f.is_full_rank:
        raise SingularGram(which, f.rank, f.dim)
    if g.dim == 0:
        return b.copy()
    z = solve_unit_lower(f.L, b)
    z = z / (f.d2[:, None] if z.ndim == 2 else f.d2)
    return solve_triangular(f.L.conj().T, z, lower=False, unit_diagonal=True, check_finite=False)


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def gram_scale(g: HermitianGram | CMatrix) -> float:
    """1 + max diagonal entry; the scale of the tolerance ladder."""
    m = g.matrix if isinstance(g, HermitianGram) else np.asarray(g)
    return 1.0 + (float(np.max(m.diagonal().real)) if m.size else 0.0)
