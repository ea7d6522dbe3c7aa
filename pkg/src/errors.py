# src/errors.py
from __future__ import annotations
from typing import Optional

from numpy.linalg import LinAlgError


class GramError(Exception):
    """Base for every error raised by the Gram-matrix calculus."""


class NotHermitian(GramError, ValueError):
    pass


class DimensionMismatch(GramError, ValueError):
    pass


class InvalidPermutation(GramError, ValueError):
    pass


class UnknownLabel(GramError, KeyError):
    def __str__(self) -> str:
        # KeyError quotes its argument; keep the message readable
        return str(self.args[0]) if self.args else ""


class NotPositiveSemidefinite(GramError, LinAlgError):
    def __init__(self, index: int, pivot: float, tol: float):
        super().__init__(f"not positive semidefinite: pivot {index} = {pivot:.6g} < -{tol:.3g}")
        self.index = index
        self.pivot = pivot
        self.tol = tol


class SingularGram(GramError, LinAlgError):
    def __init__(self, which: str, rank: Optional[int] = None, dim: Optional[int] = None):
        detail = f" (rank {rank} < {dim})" if rank is not None and dim is not None else ""
        super().__init__(f"{which} is singular{detail}")
        self.which = which
        self.rank = rank
        self.dim = dim


class TooFewTrials(GramError, ValueError):
    pass


class CapExceeded(GramError, ValueError):
    pass


class ConfigError(GramError, ValueError):
    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key
