# src/strategies.py
"""Random instances for the property tests, driven by hypothesis-drawn seeds."""
from __future__ import annotations
from typing import List, Tuple

import numpy as np
from hypothesis import strategies as st

from .hermitian_kernel import HermitianGram
from .mmse_estimation import JointGram
from .scenarios import ChannelScenario, mimo_scenario

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_psd(rng: np.random.Generator, dim: int, rank: int | None = None, ridge: float = 0.2) -> np.ndarray:
    """B B* / cols (+ ridge I when full rank); eigenvalues stay O(1)."""
    if rank is None:
        b = complex_normal(rng, (dim, dim + 2))
        return b @ b.conj().T / (dim + 2) + ridge * np.eye(dim)
    b = complex_normal(rng, (dim, rank))
    return b @ b.conj().T


def random_partition(rng: np.random.Generator, labels: List[str], n_groups: int) -> List[List[str]]:
    """Consecutive, non-empty groups."""
    cuts = sorted(rng.choice(np.arange(1, len(labels)), size=n_groups - 1, replace=False).tolist())
    bounds = [0] + cuts + [len(labels)]
    return [labels[a:b] for a, b in zip(bounds[:-1], bounds[1:])]


@st.composite
def joint_grams(draw, min_groups: int = 2, max_groups: int = 4, max_dim: int = 8) -> JointGram:
    rng = np.random.default_rng(draw(seeds))
    n_groups = draw(st.integers(min_groups, max_groups))
    dim = draw(st.integers(n_groups, max_dim))
    labels = [f"v{i + 1}" for i in range(dim)]
    parts = random_partition(rng, labels, n_groups)
    groups = tuple((f"g{i + 1}", tuple(p)) for i, p in enumerate(parts))
    return JointGram(groups, HermitianGram(random_psd(rng, dim)))


@st.composite
def channel_cases(draw, max_inputs: int = 6, max_outputs: int = 4) -> Tuple[ChannelScenario, List[str]]:
    """A MIMO scenario with 2-4 groups and a random decoding order."""
    rng = np.random.default_rng(draw(seeds))
    t = draw(st.integers(2, max_inputs))
    r = draw(st.integers(1, max_outputs))
    n_groups = draw(st.integers(2, min(4, t)))
    labels = [f"x{i + 1}" for i in range(t)]
    groups = random_partition(rng, labels, n_groups)
    s = mimo_scenario(
        complex_normal(rng, (r, t)),
        input_gram=HermitianGram(random_psd(rng, t)),
        noise_variance=float(rng.uniform(0.2, 2.0)),
        groups=groups,
    )
    order = list(rng.permutation(s.group_names))
    return s, [str(o) for o in order]


@st.composite
def spread_channel_cases(draw, max_inputs: int = 6) -> Tuple[ChannelScenario, List[str]]:
    """
    Wide MIMO channels (fewer outputs than inputs) with per-entry gains and
    input powers spread over two decades and noise from 10^-2 to 10.
    """
    rng = np.random.default_rng(draw(seeds))
    t = draw(st.integers(2, max_inputs))
    r = draw(st.integers(1, t - 1))
    n_groups = draw(st.integers(2, min(4, t)))
    labels = [f"x{i + 1}" for i in range(t)]
    groups = random_partition(rng, labels, n_groups)
    h = complex_normal(rng, (r, t)) * 10.0 ** rng.uniform(-1.0, 1.0, size=(r, t))
    s = mimo_scenario(
        h,
        powers=(10.0 ** rng.uniform(-1.0, 1.0, size=t)).tolist(),
        noise_variance=float(10.0 ** rng.uniform(-2.0, 1.0)),
        groups=groups,
    )
    order = list(rng.permutation(s.group_names))
    return s, [str(o) for o in order]
