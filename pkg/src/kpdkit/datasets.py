"""Small reference inputs shipped with the package."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from kpdkit.tensor_core import Hypermatrix, load_hypermatrix

__all__ = [
    "data_path",
    "rank_one_4x2x2x3",
    "nonexact_4x2x2x3",
    "two_basin_4x2x2x3",
    "collar16",
    "collar16_factors",
]


def data_path(name: str) -> Path:
    return Path(str(resources.files("kpdkit") / "data" / name))


def rank_one_4x2x2x3() -> Hypermatrix:
    """Exactly ``4 * (0,0,1,-1) ⊗ (1,2) ⊗ (0,1) ⊗ (0,1,0.5)``."""
    return load_hypermatrix(data_path("rank_one_4x2x2x3.txt"))


def nonexact_4x2x2x3() -> Hypermatrix:
    """Same sparsity as the rank-one case but not decomposable."""
    return load_hypermatrix(data_path("nonexact_4x2x2x3.txt"))


def two_basin_4x2x2x3() -> Hypermatrix:
    """Input whose alternating solver has two attracting error levels."""
    return load_hypermatrix(data_path("two_basin_4x2x2x3.txt"))


def collar16() -> np.ndarray:
    return load_hypermatrix(data_path("collar16.txt")).as_array().copy()


def collar16_factors() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(B1, C1, B2, C2)`` with ``collar16() == B1⊗C1 - 1024·B2⊗C2``."""
    blocks = load_hypermatrix(data_path("collar16_factors.txt")).as_array()
    return tuple(blocks[i].copy() for i in range(4))
