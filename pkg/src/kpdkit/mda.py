"""Monic decomposition: exact rank-one test via head-index slices."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from kpdkit.errors import DomainError
from kpdkit.stp import kron_all
from kpdkit.tensor_core import Hypermatrix, as_shape, head, head_factors

__all__ = [
    "MonicFactors",
    "ExactnessReport",
    "projector_extract",
    "exact_decompose",
    "reconstruct",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class MonicFactors:
    """``scale * x_1 ⊗ ... ⊗ x_d`` with every ``x_s`` having head value 1."""

    scale: float
    factors: list[np.ndarray] = field(default_factory=list)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)


@dataclass(frozen=True)
class ExactnessReport:
    decomposable: bool
    residual: float
    factors: MonicFactors
    head_position: int
    tol: float


def projector_extract(v0, shape: Sequence[int], e: Sequence[int], s: int) -> np.ndarray:
    """Fibre of ``v0`` along axis ``s`` with every other axis frozen at ``e``.

    Equals the product of the projector
    ``[δ^{e_1}]ᵀ ⊗ ... ⊗ I_{n_s} ⊗ ... ⊗ [δ^{e_d}]ᵀ`` with ``v0`` but is a
    strided gather.  ``e`` and ``s`` are 1-based.
    """
    shape = as_shape(shape)
    v0 = np.asarray(v0, dtype=np.float64).ravel()
    if v0.size != int(np.prod(shape)):
        raise DomainError(f"vector of length {v0.size} does not match shape {shape}")
    if not 1 <= s <= len(shape):
        raise DomainError(f"axis {s} outside 1..{len(shape)}")
    if len(e) != len(shape):
        raise DomainError(f"head multi-index {tuple(e)} does not match shape {shape}")
    idx = [int(i) - 1 for i in e]
    idx[s - 1] = slice(None)
    return v0.reshape(shape)[tuple(idx)].copy()


def reconstruct(f: MonicFactors) -> np.ndarray:
    return f.scale * kron_all(f.factors)


def exact_decompose(h: Hypermatrix, tol: float = DEFAULT_TOL) -> ExactnessReport:
    """Test whether ``h`` is a single Kronecker product of vectors.

    The candidate factors are always returned; ``decomposable`` is set when
    the relative residual ``‖V - scale·⊗x_s‖ / ‖V‖`` is at most ``tol``.
    Note that the head value divides the data; a tiny head value makes the
    candidate factors ill-conditioned.
    """
    v = h.values
    info = head(v)  # raises on the zero hypermatrix
    v0 = v / info.value
    e = head_factors(h.shape, info.position)
    factors = [projector_extract(v0, h.shape, e, s) for s in range(1, h.order + 1)]
    for x, es in zip(factors, e):
        # v0[head] is exactly 1.0 already; pin it so monicity never rests on rounding
        x[es - 1] = 1.0
    monic = MonicFactors(info.value, factors)
    residual = float(np.linalg.norm(v - reconstruct(monic)))
    return ExactnessReport(
        decomposable=residual <= tol * float(np.linalg.norm(v)),
        residual=residual,
        factors=monic,
        head_position=info.position,
        tol=tol,
    )
