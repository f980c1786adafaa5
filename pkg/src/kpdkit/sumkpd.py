"""Greedy finite-sum decomposition by repeated nearest-Kronecker deflation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from kpdkit.errors import AllRestartsFailed, DomainError
from kpdkit.sva import FactorTerm, StationaryHistogram, SvaConfig, nkp_multistart
from kpdkit.tensor_core import as_shape

__all__ = ["SumConfig", "KpdSum", "greedy_sum", "reconstruct_sum"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SumConfig:
    eps_sum: float = 1e-8
    max_terms: int = 32
    inner: SvaConfig = field(default_factory=SvaConfig)

    def __post_init__(self):
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")
        if self.eps_sum < 0:
            raise DomainError("eps_sum must be non-negative")


@dataclass
class KpdSum:
    shape: tuple[int, ...]
    terms: list[FactorTerm]
    residual_norms: list[float]
    final_residual: np.ndarray
    initial_norm: float
    eps_sum: float
    stalled: bool = False
    histograms: list[StationaryHistogram] = field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return bool(self.residual_norms) and self.residual_norms[-1] < self.eps_sum


def reconstruct_sum(result: KpdSum) -> np.ndarray:
    out = np.zeros(int(np.prod(result.shape)))
    for term in result.terms:
        out += term.vector()
    return out


def greedy_sum(v, shape: Sequence[int], cfg: SumConfig | None = None) -> KpdSum:
    """Subtract the best rank-one term from the residual until it is small.

    Stops when ``‖V_k‖ < eps_sum``, after ``max_terms`` terms, or when a
    step fails to shrink the residual (``stalled``).  A step whose inner
    solver ends in zero stationary points on every restart also stalls.
    """
    cfg = cfg or SumConfig()
    shape = as_shape(shape)
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size != int(np.prod(shape)):
        raise DomainError(f"vector of length {v.size} does not match shape {shape}")
    if not np.any(v):
        raise DomainError("cannot decompose the zero vector")
    residual = v.copy()
    prev_norm = float(np.linalg.norm(residual))
    result = KpdSum(shape, [], [], residual, prev_norm, cfg.eps_sum)
    for k in range(1, cfg.max_terms + 1):
        if not np.any(residual):
            break
        try:
            best, hist = nkp_multistart(residual, shape, cfg.inner)
        except AllRestartsFailed as exc:
            log.warning("term %d: %s", k, exc)
            result.stalled = True
            break
        nxt = residual - best.term.vector()
        norm = float(np.linalg.norm(nxt))
        if not norm < prev_norm:
            log.warning("term %d did not reduce the residual (%.6g -> %.6g)", k, prev_norm, norm)
            result.stalled = True
            break
        result.terms.append(best.term)
        result.residual_norms.append(norm)
        result.histograms.append(hist)
        residual = nxt
        prev_norm = norm
        if norm < cfg.eps_sum:
            break
    result.final_residual = residual
    return result
