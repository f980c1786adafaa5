"""Matrix-form Kronecker decomposition through the vector-form solvers.

The row-stacked matrix ``A`` is indexed ``j_1 ... j_r k_1 ... k_r`` (row
axes then column axes) while ``⊗_s V_r(A_s)`` is indexed
``j_1 k_1 ... j_r k_r``.  Interleaving the axes with a permutation map
turns one into the other, so matrix-form problems become vector-form
problems over the merged shape ``(m_1 n_1, ..., m_r n_r)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from kpdkit.errors import DomainError
from kpdkit.stp import apply_perm, kron_all, perm_map
from kpdkit.sumkpd import KpdSum, SumConfig, greedy_sum
from kpdkit.sva import FactorTerm
from kpdkit.tensor_core import as_shape, row_stack

__all__ = [
    "MatKpdProblem",
    "MatFactorTerm",
    "MatKpdResult",
    "pairing_permutation",
    "mat_to_vec",
    "vec_to_mat",
    "vec_factors_to_matrices",
    "mat_sum_kpd",
    "split_2x2",
    "expand_by_splits",
    "reconstruct_terms",
]


@dataclass(frozen=True)
class MatKpdProblem:
    a: np.ndarray
    row_dims: tuple[int, ...]
    col_dims: tuple[int, ...]

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64)
        if a.ndim != 2:
            raise DomainError(f"expected a matrix, got ndim={a.ndim}")
        row_dims = as_shape(self.row_dims)
        col_dims = as_shape(self.col_dims)
        if len(row_dims) != len(col_dims):
            raise DomainError(
                f"row dims {row_dims} and column dims {col_dims} differ in length; pad with 1"
            )
        if math.prod(row_dims) != a.shape[0] or math.prod(col_dims) != a.shape[1]:
            raise DomainError(
                f"dims {row_dims} x {col_dims} do not factor a {a.shape[0]}x{a.shape[1]} matrix"
            )
        a.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "row_dims", row_dims)
        object.__setattr__(self, "col_dims", col_dims)

    @property
    def r(self) -> int:
        return len(self.row_dims)

    @property
    def merged_shape(self) -> tuple[int, ...]:
        return tuple(m * n for m, n in zip(self.row_dims, self.col_dims))


@dataclass(frozen=True)
class MatFactorTerm:
    """``coefficient * A_1 ⊗ ... ⊗ A_r``."""

    matrices: tuple[np.ndarray, ...]
    coefficient: float = 1.0

    def matrix(self) -> np.ndarray:
        out = kron_all(self.matrices)
        return out if self.coefficient == 1.0 else self.coefficient * out


@dataclass
class MatKpdResult:
    problem: MatKpdProblem
    terms: list[MatFactorTerm]
    vector_result: KpdSum

    @property
    def residual_norms(self) -> list[float]:
        return list(self.vector_result.residual_norms)

    @property
    def squared_residuals(self) -> list[float]:
        return [r * r for r in self.vector_result.residual_norms]

    @property
    def stalled(self) -> bool:
        return self.vector_result.stalled


def pairing_permutation(row_dims: Sequence[int], col_dims: Sequence[int]) -> tuple[int, ...]:
    """Axis order ``(1, r+1, 2, r+2, ..., r, 2r)`` pairing each row axis with its column axis."""
    if len(row_dims) != len(col_dims):
        raise DomainError(f"{len(row_dims)} row dims but {len(col_dims)} column dims")
    r = len(row_dims)
    if r == 0:
        raise DomainError("need at least one factor")
    return tuple(a for s in range(1, r + 1) for a in (s, r + s))


def _pairing_map(problem: MatKpdProblem):
    sigma = pairing_permutation(problem.row_dims, problem.col_dims)
    return perm_map(problem.row_dims + problem.col_dims, sigma)


def mat_to_vec(problem: MatKpdProblem) -> tuple[np.ndarray, tuple[int, ...]]:
    """Permuted row stacking of ``A`` and the merged shape it decomposes over."""
    return apply_perm(_pairing_map(problem), row_stack(problem.a)), problem.merged_shape


def vec_to_mat(problem: MatKpdProblem, v) -> np.ndarray:
    """Inverse of :func:`mat_to_vec`: a vector in paired order back to a matrix."""
    flat = apply_perm(_pairing_map(problem).inverse(), v)
    return flat.reshape(problem.a.shape)


def vec_factors_to_matrices(
    term: FactorTerm, row_dims: Sequence[int], col_dims: Sequence[int]
) -> MatFactorTerm:
    if not len(term.factors) == len(row_dims) == len(col_dims):
        raise DomainError(
            f"{len(term.factors)} factors for {len(row_dims)} row and {len(col_dims)} column dims"
        )
    mats = []
    for s, (f, m, n) in enumerate(zip(term.factors, row_dims, col_dims), start=1):
        if f.size != m * n:
            raise DomainError(f"factor {s} has length {f.size}, expected {m}*{n}")
        mats.append(f.reshape(m, n).copy())
    return MatFactorTerm(tuple(mats), term.coefficient)


def reconstruct_terms(terms: Sequence[MatFactorTerm]) -> np.ndarray:
    if not terms:
        raise DomainError("no terms to reconstruct")
    out = terms[0].matrix().copy()
    for t in terms[1:]:
        out += t.matrix()
    return out


def mat_sum_kpd(problem: MatKpdProblem, cfg: SumConfig | None = None) -> MatKpdResult:
    v, shape = mat_to_vec(problem)
    res = greedy_sum(v, shape, cfg)
    terms = [vec_factors_to_matrices(t, problem.row_dims, problem.col_dims) for t in res.terms]
    return MatKpdResult(problem, terms, res)


def split_2x2(m, tol: float = 1e-12) -> list[tuple[np.ndarray, np.ndarray]]:
    """Write a 2x2 matrix as one or two products ``u vᵀ`` with ``u`` a column, ``v`` a row.

    The branches follow the pivot: ``a != 0`` eliminates with ``a``;
    ``a = 0, b != 0`` with ``b``; ``a = b = 0`` leaves the bottom row.
    Pivots with ``|a| <= tol·‖M‖`` count as zero, and a second pair whose
    row is that small is dropped.  Returned ``u`` has shape (2, 1) and
    ``v`` shape (1, 2).
    """
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (2, 2):
        raise DomainError(f"split_2x2 needs a 2x2 matrix, got {m.shape}")
    (a, b), (c, d) = m
    small = tol * float(np.linalg.norm(m))
    e2 = np.array([[0.0], [1.0]])
    if abs(a) > small:
        pairs = [(np.array([[1.0], [c / a]]), np.array([[a, b]])),
                 (e2, np.array([[0.0, d - c * b / a]]))]
    elif abs(b) > small:
        pairs = [(np.array([[1.0], [d / b]]), np.array([[0.0, b]])),
                 (e2, np.array([[c, 0.0]]))]
    else:
        return [(e2, np.array([[c, d]]))]
    if len(pairs) == 2 and np.max(np.abs(pairs[1][1])) <= small:
        pairs = pairs[:1]
    return pairs


def expand_by_splits(terms: Sequence[MatFactorTerm], tol: float = 1e-12) -> list[MatFactorTerm]:
    """Distribute :func:`split_2x2` over every factor of every term.

    Each output term has factors ``u_1, v_1, u_2, v_2, ...`` (2x1 then
    1x2), whose Kronecker product equals the original factor product.
    """
    out = []
    for term in terms:
        per_factor = []
        for s, mat in enumerate(term.matrices, start=1):
            if np.shape(mat) != (2, 2):
                raise DomainError(f"factor {s} has shape {np.shape(mat)}, expected (2, 2)")
            per_factor.append(split_2x2(mat, tol))
        for choice in product(*per_factor):
            mats = tuple(x for pair in choice for x in pair)
            out.append(MatFactorTerm(mats, term.coefficient))
    return out
