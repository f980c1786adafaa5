"""Kronecker and semi-tensor products, swap and axis-permutation maps.

Permutation maps are kept as index bijections so applying one costs O(n);
``PermutationMap.to_dense`` recovers the 0/1 matrix when a test needs it.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from kpdkit.errors import DomainError, ParseError
from kpdkit.tensor_core import as_shape

__all__ = [
    "kron",
    "kron_all",
    "stp",
    "PermutationMap",
    "as_permutation",
    "swap_map",
    "perm_map",
    "apply_perm",
    "permuted_shape",
]


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        return a[:, None]
    if a.ndim != 2:
        raise DomainError(f"expected a vector or matrix, got ndim={a.ndim}")
    return a


def kron(a, b) -> np.ndarray:
    """Kronecker product; 1-D inputs are column vectors and two of them give a 1-D result."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim == 1 and b.ndim == 1:
        return np.kron(a, b)
    return np.kron(_as_matrix(a), _as_matrix(b))


def kron_all(factors: Sequence) -> np.ndarray:
    if not factors:
        raise DomainError("kron_all needs at least one factor")
    return reduce(kron, factors)


def stp(a, b) -> np.ndarray:
    """Left semi-tensor product ``(A ⊗ I_{t/n})(B ⊗ I_{t/p})`` with ``t = lcm(n, p)``."""
    a = _as_matrix(a)
    b = _as_matrix(b)
    n, p = a.shape[1], b.shape[0]
    t = math.lcm(n, p)
    left = a if t == n else np.kron(a, np.eye(t // n))
    right = b if t == p else np.kron(b, np.eye(t // p))
    return left @ right


def as_permutation(sigma: Sequence[int], d: int | None = None) -> tuple[int, ...]:
    """Validate a 1-based permutation given by its images σ(1), ..., σ(d)."""
    images = tuple(int(s) for s in sigma)
    if d is not None and len(images) != d:
        raise DomainError(f"permutation has {len(images)} images, expected {d}")
    if sorted(images) != list(range(1, len(images) + 1)):
        raise DomainError(f"{images} is not a bijection on 1..{len(images)}")
    return images


@dataclass(frozen=True, eq=False)
class PermutationMap:
    """Position bijection: source position ``p`` moves to ``dest[p]`` (0-based)."""

    dest: np.ndarray

    def __post_init__(self):
        dest = np.array(self.dest, dtype=np.intp).ravel()
        if not np.array_equal(np.sort(dest), np.arange(dest.size)):
            raise DomainError("destination list is not a bijection")
        dest.flags.writeable = False
        object.__setattr__(self, "dest", dest)

    @classmethod
    def identity(cls, n: int) -> PermutationMap:
        return cls(np.arange(n))

    @classmethod
    def from_delta(cls, positions: Sequence[int]) -> PermutationMap:
        """Build from the 1-based column list of ``δ_n[...]``."""
        return cls(np.asarray(positions, dtype=np.intp) - 1)

    @property
    def size(self) -> int:
        return self.dest.size

    def delta(self) -> list[int]:
        """1-based destinations, i.e. the ``δ_n[...]`` column list."""
        return [int(p) + 1 for p in self.dest]

    def inverse(self) -> PermutationMap:
        inv = np.empty_like(self.dest)
        inv[self.dest] = np.arange(self.size)
        return PermutationMap(inv)

    def compose(self, first: PermutationMap) -> PermutationMap:
        """The map that applies ``first`` and then ``self``."""
        if first.size != self.size:
            raise DomainError(f"cannot compose maps of sizes {self.size} and {first.size}")
        return PermutationMap(self.dest[first.dest])

    def to_dense(self) -> np.ndarray:
        w = np.zeros((self.size, self.size))
        w[self.dest, np.arange(self.size)] = 1.0
        return w

    def __eq__(self, other):
        if not isinstance(other, PermutationMap):
            return NotImplemented
        return np.array_equal(self.dest, other.dest)

    def __hash__(self):
        return hash(self.dest.tobytes())

    def dumps(self) -> str:
        return f"permmap: {self.size}\n" + " ".join(str(p) for p in self.delta()) + "\n"

    @classmethod
    def loads(cls, text: str) -> PermutationMap:
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise ParseError("empty permutation map", 1)
        m = re.match(r"^\s*permmap\s*:\s*(\d+)\s*$", lines[0])
        if m is None:
            raise ParseError("expected 'permmap: n'", 1)
        n = int(m.group(1))
        try:
            positions = [int(tok) for ln in lines[1:] for tok in ln.split()]
        except ValueError as exc:
            raise ParseError(str(exc)) from None
        if len(positions) != n:
            raise ParseError(f"expected {n} positions, found {len(positions)}")
        try:
            return cls.from_delta(positions)
        except DomainError as exc:
            raise ParseError(str(exc)) from None


def apply_perm(pmap: PermutationMap, v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size != pmap.size:
        raise DomainError(f"map of size {pmap.size} applied to vector of length {v.size}")
    out = np.empty_like(v)
    out[pmap.dest] = v
    return out


def perm_map(shape: Sequence[int], sigma: Sequence[int]) -> PermutationMap:
    """Map sending ``x_1 ⊗ ... ⊗ x_d`` to ``x_σ(1) ⊗ ... ⊗ x_σ(d)``.

    The source multi-index is simply re-addressed under the new axis
    order; no n-by-n matrix is formed.
    """
    shape = as_shape(shape)
    sigma = as_permutation(sigma, len(shape))
    n = math.prod(shape)
    source = np.arange(n).reshape(shape).transpose([s - 1 for s in sigma]).ravel()
    dest = np.empty(n, dtype=np.intp)
    dest[source] = np.arange(n)
    return PermutationMap(dest)


def swap_map(m: int, n: int) -> PermutationMap:
    """Swap map ``W_[m,n]``: sends ``x ⊗ y`` to ``y ⊗ x`` for x of length m."""
    return perm_map((m, n), (2, 1))


def permuted_shape(shape: Sequence[int], sigma: Sequence[int]) -> tuple[int, ...]:
    """Axis dimensions after applying :func:`perm_map` with ``sigma``."""
    shape = as_shape(shape)
    sigma = as_permutation(sigma, len(shape))
    return tuple(shape[s - 1] for s in sigma)
