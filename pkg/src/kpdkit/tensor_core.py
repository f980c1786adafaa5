"""Hypermatrix storage, index algebra and matricization.

Values are stored flat in lexicographic order with the last axis varying
fastest.  Every index crossing the public API is 1-based; the conversion to
numpy's 0-based addressing happens here and nowhere else.
"""
from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from kpdkit.errors import DomainError, ParseError

__all__ = [
    "Hypermatrix",
    "HeadInfo",
    "as_shape",
    "linear_index",
    "multi_index",
    "vectorize",
    "matricize",
    "row_stack",
    "column_stack",
    "head",
    "head_factors",
    "dumps_hypermatrix",
    "loads_hypermatrix",
    "loads_matrix",
    "load_hypermatrix",
    "load_matrix",
    "dump_hypermatrix",
    "format_real",
]


def as_shape(dims: Iterable[int]) -> tuple[int, ...]:
    """Validate ``dims`` and return it as a tuple of positive ints."""
    out = tuple(int(n) for n in dims)
    if not out:
        raise DomainError("shape needs at least one axis")
    for axis, (raw, n) in enumerate(zip(dims, out), start=1):
        if n != raw or n < 1:
            raise DomainError(f"axis {axis}: dimension must be a positive integer, got {raw!r}")
    return out


@dataclass(frozen=True)
class Hypermatrix:
    """A dense real hypermatrix with its values in vectorized order."""

    shape: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        shape = as_shape(self.shape)
        values = np.array(self.values, dtype=np.float64).ravel()
        if values.size != math.prod(shape):
            raise DomainError(
                f"{values.size} values given for shape {shape} (needs {math.prod(shape)})"
            )
        values.flags.writeable = False
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_array(cls, arr) -> Hypermatrix:
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr.shape, arr.ravel())

    @classmethod
    def from_entries(cls, shape, entries: dict) -> Hypermatrix:
        """Build a hypermatrix that is zero except at the given 1-based entries."""
        shape = as_shape(shape)
        values = np.zeros(math.prod(shape))
        for mi, value in entries.items():
            values[linear_index(shape, mi) - 1] = value
        return cls(shape, values)

    @property
    def order(self) -> int:
        return len(self.shape)

    @property
    def total(self) -> int:
        return self.values.size

    def as_array(self) -> np.ndarray:
        return self.values.reshape(self.shape)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __getitem__(self, mi) -> float:
        return float(self.values[linear_index(self.shape, mi) - 1])


@dataclass(frozen=True)
class HeadInfo:
    """First nonzero entry of a vector: 1-based ``position`` and its ``value``."""

    position: int
    value: float


def _check_multi_index(shape, mi) -> tuple[int, ...]:
    mi = tuple(int(i) for i in mi)
    if len(mi) != len(shape):
        raise DomainError(f"multi-index {mi} has {len(mi)} entries, shape {shape} has {len(shape)} axes")
    for axis, (i, n) in enumerate(zip(mi, shape), start=1):
        if not 1 <= i <= n:
            raise DomainError(f"axis {axis}: index {i} outside [1, {n}]")
    return mi


def linear_index(shape: Sequence[int], mi: Sequence[int]) -> int:
    """Position of ``mi`` in vectorized order (both 1-based)."""
    shape = as_shape(shape)
    mi = _check_multi_index(shape, mi)
    k = 0
    for i, n in zip(mi, shape):
        k = k * n + (i - 1)
    return k + 1


def multi_index(shape: Sequence[int], k: int) -> tuple[int, ...]:
    """Inverse of :func:`linear_index`: peel off axes from the last one."""
    shape = as_shape(shape)
    total = math.prod(shape)
    if int(k) != k or not 1 <= k <= total:
        raise DomainError(f"linear index {k} outside [1, {total}]")
    rest = int(k) - 1
    out = [0] * len(shape)
    for s in range(len(shape) - 1, 0, -1):
        rest, out[s] = divmod(rest, shape[s])
        out[s] += 1
    out[0] = rest + 1
    return tuple(out)


def vectorize(h: Hypermatrix) -> np.ndarray:
    return h.values.copy()


def matricize(h: Hypermatrix, row_axes: Sequence[int], col_axes: Sequence[int]) -> np.ndarray:
    """Arrange ``h`` as a matrix with rows labelled by ``row_axes``.

    Axis ids are 1-based.  Rows and columns are each ordered
    lexicographically over their axes, in the order the axes are listed.
    An empty ``col_axes`` gives a column vector, an empty ``row_axes`` a
    row vector.
    """
    d = h.order
    rows = [int(a) for a in row_axes]
    cols = [int(a) for a in col_axes]
    if sorted(rows + cols) != list(range(1, d + 1)):
        raise DomainError(f"axes {rows} x {cols} are not a partition of 1..{d}")
    arr = np.transpose(h.as_array(), [a - 1 for a in rows + cols])
    nrows = math.prod(h.shape[a - 1] for a in rows)
    ncols = math.prod(h.shape[a - 1] for a in cols)
    return np.ascontiguousarray(arr).reshape(nrows, ncols)


def row_stack(m) -> np.ndarray:
    """Concatenate the rows of ``m`` into one vector."""
    return np.asarray(m, dtype=np.float64).reshape(-1).copy()


def column_stack(m) -> np.ndarray:
    """Concatenate the columns of ``m`` into one vector."""
    return np.asarray(m, dtype=np.float64).T.reshape(-1).copy()


def head(v) -> HeadInfo:
    v = np.asarray(v, dtype=np.float64).ravel()
    nz = np.flatnonzero(v)
    if nz.size == 0:
        raise DomainError("zero vector has no head")
    return HeadInfo(int(nz[0]) + 1, float(v[nz[0]]))


def head_factors(shape: Sequence[int], e: int) -> tuple[int, ...]:
    """Per-axis head indices of a rank-one vector whose head sits at ``e``."""
    return multi_index(shape, e)


# text format ---------------------------------------------------------------

_DIMS_RE = re.compile(r"^\s*dims\s*:(.*)$")


def _strip_comments(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped


def _parse_float(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", lineno) from None


def loads_hypermatrix(text: str) -> Hypermatrix:
    """Parse the ``dims: n1 ... nd`` text format."""
    lines = list(_strip_comments(text))
    if not lines:
        raise ParseError("empty input", 1)
    lineno, first = lines[0]
    m = _DIMS_RE.match(first)
    if m is None:
        raise ParseError("expected 'dims: n1 n2 ... nd'", lineno)
    try:
        dims = [int(tok) for tok in m.group(1).split()]
        shape = as_shape(dims)
    except (ValueError, DomainError) as exc:
        raise ParseError(f"bad dims line ({exc})", lineno) from None
    values = []
    for lineno, line in lines[1:]:
        values.extend(_parse_float(tok, lineno) for tok in line.split())
    total = math.prod(shape)
    if len(values) != total:
        last = lines[-1][0]
        raise ParseError(f"expected {total} values for dims {shape}, found {len(values)}", last)
    return Hypermatrix(shape, values)


def loads_matrix(text: str) -> np.ndarray:
    """Parse a matrix given either in the hypermatrix format (d=2) or as plain rows."""
    lines = list(_strip_comments(text))
    if not lines:
        raise ParseError("empty input", 1)
    if _DIMS_RE.match(lines[0][1]):
        h = loads_hypermatrix(text)
        if h.order != 2:
            raise ParseError(f"matrix input needs 2 dims, got {h.order}", lines[0][0])
        return h.as_array().copy()
    rows = [[_parse_float(tok, lineno) for tok in line.split()] for lineno, line in lines]
    width = len(rows[0])
    for (lineno, _), row in zip(lines, rows):
        if len(row) != width:
            raise ParseError(f"row has {len(row)} entries, expected {width}", lineno)
    return np.array(rows, dtype=np.float64)


def dumps_hypermatrix(h: Hypermatrix, per_line: int | None = None) -> str:
    """Serialize with 17 significant digits; one line per last-axis fibre by default."""
    per_line = per_line or h.shape[-1]
    out = ["dims: " + " ".join(str(n) for n in h.shape)]
    vals = [format_real(v) for v in h.values]
    for start in range(0, len(vals), per_line):
        out.append(" ".join(vals[start:start + per_line]))
    return "\n".join(out) + "\n"


def format_real(v: float) -> str:
    """17 significant digits, enough to round-trip a float64."""
    v = float(v)
    if v == 0.0:
        return "0"
    return format(v, ".17g")


def load_hypermatrix(path: str | os.PathLike) -> Hypermatrix:
    with open(path, encoding="utf-8") as fh:
        return loads_hypermatrix(fh.read())


def load_matrix(path: str | os.PathLike) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return loads_matrix(fh.read())


def dump_hypermatrix(h: Hypermatrix, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_hypermatrix(h))
