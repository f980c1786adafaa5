"""Nearest Kronecker product of vectors by cyclic alternating updates.

Each update solves the least-squares problem for one factor with all the
others fixed, which has the closed form

    x_s = [(⊗_{i<s} x_i)ᵀ ⊗ I ⊗ (⊗_{i>s} x_i)ᵀ] V / ∏_{i≠s} ‖x_i‖².

The sweep is Gauss-Seidel: later factors see the freshly updated earlier
ones.  A single run lands on some stationary point; ``nkp_multistart``
repeats it from independent random starts and keeps the best.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from kpdkit.errors import (
    AllRestartsFailed,
    DegenerateFactor,
    DomainError,
    ZeroStationaryPoint,
)
from kpdkit.stp import kron_all
from kpdkit.tensor_core import as_shape

__all__ = [
    "SvaConfig",
    "FactorTerm",
    "NkpSolution",
    "Cluster",
    "StationaryHistogram",
    "als_update",
    "gauge_normalize",
    "nkp",
    "nkp_multistart",
    "cluster_errors",
    "rank_one_oracle",
    "INIT_MODES",
]

INIT_MODES = ("unit_interval", "centered")


@dataclass(frozen=True)
class SvaConfig:
    """Solver knobs.

    ``init`` picks the start distribution: ``unit_interval`` draws each
    entry from U[0, 1), ``centered`` from U[-0.5, 0.5).
    """

    eps: float = 1e-8
    max_sweeps: int = 10000
    restarts: int = 64
    seed: int = 0
    init: str = "unit_interval"
    cluster_tol: float = 1e-2
    max_resamples: int = 10
    threads: int = 1

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError(f"eps must be positive, got {self.eps}")
        if self.max_sweeps < 1:
            raise DomainError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        if self.restarts < 1:
            raise DomainError(f"restarts must be >= 1, got {self.restarts}")
        if self.init not in INIT_MODES:
            raise DomainError(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if self.cluster_tol < 0:
            raise DomainError("cluster_tol must be non-negative")
        if self.max_resamples < 0 or self.threads < 1:
            raise DomainError("max_resamples must be >= 0 and threads >= 1")


@dataclass(frozen=True)
class FactorTerm:
    """One rank-one term ``coefficient * x_1 ⊗ ... ⊗ x_d``."""

    factors: tuple[np.ndarray, ...]
    coefficient: float = 1.0

    def __post_init__(self):
        object.__setattr__(
            self, "factors", tuple(np.asarray(f, dtype=np.float64).ravel() for f in self.factors)
        )

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)

    def vector(self) -> np.ndarray:
        out = kron_all(self.factors)
        return out if self.coefficient == 1.0 else self.coefficient * out


@dataclass(frozen=True)
class NkpSolution:
    term: FactorTerm
    error: float
    sweeps: int
    converged: bool
    history: list[float] = field(default_factory=list, repr=False)
    restart: int = 0
    resamples: int = 0

    @property
    def factors(self) -> tuple[np.ndarray, ...]:
        return self.term.factors


@dataclass(frozen=True)
class Cluster:
    error: float
    hits: int
    representative: NkpSolution = field(repr=False)
    spread: float = 0.0


@dataclass(frozen=True)
class StationaryHistogram:
    clusters: list[Cluster]
    restarts: int
    failed: int = 0

    def total_hits(self) -> int:
        return sum(c.hits for c in self.clusters)


def _contract_except(t: np.ndarray, x: Sequence[np.ndarray], s: int) -> np.ndarray:
    # trailing axes first so each product is a plain matrix-vector product
    for i in range(len(x) - 1, s, -1):
        t = t @ x[i]
    for i in range(s):
        t = np.tensordot(x[i], t, axes=(0, 0))
    return t


def _update(t: np.ndarray, x: Sequence[np.ndarray], s: int) -> np.ndarray:
    denom = 1.0
    for i, xi in enumerate(x):
        if i != s:
            sq = float(xi @ xi)
            if sq == 0.0 or not math.isfinite(sq):
                raise DegenerateFactor(f"factor {i + 1} has norm {math.sqrt(sq)}")
            denom *= sq
    if denom == 0.0 or not math.isfinite(denom):
        raise DegenerateFactor("product of fixed factor norms under- or overflowed")
    return _contract_except(t, x, s) / denom


def als_update(v, shape: Sequence[int], factors: Sequence, s: int) -> np.ndarray:
    """Least-squares optimal factor ``s`` (1-based) with the other factors fixed."""
    shape = as_shape(shape)
    v = np.asarray(v, dtype=np.float64).ravel()
    x = [np.asarray(f, dtype=np.float64).ravel() for f in factors]
    if v.size != math.prod(shape):
        raise DomainError(f"vector of length {v.size} does not match shape {shape}")
    if [f.size for f in x] != list(shape):
        raise DomainError(f"factor lengths {[f.size for f in x]} do not match shape {shape}")
    if not 1 <= s <= len(shape):
        raise DomainError(f"axis {s} outside 1..{len(shape)}")
    return _update(v.reshape(shape), x, s - 1)


def _canonical(xs: np.ndarray) -> tuple[np.ndarray, float]:
    nrm = float(np.linalg.norm(xs))
    if nrm == 0.0:
        raise DegenerateFactor("updated factor is zero")
    nz = np.flatnonzero(xs)
    scale = nrm if xs[nz[0]] > 0 else -nrm
    return xs / scale, scale


def gauge_normalize(factors: Sequence) -> list[np.ndarray]:
    """Unit norm, positive head entry for every factor but the last, which absorbs the scale."""
    x = [np.asarray(f, dtype=np.float64).ravel().copy() for f in factors]
    for s in range(len(x) - 1):
        x[s], scale = _canonical(x[s])
        x[-1] = x[-1] * scale
    return x


def _initial(rng: np.random.Generator, shape, mode: str) -> list[np.ndarray]:
    offset = 0.5 if mode == "centered" else 0.0
    return [rng.random(n) - offset for n in shape]


def _run(t, v, shape, x, cfg: SvaConfig):
    d = len(shape)
    x = gauge_normalize(x)
    prev = kron_all(x)
    history = [float(np.linalg.norm(v - prev))]
    for sweep in range(1, cfg.max_sweeps + 1):
        for s in range(d):
            x[s] = _update(t, x, s)
            if s < d - 1:
                x[s], scale = _canonical(x[s])
                x[-1] = x[-1] * scale
        cur = kron_all(x)
        if not np.any(cur):
            raise DegenerateFactor("iterate collapsed to the zero product")
        history.append(float(np.linalg.norm(v - cur)))
        if float(np.linalg.norm(cur - prev)) < cfg.eps:
            return x, sweep, True, history
        prev = cur
    return x, cfg.max_sweeps, False, history


def nkp(
    v,
    shape: Sequence[int],
    cfg: SvaConfig | None = None,
    rng: np.random.Generator | int | None = None,
    init_factors: Sequence | None = None,
) -> NkpSolution:
    """One alternating-update run from a random (or given) start.

    A start that degenerates (some factor becomes exactly zero) is
    redrawn from ``rng``; after ``cfg.max_resamples`` redraws the run gives
    up with :class:`ZeroStationaryPoint`.
    """
    cfg = cfg or SvaConfig()
    shape = as_shape(shape)
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size != math.prod(shape):
        raise DomainError(f"vector of length {v.size} does not match shape {shape}")
    if not np.any(v):
        raise DomainError("cannot approximate the zero vector")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(cfg.seed if rng is None else rng)
    t = v.reshape(shape)
    for attempt in range(cfg.max_resamples + 1):
        if init_factors is not None and attempt == 0:
            x0 = [np.asarray(f, dtype=np.float64).ravel() for f in init_factors]
            if [f.size for f in x0] != list(shape):
                raise DomainError("initial factors do not match shape")
        else:
            x0 = _initial(rng, shape, cfg.init)
        try:
            x, sweeps, converged, history = _run(t, v, shape, x0, cfg)
        except DegenerateFactor:
            continue
        return NkpSolution(
            term=FactorTerm(tuple(x)),
            error=history[-1],
            sweeps=sweeps,
            converged=converged,
            history=history,
            resamples=attempt,
        )
    raise ZeroStationaryPoint(
        f"every start collapsed to a zero stationary point ({cfg.max_resamples} redraws)"
    )


def cluster_errors(solutions: Sequence[NkpSolution], tol: float) -> list[Cluster]:
    """Group solutions whose error lies within ``tol`` of the cluster's lowest error."""
    ordered = sorted(solutions, key=lambda sol: (sol.error, sol.restart))
    clusters: list[list[NkpSolution]] = []
    for sol in ordered:
        if clusters and sol.error - clusters[-1][0].error <= tol:
            clusters[-1].append(sol)
        else:
            clusters.append([sol])
    return [
        Cluster(
            error=members[0].error,
            hits=len(members),
            representative=members[0],
            spread=members[-1].error - members[0].error,
        )
        for members in clusters
    ]


def _restart(args):
    v, shape, cfg, seq, index = args
    try:
        sol = nkp(v, shape, cfg, np.random.Generator(np.random.PCG64(seq)))
    except ZeroStationaryPoint:
        return None
    return NkpSolution(
        term=sol.term,
        error=sol.error,
        sweeps=sol.sweeps,
        converged=sol.converged,
        history=sol.history,
        restart=index,
        resamples=sol.resamples,
    )


def nkp_multistart(
    v, shape: Sequence[int], cfg: SvaConfig | None = None
) -> tuple[NkpSolution, StationaryHistogram]:
    """Best of ``cfg.restarts`` independent runs plus the histogram of stationary errors.

    Restart ``i`` draws from child ``i`` of ``SeedSequence(cfg.seed)``, so
    changing the restart count never alters earlier restarts, and running
    them on several threads gives the same answer as running them in order.
    """
    cfg = cfg or SvaConfig()
    shape = as_shape(shape)
    v = np.asarray(v, dtype=np.float64).ravel()
    if not np.any(v):
        raise DomainError("cannot approximate the zero vector")
    seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    jobs = [(v, shape, cfg, seq, i) for i, seq in enumerate(seqs)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_restart, jobs))
    else:
        results = [_restart(job) for job in jobs]
    solutions = [r for r in results if r is not None]
    if not solutions:
        raise AllRestartsFailed(f"all {cfg.restarts} restarts hit a zero stationary point")
    best = min(solutions, key=lambda sol: (sol.error, sol.restart))
    hist = StationaryHistogram(
        clusters=cluster_errors(solutions, cfg.cluster_tol),
        restarts=cfg.restarts,
        failed=cfg.restarts - len(solutions),
    )
    return best, hist


class RankOne(NamedTuple):
    u: np.ndarray
    v: np.ndarray
    residual: float
    converged: bool


def rank_one_oracle(m, iters: int = 100000, tol: float = 1e-15, seed: int = 12345) -> RankOne:
    """Best rank-one approximation ``u vᵀ`` of ``m`` by power iteration on ``mᵀm``.

    ``u`` is a unit vector and ``v = mᵀu`` carries the singular value.  A
    start that is annihilated by ``mᵀm`` is redrawn.  If ``iters`` runs
    out the last iterate is returned with ``converged=False``.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or not np.any(m):
        raise DomainError("rank_one_oracle needs a nonzero matrix")
    gram = m.T @ m
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(m.shape[1])
    y /= np.linalg.norm(y)
    lam = 0.0
    converged = False
    for _ in range(iters):
        z = gram @ y
        nz = np.linalg.norm(z)
        if nz == 0.0:
            y = rng.standard_normal(m.shape[1])
            y /= np.linalg.norm(y)
            continue
        z /= nz
        lam_new = float(z @ gram @ z)
        if abs(lam_new - lam) <= tol * lam_new and np.linalg.norm(z - y) <= math.sqrt(tol):
            y = z
            converged = True
            break
        y, lam = z, lam_new
    mu = m @ y
    u = mu / np.linalg.norm(mu)
    vv = m.T @ u
    residual = float(np.linalg.norm(m - np.outer(u, vv)))
    return RankOne(u, vv, residual, converged)
