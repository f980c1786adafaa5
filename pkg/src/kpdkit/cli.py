"""Command-line front end: ``kpdkit {exact,nkp,sumkpd,matkpd} FILE [options]``.

Results go to stdout as ``key: value`` lines followed by bracketed blocks
holding factors in the hypermatrix text format, so one parser reads both
inputs and outputs.  Wall-clock time goes to stderr to keep stdout
reproducible byte for byte.
"""
from __future__ import annotations

import argparse
import io
import os
import shlex
import sys
import time
from typing import Sequence, TextIO

import numpy as np

from kpdkit import __version__
from kpdkit.errors import KpdError
from kpdkit.matform import MatKpdProblem, expand_by_splits, mat_sum_kpd, reconstruct_terms
from kpdkit.mda import DEFAULT_TOL, exact_decompose
from kpdkit.sumkpd import SumConfig, greedy_sum
from kpdkit.sva import StationaryHistogram, SvaConfig, nkp_multistart
from kpdkit.tensor_core import (
    Hypermatrix,
    dumps_hypermatrix,
    format_real,
    load_hypermatrix,
    load_matrix,
)

SEED_ENV = "KPDKIT_SEED"
_INIT_FLAGS = {"unit": "unit_interval", "centered": "centered"}

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(tok) for tok in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not dims or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"dims must be positive integers, got {text!r}")
    return dims


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpdkit", description="Exact and approximate Kronecker product decomposition."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sva = argparse.ArgumentParser(add_help=False)
    g = sva.add_argument_group("solver")
    g.add_argument("--eps", type=float, default=SvaConfig.eps,
                   help="stop a run when successive products differ by less than this")
    g.add_argument("--max-sweeps", type=_positive_int, default=SvaConfig.max_sweeps)
    g.add_argument("--restarts", type=_positive_int, default=SvaConfig.restarts)
    g.add_argument("--seed", type=int, default=None,
                   help=f"root RNG seed (falls back to ${SEED_ENV}, then 0)")
    g.add_argument("--init", choices=sorted(_INIT_FLAGS), default="unit",
                   help="start distribution: unit=U[0,1), centered=U[-0.5,0.5)")
    g.add_argument("--threads", type=_positive_int, default=1)
    g.add_argument("--cluster-tol", type=float, default=SvaConfig.cluster_tol)
    g.add_argument("--histogram", action="store_true", help="print stationary error clusters")

    summ = argparse.ArgumentParser(add_help=False)
    g = summ.add_argument_group("finite sum")
    g.add_argument("--eps-sum", type=float, default=SumConfig.eps_sum)
    g.add_argument("--max-terms", type=_positive_int, default=SumConfig.max_terms)

    p = sub.add_parser("exact", help="test exact rank-one decomposability")
    p.add_argument("input")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative residual tolerance")

    p = sub.add_parser("nkp", parents=[sva], help="nearest Kronecker product of vectors")
    p.add_argument("input")

    p = sub.add_parser("sumkpd", parents=[sva, summ], help="greedy finite-sum decomposition")
    p.add_argument("input")

    p = sub.add_parser("matkpd", parents=[sva, summ], help="matrix-form decomposition")
    p.add_argument("input")
    p.add_argument("--row-dims", type=_dims, required=True, help="e.g. 4,4")
    p.add_argument("--col-dims", type=_dims, required=True, help="e.g. 4,4")
    p.add_argument("--sum", action="store_true",
                   help="keep adding terms (default: a single nearest term)")
    p.add_argument("--expand-splits", action="store_true",
                   help="split every 2x2 factor into column-times-row pairs")
    return parser


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise KpdError(f"${SEED_ENV} is not an integer: {env!r}") from None
    return 0


def _sva_config(args) -> SvaConfig:
    return SvaConfig(
        eps=args.eps,
        max_sweeps=args.max_sweeps,
        restarts=args.restarts,
        seed=_seed(args),
        init=_INIT_FLAGS[args.init],
        cluster_tol=args.cluster_tol,
        threads=args.threads,
    )


def _sum_config(args, max_terms=None) -> SumConfig:
    return SumConfig(
        eps_sum=args.eps_sum,
        max_terms=max_terms or args.max_terms,
        inner=_sva_config(args),
    )


class Report:
    def __init__(self, out: TextIO):
        self.out = out

    def kv(self, key: str, value) -> None:
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, (float, np.floating)):
            value = format_real(value)
        elif isinstance(value, (tuple, list)):
            value = " ".join(str(v) for v in value)
        self.out.write(f"{key}: {value}\n")

    def block(self, title: str, body: str) -> None:
        self.out.write(f"[{title}]\n{body}")
        if not body.endswith("\n"):
            self.out.write("\n")

    def array(self, title: str, arr) -> None:
        self.block(title, dumps_hypermatrix(Hypermatrix.from_array(arr)))

    def sva_config(self, cfg: SvaConfig) -> None:
        self.kv("eps", cfg.eps)
        self.kv("max_sweeps", cfg.max_sweeps)
        self.kv("restarts", cfg.restarts)
        self.kv("seed", cfg.seed)
        self.kv("init", cfg.init)
        self.kv("cluster_tol", cfg.cluster_tol)
        self.kv("threads", cfg.threads)

    def sum_config(self, cfg: SumConfig) -> None:
        self.kv("eps_sum", cfg.eps_sum)
        self.kv("max_terms", cfg.max_terms)
        self.sva_config(cfg.inner)

    def histogram(self, hist: StationaryHistogram) -> None:
        lines = ["error hits spread"]
        lines += [
            f"{format_real(c.error)} {c.hits} {format_real(c.spread)}" for c in hist.clusters
        ]
        self.kv("failed_restarts", hist.failed)
        self.block("histogram", "\n".join(lines))

    def residual_table(self, norms: Sequence[float]) -> None:
        lines = ["step norm squared_norm"]
        lines += [f"{k} {format_real(r)} {format_real(r * r)}" for k, r in enumerate(norms, 1)]
        self.block("residuals", "\n".join(lines))


def cmd_exact(args, rep: Report) -> int:
    h = load_hypermatrix(args.input)
    res = exact_decompose(h, args.tol)
    rep.kv("shape", h.shape)
    rep.kv("tol", args.tol)
    rep.kv("verdict", "decomposable" if res.decomposable else "not decomposable")
    rep.kv("decomposable", res.decomposable)
    rep.kv("head_position", res.head_position)
    rep.kv("scale", res.factors.scale)
    rep.kv("residual", res.residual)
    for s, x in enumerate(res.factors.factors, 1):
        rep.array(f"factor {s}", x)
    return EXIT_OK if res.decomposable else EXIT_NEGATIVE


def cmd_nkp(args, rep: Report) -> int:
    h = load_hypermatrix(args.input)
    cfg = _sva_config(args)
    best, hist = nkp_multistart(h.values, h.shape, cfg)
    rep.kv("shape", h.shape)
    rep.sva_config(cfg)
    rep.kv("error", best.error)
    rep.kv("squared_error", best.error ** 2)
    rep.kv("sweeps", best.sweeps)
    rep.kv("converged", best.converged)
    rep.kv("best_restart", best.restart)
    for s, x in enumerate(best.factors, 1):
        rep.array(f"factor {s}", x)
    if args.histogram:
        rep.histogram(hist)
    return EXIT_OK


def cmd_sumkpd(args, rep: Report) -> int:
    h = load_hypermatrix(args.input)
    cfg = _sum_config(args)
    res = greedy_sum(h.values, h.shape, cfg)
    rep.kv("shape", h.shape)
    rep.sum_config(cfg)
    rep.kv("terms", len(res.terms))
    rep.kv("stalled", res.stalled)
    rep.kv("converged", res.converged)
    rep.kv("final_residual", res.residual_norms[-1] if res.residual_norms else res.initial_norm)
    rep.residual_table(res.residual_norms)
    for k, term in enumerate(res.terms, 1):
        for s, x in enumerate(term.factors, 1):
            rep.array(f"term {k} factor {s}", x)
    if args.histogram:
        for k, hist in enumerate(res.histograms, 1):
            rep.kv("histogram_term", k)
            rep.histogram(hist)
    return EXIT_NEGATIVE if res.stalled else EXIT_OK


def cmd_matkpd(args, rep: Report) -> int:
    a = load_matrix(args.input)
    problem = MatKpdProblem(a, args.row_dims, args.col_dims)
    cfg = _sum_config(args, max_terms=None if args.sum else 1)
    res = mat_sum_kpd(problem, cfg)
    rep.kv("matrix", a.shape)
    rep.kv("row_dims", problem.row_dims)
    rep.kv("col_dims", problem.col_dims)
    rep.kv("sum", args.sum)
    rep.sum_config(cfg)
    rep.kv("terms", len(res.terms))
    rep.kv("stalled", res.stalled)
    final = res.residual_norms[-1] if res.residual_norms else res.vector_result.initial_norm
    rep.kv("final_residual", final)
    rep.kv("final_squared_residual", final * final)
    rep.residual_table(res.residual_norms)
    for k, term in enumerate(res.terms, 1):
        for s, m in enumerate(term.matrices, 1):
            rep.array(f"term {k} factor {s}", m)
    if args.histogram:
        for k, hist in enumerate(res.vector_result.histograms, 1):
            rep.kv("histogram_term", k)
            rep.histogram(hist)
    if args.expand_splits:
        expanded = expand_by_splits(res.terms)
        err = float(np.linalg.norm(reconstruct_terms(expanded) - a))
        rep.kv("split_terms", len(expanded))
        rep.kv("split_reconstruction_error", err)
        for k, term in enumerate(expanded, 1):
            for s, m in enumerate(term.matrices, 1):
                rep.array(f"split {k} factor {s}", m)
    return EXIT_NEGATIVE if res.stalled else EXIT_OK


COMMANDS = {"exact": cmd_exact, "nkp": cmd_nkp, "sumkpd": cmd_sumkpd, "matkpd": cmd_matkpd}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    rep = Report(io.StringIO())
    start = time.perf_counter()
    try:
        rep.out.write(f"# kpdkit {__version__}\n")
        rep.kv("command", args.command)
        rep.kv("argv", shlex.join(["kpdkit", *argv]))
        rep.kv("input", args.input)
        code = COMMANDS[args.command](args, rep)
    except (KpdError, OSError) as exc:
        print(f"kpdkit: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out.write(rep.out.getvalue())
    print(f"elapsed_seconds: {time.perf_counter() - start:.3f}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
