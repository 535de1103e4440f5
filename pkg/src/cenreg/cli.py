"""Command-line interface: fit, predict, simulate, bench.

Exit codes: 0 success, 1 pipeline rejection (message names the failing
stage), 2 file/parse/argument errors.  Column indices are 0-based on the
command line; Matrix Market files are 1-based on disk as usual.  The
CENREG_GRAM_WORKERS environment variable sets the worker count for the
deterministic blocked Gram product (default: all cores); results are
bitwise identical for any worker count.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .bench import run_benchmark, write_bench_csv, write_long_csv
from .datagen import SimulationSpec, simulate
from .errors import CenregError, ParseError, PipelineError
from .mmio import read_matrix_market, write_matrix_market
from .model_io import (
    model_from_fit,
    read_model,
    read_vector_csv,
    utc_timestamp,
    write_model,
    write_vector_csv,
)
from .solver import fit, predict


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cenreg",
        description=(
            "Centered/scaled weighted least squares on sparse design "
            "matrices, without materializing the dense centered matrix."
        ),
        epilog=(
            "Column indices on the command line (e.g. --intercept-col) are "
            "0-based; Matrix Market files on disk use 1-based indices. Set "
            "CENREG_GRAM_WORKERS to control Gram worker threads (default: "
            "all cores); results are identical for any worker count."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a model and write a model file")
    p_fit.add_argument("--matrix", required=True, help="design matrix (.mtx)")
    p_fit.add_argument("--response", required=True, help="response CSV, one value per line")
    p_fit.add_argument("--weights", help="optional weights CSV (default: all ones)")
    p_fit.add_argument("--center", action="store_true", help="remove weighted column means")
    p_fit.add_argument("--scale", action="store_true", help="scale columns to weighted variance 1")
    p_fit.add_argument(
        "--intercept-col", type=int, default=None, metavar="K",
        help="0-based column exempt from centering/scaling",
    )
    p_fit.add_argument(
        "--cov", choices=["none", "homoskedastic", "hc"], default="none",
        help="parameter covariance to compute (default: none)",
    )
    p_fit.add_argument("--out", required=True, help="output model file (JSON)")

    p_pred = sub.add_parser("predict", help="predict on a new matrix with a saved model")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--matrix", required=True)
    p_pred.add_argument("--out", required=True, help="predictions CSV")

    p_sim = sub.add_parser("simulate", help="write a synthetic sparse regression instance")
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--p", type=int, required=True)
    p_sim.add_argument("--density", type=float, required=True)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--intercept", action="store_true",
                       help="make column 0 all ones (excluded from density)")
    p_sim.add_argument("--noise-sd", type=float, default=1.0)
    p_sim.add_argument("--out-prefix", required=True)

    p_bench = sub.add_parser("bench", help="compare sparse vs dense solver over a grid")
    p_bench.add_argument("--n-list", default="100000",
                         help="comma-separated sample sizes (default: 100000)")
    p_bench.add_argument("--density-list", default="0.01,0.05,0.1,0.25",
                         help="comma-separated densities (default: 0.01,0.05,0.1,0.25)")
    p_bench.add_argument("--p", type=int, default=100)
    p_bench.add_argument("--seed", type=int, default=20240901)
    p_bench.add_argument("--repeats", type=int, default=3)
    p_bench.add_argument("--noise-sd", type=float, default=1.0)
    p_bench.add_argument("--rss", action="store_true",
                         help="also sample OS peak RSS (extra untimed runs)")
    p_bench.add_argument("--out", required=True, help="report CSV; a plot-ready "
                         "long-format CSV is written next to it as <out>.long.csv")
    return parser


def _cmd_fit(args) -> int:
    M = read_matrix_market(args.matrix)
    y = read_vector_csv(args.response)
    w = read_vector_csv(args.weights) if args.weights else None
    result = fit(
        M, y, w,
        center=args.center, scale=args.scale,
        intercept_col=args.intercept_col, covariance=args.cov,
    )
    provenance = {
        "matrix_file": args.matrix,
        "response_file": args.response,
        "weights_file": args.weights,
        "seed": None,  # populated by callers that fit simulated data
        "timestamp": utc_timestamp(),
    }
    write_model(args.out, model_from_fit(result, provenance))
    print(f"fit: n={M.n_rows} p={M.n_cols} nnz={M.nnz} rank={result.rank}")
    print(f"{'col':>5} {'beta_original':>24} {'beta_transformed':>24}")
    for j in range(M.n_cols):
        print(
            f"{j:>5} {result.beta_original[j]:>24.16g} "
            f"{result.beta_transformed[j]:>24.16g}"
        )
    print(f"residual variance: {result.k_hat_sq:.16g}")
    print(f"model written to {args.out}")
    return 0


def _cmd_predict(args) -> int:
    model = read_model(args.model)
    M = read_matrix_market(args.matrix)
    if M.n_cols != model.p:
        raise CenregError(
            f"model expects {model.p} columns but matrix has {M.n_cols}"
        )
    y_hat = predict(M, model.beta_original)
    write_vector_csv(args.out, y_hat, header="y_hat")
    print(f"wrote {y_hat.size} predictions to {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    try:
        spec = SimulationSpec(
            n=args.n, p=args.p, density=args.density, seed=args.seed,
            with_intercept=args.intercept, noise_sd=args.noise_sd,
        )
    except CenregError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2  # bad flag values are usage errors
    M, y, w, beta_true = simulate(spec)
    write_matrix_market(args.out_prefix + ".mtx", M)
    write_vector_csv(args.out_prefix + ".y.csv", y, header="y")
    write_vector_csv(args.out_prefix + ".w.csv", w, header="w")
    write_vector_csv(args.out_prefix + ".beta.csv", beta_true, header="beta_true")
    print(
        f"simulated n={M.n_rows} p={M.n_cols} nnz={M.nnz} "
        f"(density {M.density:.6g}) -> {args.out_prefix}.*"
    )
    return 0


def _cmd_bench(args) -> int:
    try:
        n_list = [int(s) for s in args.n_list.split(",") if s.strip()]
        density_list = [float(s) for s in args.density_list.split(",") if s.strip()]
        if not n_list or not density_list:
            raise ValueError("empty grid")
        for n in n_list:
            if n < 1:
                raise ValueError(f"n must be >= 1, got {n}")
        for d in density_list:
            if not (0.0 < d <= 1.0):
                raise ValueError(f"density must be in (0, 1], got {d}")
        if args.repeats < 3:
            raise ValueError(f"repeats must be >= 3, got {args.repeats}")
    except ValueError as err:
        print(f"error: invalid grid flags: {err}", file=sys.stderr)
        return 2
    grid = [(n, d) for n in n_list for d in density_list]
    records = run_benchmark(
        grid, p=args.p, seed=args.seed, repeats=args.repeats,
        noise_sd=args.noise_sd, measure_rss=args.rss,
    )
    write_bench_csv(records, args.out)
    write_long_csv(records, args.out + ".long.csv")
    for r in records:
        if r.status == "ok":
            print(
                f"n={r.n} density={r.density}: efficient {r.time_efficient_ms:.1f} ms, "
                f"naive {r.time_naive_ms:.1f} ms, speedup {r.speedup:.2f}x, "
                f"mem ratio {r.mem_ratio:.1f}x"
            )
        else:
            print(f"n={r.n} density={r.density}: {r.status}")
    print(f"report written to {args.out} and {args.out}.long.csv")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "fit": _cmd_fit,
        "predict": _cmd_predict,
        "simulate": _cmd_simulate,
        "bench": _cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (PipelineError, CenregError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except MemoryError as err:
        print(f"error: out of memory: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
