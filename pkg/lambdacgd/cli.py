#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: cli
# Created on: 2026/10/19

"""
lambdacgd command line. Exit codes: 0 success, 1 domain error, 2 usage error.
Results go to stdout (or --output), logs and notices go to stderr.
"""

import argparse
import json
import logging
import math
import sys
import warnings
from typing import List, Optional

from .__exceptions import LambdaCGDError, StreamError
from .__matrix import make_c_lambda, normalize_columns
from .metrics import full_batch_bounds, normalized_maxse, optimize_lambda, DEFAULT_GRID
from .noise import (BENCH_HEADER, NoiseStreamConfig, bench_config, bench_stream, check_test_vectors,
                    emit_test_vectors, load_test_vectors)
from .sensitivity import (BRUTEFORCE_BUDGET, ParticipationSchema, count_patterns, sens_bruteforce,
                          sens_c_lambda_closed, sens_leftmost, sens_min_sep, sens_normalized)
from .sweeps import (RATIO_HEADER, SWEEP_HEADER, parallel_map, ratio_grid, resolve_output, rmse_table,
                     rows_as_records, sweep_lambda_rows, write_csv, write_json)
from .trainer import TrainConfig, noise_multiplier, train

logger = logging.getLogger(__name__)

BRUTEFORCE_MAX_N = 24
AGREEMENT_RTOL = 1e-10
DEFAULT_RATIO_LAMBDAS = [round(0.05 * i, 2) for i in range(1, 20)]


def _agree(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=AGREEMENT_RTOL, abs_tol=AGREEMENT_RTOL)


def cmd_sens(args) -> int:
    schema = ParticipationSchema(args.n, args.k, args.b)
    strategy = make_c_lambda(args.n, args.lam)
    if args.normalized:
        strategy = normalize_columns(strategy)
        structural = sens_leftmost(strategy, schema)
        closed = sens_normalized(args.n, args.k, args.b, args.lam)
    else:
        structural = sens_min_sep(strategy, schema)
        closed = sens_c_lambda_closed(args.n, args.k, args.b, args.lam)

    brute = None
    if args.n <= BRUTEFORCE_MAX_N and count_patterns(args.n, args.k, args.b) <= BRUTEFORCE_BUDGET:
        brute = sens_bruteforce(strategy, schema)
    else:
        logger.info("brute force skipped for %r", schema)

    values = [v for v in (structural, closed, brute) if v is not None]
    agree = all(_agree(values[0], v) for v in values[1:])
    if not agree and args.warnings_enabled:
        warnings.warn("sensitivity routines disagree: structural={}, closed={}, bruteforce={}".format(
            structural, closed, brute))

    write_json({
        "n": args.n, "k": args.k, "b": args.b, "lambda": args.lam, "normalized": args.normalized,
        "structural": structural, "closed_form": closed, "bruteforce": brute, "agree": agree,
    }, args.output)
    return 0


def cmd_bounds(args) -> int:
    payload = {"n": args.n}
    payload.update(full_batch_bounds(args.n).to_dict())
    write_json(payload, args.output)
    return 0


def _emit_table(args, header: List[str], rows: List[list], extra: dict = None):
    if args.format == "json":
        payload = dict(extra or {})
        payload["rows"] = rows_as_records(header, rows)
        write_json(payload, args.output)
    else:
        write_csv(header, rows, args.output)


def cmd_sweep_lambda(args) -> int:
    schema = ParticipationSchema(args.n, args.k, args.b)
    if args.normalized:
        metric = "rmse-normalized" if args.metric == "rmse" else \
            (lambda lam: normalized_maxse(schema.n, schema.k, schema.b, lam))
    else:
        metric = args.metric
    search = optimize_lambda(metric, schema, grid=args.grid, extra_points=args.extra_points, refine=not args.no_refine)
    rows = sweep_lambda_rows(schema, grid=args.grid, extra_points=args.extra_points, normalized=args.normalized)
    summary = {"metric": args.metric, "normalized": args.normalized, "lambda_star": search.lambda_star,
               "value": search.value, "grid_lambda_star": search.grid_lambda, "grid_value": search.grid_value}

    if args.format == "json":
        _emit_table(args, SWEEP_HEADER, rows, summary)
        return 0

    write_csv(SWEEP_HEADER, rows, args.output)
    # lambda* shares stdout only when the table went to a file
    target = sys.stdout if resolve_output(args.output) is not None else sys.stderr
    print(json.dumps(summary, sort_keys=True), file=target)
    return 0


def cmd_rmse_table(args) -> int:
    schemas = []
    for n in args.n_list:
        for k in args.k_list:
            if k > n:
                logger.info("skipping k=%d > n=%d", k, n)
                continue
            schemas.append(ParticipationSchema(n, k, n // k))
    rows = rmse_table(schemas, args.lambdas, normalized=args.normalized, workers=args.workers)
    _emit_table(args, SWEEP_HEADER, rows)
    return 0


def cmd_ratio_normalized(args) -> int:
    rows = ratio_grid(args.b, args.k_list, args.lambdas, n=args.n, workers=args.workers)
    _emit_table(args, RATIO_HEADER, rows)
    return 0


def cmd_bench_noise(args) -> int:
    configs = [bench_config(args.mode, args.d, p=args.p, seed=args.seed + w, lam=args.lam)
               for w in range(max(args.workers, 1))]
    results = parallel_map(lambda c: bench_stream(c, args.steps), configs, args.workers)
    _emit_table(args, BENCH_HEADER, [r.to_row() for r in results])
    return 0


def cmd_train(args) -> int:
    config = TrainConfig.from_json(args.config) if args.config else TrainConfig()
    config = config.with_overrides(lam=args.lam, seed=args.seed, epsilon=args.epsilon, delta=args.delta,
                                   warnings_enabled=None if args.warnings_enabled else False)
    theta, trace = train(config)
    if args.trace:
        trace.to_jsonl(resolve_output(args.trace))

    write_json({
        "config": config.to_dict(),
        "sigma_multiplier": noise_multiplier(config),
        "noise_scale": trace.noise_config.scale,
        "iterations": config.iterations,
        "final_loss": trace.final_loss,
        "final_theta": theta.tolist(),
    }, args.output)
    return 0


def default_test_vector_configs() -> List[tuple]:
    return [
        (NoiseStreamConfig.lambda_cancel(0.7, 3, scale=1.0, seed=20261019), 8),
        (NoiseStreamConfig.banded_inverse((1.0, -0.5, 0.1, -0.02), 2, scale=1.0, seed=7), 8),
        (NoiseStreamConfig.independent(4, scale=2.0, seed=1), 4),
    ]


def cmd_test_vectors(args) -> int:
    if args.emit:
        payloads = [emit_test_vectors(config, steps) for config, steps in default_test_vector_configs()]
        path = resolve_output(args.emit)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payloads, f, indent=1)
        logger.info("%d test vectors written to %s", len(payloads), path)
        return 0

    payloads = load_test_vectors(args.check)
    failed = [i for i, payload in enumerate(payloads) if not check_test_vectors(payload)]
    if failed:
        raise StreamError("test vectors {} do not replay bit-exactly".format(failed))
    print(json.dumps({"checked": len(payloads), "passed": True}))
    return 0


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lambdacgd", description="DP-lambdaCGD correlated-noise toolkit")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logs")
    parser.add_argument("--no-warnings", dest="warnings_enabled", action="store_false",
                        help="silence recoverable-condition warnings")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--output", "-o", default=None, help="output file, relative to $LAMBDACGD_OUTPUT_DIR")
        p.set_defaults(func=func)
        return p

    def add_format(p):
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = add("sens", cmd_sens, "sensitivity of C_lambda under (k, b)-min-separation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--normalized", action="store_true")

    p = add("bounds", cmd_bounds, "full-batch RMSE bounds and their ratios")
    p.add_argument("--n", type=int, required=True)

    p = add("sweep-lambda", cmd_sweep_lambda, "error metric over a lambda grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--metric", choices=("rmse", "maxse"), default="rmse")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--extra-points", type=_float_list, default=[])
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--no-refine", action="store_true")
    add_format(p)

    p = add("rmse-table", cmd_rmse_table, "closed-form RMSE/MaxSE for several (n, k) with b = n // k")
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--k-list", type=_int_list, required=True)
    p.add_argument("--lambdas", type=_float_list, default=[0.0, 0.5, 0.9, 0.99])
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    add_format(p)

    p = add("ratio-normalized", cmd_ratio_normalized, "RMSE ratio of column-normalized to plain DP-lambdaCGD")
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--k-list", type=_int_list, required=True)
    p.add_argument("--n", type=int, default=None, help="fixed horizon, k * b when omitted")
    p.add_argument("--lambdas", type=_float_list, default=DEFAULT_RATIO_LAMBDAS)
    p.add_argument("--workers", type=int, default=1)
    add_format(p)

    p = add("bench-noise", cmd_bench_noise, "time a noise stream and count block generations")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--mode", choices=("independent", "lambda_cancel", "banded_inverse"), default="lambda_cancel")
    p.add_argument("--p", type=int, default=2, help="bandwidth of banded_inverse")
    p.add_argument("--lambda", dest="lam", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="one stream per worker, seeds seed, seed + 1, ...")
    add_format(p)

    p = add("train", cmd_train, "run DP-lambdaCGD on a synthetic task")
    p.add_argument("--config", default=None, help="JSON file with TrainConfig fields")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--trace", default=None, help="JSON-lines trace output")

    p = add("test-vectors", cmd_test_vectors, "emit or check noise-stream test vectors")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--emit", metavar="PATH")
    group.add_argument("--check", metavar="PATH")

    return parser


def _setup_logging(verbosity: int):
    if verbosity <= 0:
        return
    level = logging.DEBUG if verbosity > 1 else logging.INFO
    logging.basicConfig(stream=sys.stderr, level=level, format="%(asctime)s [%(levelname)s] %(name)s: %(message)s")


def run(argv: Optional[List[str]] = None) -> int:
    """
    parse argv and execute one subcommand
    :param argv: arguments without the program name, sys.argv[1:] when None
    :type argv: list
    :return: exit code
    :rtype: int
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else 2

    _setup_logging(args.verbose)
    try:
        return args.func(args)
    except LambdaCGDError as err:
        print("lambdacgd {}: {}".format(args.command, err), file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
