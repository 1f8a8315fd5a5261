#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: sweeps
# Created on: 2026/10/19

"""
Sweep tables and their writers. Every CSV starts with a header row, JSON objects carry schema_version.
"""

import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, TextIO

from .metrics import (lambda_grid, maxse_lambda_closed, normalized_maxse, normalized_rmse, normalized_rmse_ratio,
                      rmse_lambda_closed, DEFAULT_GRID)
from .sensitivity import ParticipationSchema, sens_c_lambda_closed, sens_normalized

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "LAMBDACGD_OUTPUT_DIR"

SWEEP_HEADER = ["n", "k", "b", "lambda", "rmse", "maxse", "sens"]
RATIO_HEADER = ["n", "k", "b", "lambda", "ratio"]


def resolve_output(path: Optional[str]) -> Optional[str]:
    """
    resolve a relative output path against $LAMBDACGD_OUTPUT_DIR (current directory when unset)
    :param path: output path, None or "-" for stdout
    :type path: str
    :rtype: str
    """
    if path is None or path == "-":
        return None
    if os.path.isabs(path):
        return path
    return os.path.join(os.environ.get(OUTPUT_DIR_ENV, os.curdir), path)


def _open(path: Optional[str]) -> TextIO:
    resolved = resolve_output(path)
    if resolved is None:
        return sys.stdout
    folder = os.path.dirname(resolved)
    if folder:
        os.makedirs(folder, exist_ok=True)
    return open(resolved, "w", encoding="utf-8", newline="")


def write_csv(header: Sequence[str], rows: Iterable[Sequence], path: Optional[str] = None):
    """
    write a header row and data rows
    :param header: column names
    :type header: list
    :param rows: data rows
    :type rows: Iterable
    :param path: output file, stdout when None
    :type path: str
    """
    f = _open(path)
    try:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    finally:
        if f is not sys.stdout:
            f.close()


def write_json(payload: dict, path: Optional[str] = None):
    """
    write one JSON object, stamped with schema_version
    :param payload: result object
    :type payload: dict
    :param path: output file, stdout when None
    :type path: str
    """
    data = {"schema_version": SCHEMA_VERSION}
    data.update(payload)
    f = _open(path)
    try:
        f.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
    finally:
        if f is not sys.stdout:
            f.close()


def rows_as_records(header: Sequence[str], rows: Iterable[Sequence]) -> List[dict]:
    return [dict(zip(header, row)) for row in rows]


def _cell(value):
    if isinstance(value, float):
        return repr(float(value))
    return value


def parallel_map(func: Callable, items: Sequence, workers: int = 1, key: Callable = None) -> list:
    """
    map func over items on a thread pool; the result order follows key (input order by default),
    never the completion order
    :param func: work function
    :type func: Callable
    :param items: work items
    :type items: Sequence
    :param workers: pool size, 1 runs inline
    :type workers: int
    :param key: sort key applied to (item, result) pairs
    :type key: Callable
    :return: results
    :rtype: list
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        results = [func(item) for item in items]
    else:
        logger.info("fanning %d items out to %d workers", len(items), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(func, items))

    if key is None:
        return results
    pairs = sorted(zip(items, results), key=lambda pair: key(*pair))
    return [result for _, result in pairs]


def sweep_rows(schema: ParticipationSchema, lambdas: Iterable[float], normalized: bool = False) -> List[list]:
    """
    one row (n, k, b, lambda, rmse, maxse, sens) per lambda, ascending in lambda
    :param schema: participation schema
    :type schema: ParticipationSchema
    :param lambdas: lambda values in [0, 1)
    :type lambdas: Iterable[float]
    :param normalized: use the column-normalized DP-lambdaCGD
    :type normalized: bool
    :rtype: list
    """
    n, k, b = schema.n, schema.k, schema.b
    rows = []
    for lam in sorted(set(float(x) for x in lambdas)):
        if normalized:
            rmse, maxse, sens = normalized_rmse(n, k, b, lam), normalized_maxse(n, k, b, lam), \
                                sens_normalized(n, k, b, lam)
        else:
            rmse, maxse, sens = rmse_lambda_closed(n, k, b, lam), maxse_lambda_closed(n, k, b, lam), \
                                sens_c_lambda_closed(n, k, b, lam)
        rows.append([n, k, b, lam, rmse, maxse, sens])
    return rows


def sweep_lambda_rows(schema: ParticipationSchema, grid: int = DEFAULT_GRID, extra_points: Iterable[float] = (),
                      normalized: bool = False) -> List[list]:
    return sweep_rows(schema, list(lambda_grid(grid)) + list(extra_points), normalized=normalized)


def rmse_table(schemas: Iterable[ParticipationSchema], lambdas: Iterable[float], normalized: bool = False,
               workers: int = 1) -> List[list]:
    """
    sweep rows for several schemas, ordered by (n, k, b, lambda)
    :rtype: list
    """
    lambdas = list(lambdas)
    schemas = sorted(set(schemas), key=lambda s: (s.n, s.k, s.b))
    tables = parallel_map(lambda s: sweep_rows(s, lambdas, normalized), schemas, workers)
    return [row for table in tables for row in table]


def ratio_grid(b: int, k_list: Iterable[int], lambdas: Iterable[float], n: Optional[int] = None,
               workers: int = 1) -> List[list]:
    """
    normalized-over-plain RMSE ratios for k epochs of b iterations each
    :param b: iterations per epoch (separation)
    :type b: int
    :param k_list: epoch counts
    :type k_list: Iterable[int]
    :param lambdas: lambda values in (0, 1)
    :type lambdas: Iterable[float]
    :param n: fixed horizon for every k, k * b when None
    :type n: int
    :param workers: pool size
    :type workers: int
    :return: rows (n, k, b, lambda, ratio)
    :rtype: list
    """
    lambdas = sorted(set(float(x) for x in lambdas))
    cells = [(k, lam) for k in sorted(set(k_list)) for lam in lambdas]

    def work(cell):
        k, lam = cell
        horizon = k * b if n is None else n
        return [horizon, k, b, lam, normalized_rmse_ratio(horizon, k, b, lam)]

    return parallel_map(work, cells, workers)
