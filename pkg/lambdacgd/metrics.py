#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: metrics
# Created on: 2026/10/19

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .__exceptions import MatrixError, LambdaCGDError
from .__matrix import (AnyLowerTri, LttMatrix, LowerTriMatrix, b_factor, c_lambda_column_norms, check_lambda,
                       frobenius_norm, identity_ltt, make_c_lambda, matmul, normalize_columns, prefix_sum_matrix,
                       row_max_norm)
from .sensitivity import ParticipationSchema, sens_c_lambda_closed, sens_normalized, sensitivity

logger = logging.getLogger(__name__)

DEFAULT_GRID: int = 512
# a refined point must beat the grid optimum by this relative margin, round-off gains are ignored
REFINE_RTOL: float = 1e-12


class Factorization:

    def __init__(self, strategy: AnyLowerTri, left: AnyLowerTri, label: str, leftmost_optimal: bool = False,
                 validate: bool = True):
        """
        A factorization A = B C of the prefix-sum matrix
        :param strategy: strategy matrix C
        :type strategy: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
        :param left: left factor B
        :type left: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
        :param label: short name, e.g. "dp-sgd", "lambda", "lambda-normalized", "diag-quarter"
        :type label: str
        :param leftmost_optimal: the leftmost b-separated pattern attains the sensitivity of C
        :type leftmost_optimal: bool
        :param validate: check B C == A entrywise to relative tolerance 1e-10
        :type validate: bool
        """
        if strategy.n != left.n:
            raise MatrixError("dimension mismatch: strategy {} vs left factor {}".format(strategy.n, left.n))
        self.strategy = strategy
        self.left = left
        self.label = label
        self.leftmost_optimal = leftmost_optimal

        if validate:
            self.validate()

    @property
    def n(self) -> int:
        return self.strategy.n

    def __repr__(self):
        return "Factorization(label={!r}, n={})".format(self.label, self.n)

    def validate(self, rtol: float = 1e-10):
        product = matmul(self.left, self.strategy).to_dense()
        target = prefix_sum_matrix(self.n).to_dense()
        if not np.allclose(product, target, rtol=rtol, atol=rtol):
            raise MatrixError("left @ strategy does not reproduce the prefix-sum matrix for {!r}".format(self.label))


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    maxse: float
    sens: float
    frob_over_sqrt_n: float
    rowmax: float

    def to_dict(self) -> dict:
        return {"rmse": self.rmse, "maxse": self.maxse, "sens": self.sens,
                "frob_over_sqrt_n": self.frob_over_sqrt_n, "rowmax": self.rowmax}


@dataclass(frozen=True)
class LambdaSearch:
    metric: str
    lambda_star: float
    value: float
    grid_lambda: float
    grid_value: float


@dataclass(frozen=True)
class FullBatchBounds:
    trivial: float
    diagonal: float
    lower: float

    def to_dict(self) -> dict:
        return {"trivial": self.trivial, "diagonal": self.diagonal, "lower": self.lower,
                "trivial_over_diagonal": self.trivial / self.diagonal,
                "diagonal_over_lower": self.diagonal / self.lower}


@dataclass(frozen=True)
class BoundCheck:
    optimized: float
    bound_constant: float
    lambda_star: float


def dp_sgd_factorization(n: int) -> Factorization:
    return Factorization(identity_ltt(n), prefix_sum_matrix(n), "dp-sgd")


def lambda_factorization(n: int, lam: float) -> Factorization:
    """
    DP-lambdaCGD factorization, C = C_lambda and B = A C_lambda^-1
    :param n: iterations
    :type n: int
    :param lam: correlation parameter in [0, 1)
    :type lam: float
    :return: factorization
    :rtype: Factorization
    """
    strategy = make_c_lambda(n, lam)
    return Factorization(strategy, b_factor(strategy), "lambda")


def normalized_lambda_factorization(n: int, lam: float) -> Factorization:
    strategy = normalize_columns(make_c_lambda(n, lam))
    return Factorization(strategy, b_factor(strategy), "lambda-normalized", leftmost_optimal=True)


def diagonal_strategy(n: int) -> Factorization:
    """
    Diagonal factorization C = diag((n - j + 1)^(1/4)), B = A C^-1
    :param n: iterations
    :type n: int
    :return: factorization
    :rtype: Factorization
    """
    if n < 1:
        raise MatrixError("matrix order must be positive, got {}".format(n))
    weights = np.arange(n, 0, -1, dtype=np.float64) ** 0.25
    strategy = LowerTriMatrix.diagonal(weights)
    return Factorization(strategy, b_factor(strategy), "diag-quarter")


def evaluate(f: Factorization, schema: ParticipationSchema) -> MetricReport:
    """
    RMSE and MaxSE of a factorization under a participation schema
    :param f: factorization A = B C
    :type f: Factorization
    :param schema: participation schema
    :type schema: ParticipationSchema
    :return: report with rmse = ||B||_F / sqrt(n) * sens and maxse = ||B||_{2->inf} * sens
    :rtype: MetricReport
    """
    sens = sensitivity(f.strategy, schema, leftmost_optimal=f.leftmost_optimal)
    frob = frobenius_norm(f.left) / math.sqrt(f.n)
    rowmax = row_max_norm(f.left)
    return MetricReport(rmse=frob * sens, maxse=rowmax * sens, sens=sens, frob_over_sqrt_n=frob, rowmax=rowmax)


def ones_vector_bound(f: Factorization) -> float:
    """
    (1 / sqrt(n)) ||B||_F ||C 1||_2, a lower bound on the full-batch RMSE of any factorization
    """
    ones_image = f.strategy.to_dense().sum(axis=1)
    return frobenius_norm(f.left) * float(np.linalg.norm(ones_image)) / math.sqrt(f.n)


def left_frobenius_sq_closed(n: int, lam: float) -> float:
    """
    ||B_lambda||_F^2 = (1 - lambda)^2 n (n - 1) / 2 + n
    """
    lam = check_lambda(lam)
    return (1.0 - lam) ** 2 * n * (n - 1) / 2.0 + n


def left_rowmax_sq_closed(n: int, lam: float) -> float:
    """
    ||A C_lambda^-1||_{2->inf}^2 = 1 + (1 - lambda)^2 (n - 1)
    """
    lam = check_lambda(lam)
    return 1.0 + (1.0 - lam) ** 2 * (n - 1)


def rmse_lambda_closed(n: int, k: int, b: int, lam: float) -> float:
    """
    Closed-form RMSE of DP-lambdaCGD
    :param n: iterations
    :type n: int
    :param k: participations
    :type k: int
    :param b: separation
    :type b: int
    :param lam: correlation parameter in [0, 1)
    :type lam: float
    :return: RMSE
    :rtype: float
    """
    return math.sqrt(left_frobenius_sq_closed(n, lam) / n) * sens_c_lambda_closed(n, k, b, lam)


def maxse_lambda_closed(n: int, k: int, b: int, lam: float) -> float:
    return math.sqrt(left_rowmax_sq_closed(n, lam)) * sens_c_lambda_closed(n, k, b, lam)


def normalized_left_frobenius_sq(n: int, lam: float) -> float:
    """
    ||A D C_lambda^-1||_F^2 = sum_j d_j^2 + sum_{j<n} (d_j - lambda d_{j+1})^2 (n - j)
    :param n: iterations
    :type n: int
    :param lam: correlation parameter in [0, 1)
    :type lam: float
    :return: squared Frobenius norm of the normalized left factor
    :rtype: float
    """
    d = c_lambda_column_norms(n, lam).d
    below = (d[:-1] - lam * d[1:]) ** 2 * np.arange(n - 1, 0, -1, dtype=np.float64)
    return float(np.sum(d ** 2) + np.sum(below))


def normalized_left_rowmax_sq(n: int, lam: float) -> float:
    """
    max_i of sum_{j<i} (d_j - lambda d_{j+1})^2 + d_i^2, the squared 2->inf norm of A D C_lambda^-1
    """
    d = c_lambda_column_norms(n, lam).d
    below = np.concatenate(([0.0], np.cumsum((d[:-1] - lam * d[1:]) ** 2)))
    return float(np.max(below + d ** 2))


def normalized_rmse(n: int, k: int, b: int, lam: float) -> float:
    return math.sqrt(normalized_left_frobenius_sq(n, lam) / n) * sens_normalized(n, k, b, lam)


def normalized_maxse(n: int, k: int, b: int, lam: float) -> float:
    return math.sqrt(normalized_left_rowmax_sq(n, lam)) * sens_normalized(n, k, b, lam)


def normalized_rmse_ratio(n: int, k: int, b: int, lam: float) -> float:
    """
    RMSE of the column-normalized DP-lambdaCGD divided by the RMSE of plain DP-lambdaCGD
    :param n: iterations
    :type n: int
    :param k: participations
    :type k: int
    :param b: separation
    :type b: int
    :param lam: correlation parameter in (0, 1)
    :type lam: float
    :return: ratio, below 1 under single participation
    :rtype: float
    """
    return normalized_rmse(n, k, b, lam) / rmse_lambda_closed(n, k, b, lam)


def lambda_grid(resolution: int = DEFAULT_GRID) -> np.ndarray:
    """
    Uniform grid {0, 1/(m-1), ...} restricted to [0, 1 - 1/m]
    :param resolution: number of points m before restriction, at least 2
    :type resolution: int
    :return: grid
    :rtype: numpy.ndarray
    """
    if resolution < 2:
        raise LambdaCGDError("grid resolution must be at least 2, got {}".format(resolution))
    grid = np.arange(resolution, dtype=np.float64) / (resolution - 1)
    return grid[grid <= 1.0 - 1.0 / resolution]


def _interpolated_sigma(table: Sequence[Tuple[float, float]]) -> Callable[[float], float]:
    pairs = sorted(table)
    xs = np.array([p[0] for p in pairs])
    ys = np.array([p[1] for p in pairs])
    return lambda lam: float(np.interp(lam, xs, ys))


def lambda_objective(metric: Union[str, Callable[[float], float]], schema: ParticipationSchema,
                     sigma_table: Optional[Sequence[Tuple[float, float]]] = None) -> Callable[[float], float]:
    """
    Objective lambda -> error for a metric name
    :param metric: "rmse", "maxse", "rmse-normalized", "amplified-rmse" or a callable
    :type metric: :obj:`str`, :obj:`Callable`
    :param schema: participation schema
    :type schema: ParticipationSchema
    :param sigma_table: (lambda, sigma) pairs from an external accountant, required by "amplified-rmse"
    :type sigma_table: list, optional
    :return: objective
    :rtype: Callable
    """
    n, k, b = schema.n, schema.k, schema.b
    if callable(metric):
        return metric
    if metric == "rmse":
        return lambda lam: rmse_lambda_closed(n, k, b, lam)
    if metric == "maxse":
        return lambda lam: maxse_lambda_closed(n, k, b, lam)
    if metric == "rmse-normalized":
        return lambda lam: normalized_rmse(n, k, b, lam)
    if metric == "amplified-rmse":
        if not sigma_table:
            raise LambdaCGDError("amplified-rmse needs a sigma table from an external accountant")
        sigma_of = _interpolated_sigma(sigma_table)
        return lambda lam: math.sqrt(left_frobenius_sq_closed(n, lam) / n) * sigma_of(lam)
    raise LambdaCGDError("unknown metric {!r}".format(metric))


def grid_values(objective: Callable[[float], float], grid: Iterable[float]) -> np.ndarray:
    return np.array([objective(float(lam)) for lam in grid])


def optimize_lambda(metric: Union[str, Callable[[float], float]], schema: ParticipationSchema,
                    grid: int = DEFAULT_GRID, extra_points: Iterable[float] = (),
                    sigma_table: Optional[Sequence[Tuple[float, float]]] = None, refine: bool = True) -> LambdaSearch:
    """
    Minimize an error metric over lambda: uniform grid first, then a bounded golden-section/Brent
    refinement inside the winning cell
    :param metric: "rmse", "maxse", "rmse-normalized", "amplified-rmse" or a callable
    :type metric: :obj:`str`, :obj:`Callable`
    :param schema: participation schema
    :type schema: ParticipationSchema
    :param grid: grid resolution m
    :type grid: int
    :param extra_points: additional lambda values always evaluated with the grid
    :type extra_points: Iterable[float]
    :param sigma_table: (lambda, sigma) pairs for "amplified-rmse"
    :type sigma_table: list, optional
    :param refine: run the in-cell refinement
    :type refine: bool
    :return: grid and refined optimum, ties break toward the smaller lambda
    :rtype: LambdaSearch
    """
    objective = lambda_objective(metric, schema, sigma_table)
    points = np.union1d(lambda_grid(grid), np.array([check_lambda(x) for x in extra_points], dtype=np.float64))
    values = grid_values(objective, points)

    # np.argmin returns the first minimum, i.e. the smallest lambda on ties
    best = int(np.argmin(values))
    grid_lambda, grid_value = float(points[best]), float(values[best])
    lambda_star, value = grid_lambda, grid_value

    if refine and points.size > 1:
        lo = float(points[max(best - 1, 0)])
        hi = float(points[min(best + 1, points.size - 1)])
        if hi > lo:
            res = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
            if res.success and float(res.fun) < grid_value * (1.0 - REFINE_RTOL):
                lambda_star, value = float(res.x), float(res.fun)

    logger.debug("optimize_lambda(%s, %r): grid %.6f -> %.6f", metric, schema, grid_lambda, lambda_star)
    name = metric if isinstance(metric, str) else getattr(metric, "__name__", "custom")
    return LambdaSearch(metric=name, lambda_star=lambda_star, value=value, grid_lambda=grid_lambda,
                        grid_value=grid_value)


def full_batch_bounds(n: int) -> FullBatchBounds:
    """
    Full-batch (b = 1, k = n) RMSE of the trivial and the quarter-power diagonal factorizations,
    and the lower bound valid for every factorization
    :param n: iterations
    :type n: int
    :return: bounds with lower <= diagonal <= trivial
    :rtype: FullBatchBounds
    """
    if n < 1:
        raise MatrixError("n must be positive, got {}".format(n))
    trivial = math.sqrt(n * (n + 1) / 2.0)
    diagonal = math.fsum(math.sqrt(j) for j in range(1, n + 1)) / math.sqrt(n)
    lower = math.sqrt((n + 1) * (2 * n + 1) / 6.0)
    return FullBatchBounds(trivial=trivial, diagonal=diagonal, lower=lower)


def proof_guided_points(schema: ParticipationSchema) -> Tuple[float, float]:
    """
    lambda = exp(-1/b) for the k >= sqrt(n) regime and lambda = exp(-1/sqrt(n)) for k < sqrt(n)
    """
    return math.exp(-1.0 / schema.b), math.exp(-1.0 / math.sqrt(schema.n))


def maxse_bound_check(schema: ParticipationSchema, grid: int = DEFAULT_GRID) -> BoundCheck:
    """
    Minimized MaxSE over lambda and its ratio to k + sqrt(k) n^(1/4)
    :param schema: participation schema
    :type schema: ParticipationSchema
    :param grid: grid resolution
    :type grid: int
    :return: optimized MaxSE, optimized / (k + sqrt(k) n^(1/4)), minimizing lambda
    :rtype: BoundCheck
    """
    search = optimize_lambda("maxse", schema, grid=grid, extra_points=proof_guided_points(schema))
    scale = schema.k + math.sqrt(schema.k) * schema.n ** 0.25
    return BoundCheck(optimized=search.value, bound_constant=search.value / scale, lambda_star=search.lambda_star)
