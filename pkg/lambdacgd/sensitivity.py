#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: sensitivity
# Created on: 2026/10/19

import logging
import math
from typing import Tuple, List

import numpy as np

from .__exceptions import SchemaError, SensitivityError
from .__matrix import LttMatrix, AnyLowerTri, c_lambda_column_norms, check_lambda

logger = logging.getLogger(__name__)

BRUTEFORCE_BUDGET: int = 1_000_000


class ParticipationSchema:

    def __init__(self, n: int, k: int, b: int):
        """
        (k, b)-min-separation participation: up to k participations over n iterations, at least b steps apart
        :param n: number of iterations
        :type n: int
        :param k: maximum participations per data point, 1 <= k <= n
        :type k: int
        :param b: minimum separation between participations
        :type b: int
        """
        if n < 1:
            raise SchemaError("n must be positive, got {}".format(n))
        if not 1 <= k <= n:
            raise SchemaError("k must lie in [1, n={}], got {}".format(n, k))
        if b < 1:
            raise SchemaError("b must be positive, got {}".format(b))
        if (k - 1) * b + 1 > n:
            raise SchemaError("{} participations separated by {} do not fit into {} iterations".format(k, b, n))

        self.n = int(n)
        self.k = int(k)
        self.b = int(b)

    def __repr__(self):
        return "ParticipationSchema(n={}, k={}, b={})".format(self.n, self.k, self.b)

    def __eq__(self, other):
        return isinstance(other, ParticipationSchema) and (self.n, self.k, self.b) == (other.n, other.k, other.b)

    def __hash__(self):
        return hash((self.n, self.k, self.b))

    @property
    def leftmost_columns(self) -> List[int]:
        """
        0-based column indices of the leftmost b-separated k-pattern, 0, b, ..., (k-1)b
        """
        return [j * self.b for j in range(self.k)]

    def leftmost_pattern(self) -> "ParticipationPattern":
        return ParticipationPattern([j + 1 for j in self.leftmost_columns], self)

    def is_full_participation(self) -> bool:
        return self.b == 1 and self.k == self.n


class ParticipationPattern:

    def __init__(self, indices, schema: ParticipationSchema):
        """
        A participation pattern, strictly increasing 1-based column indices
        :param indices: indices in [1, n]
        :type indices: :obj:`list`, :obj:`tuple`
        :param schema: schema the pattern must satisfy
        :type schema: ParticipationSchema
        """
        indices = [int(i) for i in indices]
        if len(indices) > schema.k:
            raise SchemaError("pattern has {} entries, at most k={} allowed".format(len(indices), schema.k))
        for i in indices:
            if not 1 <= i <= schema.n:
                raise SchemaError("pattern index {} outside [1, {}]".format(i, schema.n))
        for prev, cur in zip(indices, indices[1:]):
            if cur - prev < schema.b:
                raise SchemaError("pattern gap {} -> {} is below the separation {}".format(prev, cur, schema.b))

        self.indices = tuple(indices)

    def __repr__(self):
        return "ParticipationPattern({})".format(list(self.indices))

    def __eq__(self, other):
        if isinstance(other, ParticipationPattern):
            return self.indices == other.indices
        return self.indices == tuple(other)


def _check_fits(m: AnyLowerTri, schema: ParticipationSchema):
    if m.n != schema.n:
        raise SchemaError("matrix order {} does not match schema n={}".format(m.n, schema.n))


def sens_leftmost(m: AnyLowerTri, schema: ParticipationSchema) -> float:
    """
    Norm of the sum of the leftmost b-separated k columns; equals the sensitivity whenever that pattern is optimal
    :param m: strategy matrix
    :type m: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    :param schema: participation schema
    :type schema: ParticipationSchema
    :return: ||sum_j m[:, jb]||_2
    :rtype: float
    """
    _check_fits(m, schema)
    acc = np.zeros(schema.n)
    for j in schema.leftmost_columns:
        acc += m.column(j)
    return float(np.linalg.norm(acc))


def sens_min_sep(c: LttMatrix, schema: ParticipationSchema) -> float:
    """
    Structural (k, b)-min-separation sensitivity of a Toeplitz strategy with non-negative non-increasing entries
    :param c: strategy matrix
    :type c: LttMatrix
    :param schema: participation schema
    :type schema: ParticipationSchema
    :return: sensitivity
    :rtype: float
    """
    if not isinstance(c, LttMatrix):
        raise SensitivityError("the structural formula applies to Toeplitz strategies only")
    if not c.is_monotone_non_negative():
        raise SensitivityError("strategy entries must be non-negative and non-increasing, use sens_bruteforce")
    _check_fits(c, schema)

    acc = np.zeros(schema.n)
    for start in schema.leftmost_columns:
        acc[start:] += c.first_col[:schema.n - start]
    return float(np.linalg.norm(acc))


def _one_minus_pow(lam: float, power: float) -> float:
    # 1 - lam^power without cancellation near lam -> 1
    if lam == 0.0:
        return 1.0 if power > 0 else 0.0
    return -math.expm1(power * math.log(lam))


def sens_c_lambda_block_form(k: int, b: int, lam: float) -> float:
    """
    Block-sum closed form of sens_{k,b}(C_lambda) for a horizon of exactly n = k b:
    sens^2 = (1 - lam^2b) / ((1 - lam^2)(1 - lam^b)^2) * sum_{j=1..k} (1 - lam^bj)^2
    :param k: participations
    :type k: int
    :param b: separation
    :type b: int
    :param lam: correlation parameter in [0, 1)
    :type lam: float
    :return: sensitivity for n = k b
    :rtype: float
    """
    lam = check_lambda(lam)
    if lam == 0.0:
        return math.sqrt(k)
    factor = _one_minus_pow(lam, 2 * b) / (_one_minus_pow(lam, 2) * _one_minus_pow(lam, b) ** 2)
    total = math.fsum(_one_minus_pow(lam, b * j) ** 2 for j in range(1, k + 1))
    return math.sqrt(factor * total)


def sens_c_lambda_closed(n: int, k: int, b: int, lam: float) -> float:
    """
    Closed-form sens_{k,b}(C_lambda) for any valid horizon: the block-sum form plus the boundary rows
    past the last block (n > k b) or minus the cut-off rows of a truncated last block (n < k b)
    :param n: iterations
    :type n: int
    :param k: participations
    :type k: int
    :param b: separation
    :type b: int
    :param lam: correlation parameter in [0, 1)
    :type lam: float
    :return: sensitivity, agrees with sens_min_sep(make_c_lambda(n, lam), schema)
    :rtype: float
    """
    ParticipationSchema(n, k, b)
    lam = check_lambda(lam)
    if lam == 0.0:
        return math.sqrt(k)

    squared = sens_c_lambda_block_form(k, b, lam) ** 2
    # squared row value of any row touched by all k columns, up to its geometric decay
    full = (_one_minus_pow(lam, k * b) / _one_minus_pow(lam, b)) ** 2
    one_minus_lam_sq = _one_minus_pow(lam, 2)
    if n > k * b:
        squared += full * lam ** (2 * b) * _one_minus_pow(lam, 2 * (n - k * b)) / one_minus_lam_sq
    elif n < k * b:
        kept = n - (k - 1) * b
        squared -= full * lam ** (2 * kept) * _one_minus_pow(lam, 2 * (b - kept)) / one_minus_lam_sq

    return math.sqrt(squared)


def sens_normalized(n: int, k: int, b: int, lam: float) -> float:
    """
    Sensitivity of the column-normalized strategy C_lambda D^-1, the leftmost pattern is optimal for it
    :param n: iterations
    :type n: int
    :param k: participations
    :type k: int
    :param b: separation
    :type b: int
    :param lam: correlation parameter in [0, 1)
    :type lam: float
    :return: sensitivity, 1 for k = 1
    :rtype: float
    """
    schema = ParticipationSchema(n, k, b)
    lam = check_lambda(lam)
    d = c_lambda_column_norms(n, lam).d
    powers = lam ** np.arange(n, dtype=np.float64)

    acc = np.zeros(n)
    for start in schema.leftmost_columns:
        acc[start:] += powers[:n - start] / d[start]
    return float(np.linalg.norm(acc))


def count_patterns(n: int, k: int, b: int) -> int:
    """
    Number of non-empty b-separated index sets of size at most k over n columns
    :param n: columns
    :type n: int
    :param k: maximum pattern size
    :type k: int
    :param b: separation
    :type b: int
    :return: pattern count
    :rtype: int
    """
    ending = [1] * n  # patterns of the current size ending at each column
    total = n
    for _ in range(1, k):
        prefix = [0] * (n + 1)
        for i, v in enumerate(ending):
            prefix[i + 1] = prefix[i] + v
        ending = [prefix[i - b + 1] if i - b + 1 > 0 else 0 for i in range(n)]
        added = sum(ending)
        if added == 0:
            break
        total += added
    return total


def bruteforce_argmax(c: AnyLowerTri, schema: ParticipationSchema,
                      budget: int = BRUTEFORCE_BUDGET) -> Tuple[float, ParticipationPattern]:
    """
    Exhaustive search over every b-separated pattern of size <= k, in lexicographic order
    :param c: entrywise non-negative strategy matrix
    :type c: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    :param schema: participation schema
    :type schema: ParticipationSchema
    :param budget: maximum number of patterns to enumerate
    :type budget: int
    :return: (sensitivity, first maximizing pattern)
    :rtype: (float, ParticipationPattern)
    """
    _check_fits(c, schema)
    if not c.is_non_negative():
        raise SensitivityError("brute-force sensitivity requires an entrywise non-negative matrix")

    count = count_patterns(schema.n, schema.k, schema.b)
    if count > budget:
        raise SensitivityError("enumeration of {} patterns exceeds the budget of {}".format(count, budget))
    logger.debug("enumerating %d patterns for %r", count, schema)

    dense = c.to_dense()
    gram = dense.T @ dense
    n, k, b = schema.n, schema.k, schema.b
    best = [-1.0, ()]
    pattern = []

    def visit(first: int, value: float, acc: np.ndarray):
        for j in range(first, n):
            extended = value + 2.0 * acc[j] + gram[j, j]
            pattern.append(j)
            if extended > best[0]:
                best[0] = extended
                best[1] = tuple(pattern)
            if len(pattern) < k and j + b < n:
                visit(j + b, extended, acc + gram[:, j])
            pattern.pop()

    visit(0, 0.0, np.zeros(n))

    return math.sqrt(max(best[0], 0.0)), ParticipationPattern([j + 1 for j in best[1]], schema)


def sens_bruteforce(c: AnyLowerTri, schema: ParticipationSchema, budget: int = BRUTEFORCE_BUDGET) -> float:
    """
    Sensitivity as the supremum over participation patterns of ||sum_{i in pattern} C[:, i]||_2
    :param c: entrywise non-negative strategy matrix
    :type c: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    :param schema: participation schema
    :type schema: ParticipationSchema
    :param budget: maximum number of patterns to enumerate
    :type budget: int
    :return: sensitivity
    :rtype: float
    """
    return bruteforce_argmax(c, schema, budget)[0]


def sensitivity(strategy: AnyLowerTri, schema: ParticipationSchema, leftmost_optimal: bool = False,
                budget: int = BRUTEFORCE_BUDGET) -> float:
    """
    Pick the cheapest exact sensitivity routine for a strategy
    :param strategy: strategy matrix
    :type strategy: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    :param schema: participation schema
    :type schema: ParticipationSchema
    :param leftmost_optimal: the caller guarantees the leftmost pattern attains the supremum
    :type leftmost_optimal: bool
    :param budget: enumeration budget for the brute-force fallback
    :type budget: int
    :return: sensitivity
    :rtype: float
    """
    if isinstance(strategy, LttMatrix) and strategy.is_monotone_non_negative():
        return sens_min_sep(strategy, schema)
    if leftmost_optimal:
        return sens_leftmost(strategy, schema)
    if not strategy.is_non_negative():
        raise SensitivityError("sensitivity of matrices with negative entries is not supported")
    if schema.is_full_participation():
        # non-negative Gram sums only grow with the pattern, so every column participates
        return float(np.linalg.norm(strategy.to_dense().sum(axis=1)))
    return sens_bruteforce(strategy, schema, budget)
