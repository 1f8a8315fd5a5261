#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: __matrix
# Created on: 2026/10/19

import logging
from typing import Union

import numpy as np
from scipy.linalg import solve_triangular

from .__exceptions import MatrixError

logger = logging.getLogger(__name__)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


class LttMatrix:

    def __init__(self, first_col, n: int = None):
        """
        Lower-triangular Toeplitz matrix stored by its first column, entry (i, j) = c_{i-j} for i >= j
        :param first_col: entries c_0..c_{n-1}
        :type first_col: :obj:`list`, :obj:`numpy.ndarray`
        :param n: matrix order, defaults to len(first_col)
        :type n: int, optional
        """
        col = np.asarray(first_col, dtype=np.float64).ravel()
        if n is None:
            n = col.size
        if n < 1:
            raise MatrixError("matrix order must be positive, got {}".format(n))
        if col.size != n:
            raise MatrixError("first_col has length {} but the matrix order is {}".format(col.size, n))
        if not np.all(np.isfinite(col)):
            raise MatrixError("matrix entries must be finite")

        self.n = int(n)
        self.first_col = _frozen(col)

    def __repr__(self):
        return "LttMatrix(n={}, first_col={})".format(self.n, np.array2string(self.first_col[:6]))

    def entry(self, i: int, j: int) -> float:
        """
        Read entry (i, j), 0-based
        :param i: row index
        :type i: int
        :param j: column index
        :type j: int
        :return: matrix entry
        :rtype: float
        """
        if i < j:
            return 0.0
        return float(self.first_col[i - j])

    def column(self, j: int) -> np.ndarray:
        ret = np.zeros(self.n)
        ret[j:] = self.first_col[:self.n - j]
        return ret

    def to_dense(self) -> np.ndarray:
        lag = np.subtract.outer(np.arange(self.n), np.arange(self.n))
        return np.where(lag >= 0, self.first_col[np.clip(lag, 0, None)], 0.0)

    def is_monotone_non_negative(self) -> bool:
        """
        Check c_0 >= c_1 >= ... >= c_{n-1} >= 0, the hypothesis of the structural sensitivity formula
        :return: whether entries are non-negative and non-increasing
        :rtype: bool
        """
        col = self.first_col
        return bool(np.all(col >= 0.0) and np.all(np.diff(col) <= 0.0))

    def is_non_negative(self) -> bool:
        return bool(np.all(self.first_col >= 0.0))

    def to_dict(self) -> dict:
        return {"n": self.n, "first_col": self.first_col.tolist()}


class LowerTriMatrix:

    def __init__(self, n: int, entries):
        """
        Dense lower-triangular matrix in packed row-major storage of n(n+1)/2 reals
        :param n: matrix order
        :type n: int
        :param entries: packed rows, row i occupies entries[i(i+1)/2 : i(i+1)/2 + i + 1]
        :type entries: :obj:`list`, :obj:`numpy.ndarray`
        """
        packed = np.asarray(entries, dtype=np.float64).ravel()
        if n < 1:
            raise MatrixError("matrix order must be positive, got {}".format(n))
        if packed.size != n * (n + 1) // 2:
            raise MatrixError("packed storage of order {} needs {} entries, got {}".format(
                n, n * (n + 1) // 2, packed.size))
        if not np.all(np.isfinite(packed)):
            raise MatrixError("matrix entries must be finite")

        self.n = int(n)
        self.entries = _frozen(packed)

    def __repr__(self):
        return "LowerTriMatrix(n={})".format(self.n)

    @classmethod
    def from_dense(cls, dense) -> "LowerTriMatrix":
        """
        Pack the lower triangle of a square matrix, the strictly upper part is dropped
        :param dense: square array
        :type dense: numpy.ndarray
        :return: packed matrix
        :rtype: LowerTriMatrix
        """
        dense = np.asarray(dense, dtype=np.float64)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise MatrixError("expected a square matrix, got shape {}".format(dense.shape))
        n = dense.shape[0]
        return cls(n, dense[np.tril_indices(n)])

    @classmethod
    def from_rows(cls, rows) -> "LowerTriMatrix":
        n = len(rows)
        packed = []
        for i, row in enumerate(rows):
            if len(row) != i + 1:
                raise MatrixError("row {} must hold {} entries, got {}".format(i, i + 1, len(row)))
            packed.extend(row)
        return cls(n, packed)

    @classmethod
    def diagonal(cls, values) -> "LowerTriMatrix":
        values = np.asarray(values, dtype=np.float64).ravel()
        return cls.from_dense(np.diag(values))

    @classmethod
    def identity(cls, n: int) -> "LowerTriMatrix":
        return cls.from_dense(np.eye(n))

    def _row_start(self, i: int) -> int:
        return i * (i + 1) // 2

    def entry(self, i: int, j: int) -> float:
        if i < j:
            return 0.0
        return float(self.entries[self._row_start(i) + j])

    def row(self, i: int) -> np.ndarray:
        start = self._row_start(i)
        return self.entries[start:start + i + 1]

    def column(self, j: int) -> np.ndarray:
        ret = np.zeros(self.n)
        rows = np.arange(j, self.n)
        ret[j:] = self.entries[rows * (rows + 1) // 2 + j]
        return ret

    def diag(self) -> np.ndarray:
        rows = np.arange(self.n)
        return self.entries[rows * (rows + 1) // 2 + rows]

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        dense[np.tril_indices(self.n)] = self.entries
        return dense

    def is_non_negative(self) -> bool:
        return bool(np.all(self.entries >= 0.0))

    def to_dict(self) -> dict:
        return {"n": self.n, "rows": [self.row(i).tolist() for i in range(self.n)]}


AnyLowerTri = Union[LttMatrix, LowerTriMatrix]


class ColumnNorms:

    def __init__(self, d):
        """
        Euclidean norms of the columns of a lower-triangular matrix
        :param d: norms d_1..d_n
        :type d: :obj:`list`, :obj:`numpy.ndarray`
        """
        d = np.asarray(d, dtype=np.float64).ravel()
        if not np.all(np.isfinite(d)) or np.any(d < 0.0):
            raise MatrixError("column norms must be finite and non-negative")
        self.d = _frozen(d)

    def __len__(self):
        return self.d.size

    def __repr__(self):
        return "ColumnNorms({})".format(np.array2string(self.d[:6]))

    def is_non_increasing(self) -> bool:
        return bool(np.all(np.diff(self.d) <= 0.0))


def matrix_from_dict(payload: dict) -> AnyLowerTri:
    """
    Rebuild a matrix from its JSON debugging dump
    :param payload: {"n": int, "first_col": [...]} or {"n": int, "rows": [[...]]}
    :type payload: dict
    :return: decoded matrix
    :rtype: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    """
    if "first_col" in payload:
        return LttMatrix(payload["first_col"], n=payload["n"])
    if "rows" in payload:
        ret = LowerTriMatrix.from_rows(payload["rows"])
        if ret.n != payload["n"]:
            raise MatrixError("declared order {} does not match {} rows".format(payload["n"], ret.n))
        return ret
    raise MatrixError("matrix payload needs either 'first_col' or 'rows'")


def check_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 <= lam < 1.0:
        raise MatrixError("lambda must lie in [0, 1), got {}".format(lam))
    return lam


def make_c_lambda(n: int, lam: float) -> LttMatrix:
    """
    Build the strategy matrix C_lambda with entries lambda^(i-j) below the diagonal
    :param n: matrix order
    :type n: int
    :param lam: correlation parameter in [0, 1)
    :type lam: float
    :return: first column (1, lambda, ..., lambda^(n-1))
    :rtype: LttMatrix
    """
    lam = check_lambda(lam)
    if n < 1:
        raise MatrixError("matrix order must be positive, got {}".format(n))
    return LttMatrix(lam ** np.arange(n, dtype=np.float64))


def identity_ltt(n: int) -> LttMatrix:
    col = np.zeros(n)
    col[0] = 1.0
    return LttMatrix(col)


def prefix_sum_matrix(n: int) -> LttMatrix:
    """
    Lower-triangular matrix of ones A, A @ g gives cumulative sums of g
    :param n: matrix order
    :type n: int
    :return: all-ones first column
    :rtype: LttMatrix
    """
    if n < 1:
        raise MatrixError("matrix order must be positive, got {}".format(n))
    return LttMatrix(np.ones(n))


def ltt_multiply(a: LttMatrix, b: LttMatrix) -> LttMatrix:
    """
    Product of two lower-triangular Toeplitz matrices, a truncated convolution of first columns
    :param a: left factor
    :type a: LttMatrix
    :param b: right factor
    :type b: LttMatrix
    :return: a @ b
    :rtype: LttMatrix
    """
    if a.n != b.n:
        raise MatrixError("dimension mismatch: {} vs {}".format(a.n, b.n))
    return LttMatrix(np.convolve(a.first_col, b.first_col)[:a.n])


def ltt_inverse(m: LttMatrix) -> LttMatrix:
    """
    Invert a lower-triangular Toeplitz matrix with the convolution recurrence
    inv_t = -(sum_{s=1..t} c_s inv_{t-s}) / c_0
    :param m: matrix with non-zero leading entry
    :type m: LttMatrix
    :return: inverse, again lower-triangular Toeplitz
    :rtype: LttMatrix
    """
    col = m.first_col
    if col[0] == 0.0:
        raise MatrixError("singular Toeplitz matrix: leading entry is zero")

    inv = np.zeros(m.n)
    inv[0] = 1.0 / col[0]
    for t in range(1, m.n):
        inv[t] = -np.dot(col[1:t + 1], inv[t - 1::-1]) / col[0]

    if not np.all(np.isfinite(inv)):
        raise MatrixError("Toeplitz inverse overflowed, the matrix is numerically singular")

    return LttMatrix(inv)


def matmul(a: AnyLowerTri, b: AnyLowerTri) -> AnyLowerTri:
    """
    Product of two lower-triangular matrices, Toeplitz structure is kept when both factors have it
    :param a: left factor
    :type a: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    :param b: right factor
    :type b: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    :return: a @ b
    :rtype: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    """
    if a.n != b.n:
        raise MatrixError("dimension mismatch: {} vs {}".format(a.n, b.n))
    if isinstance(a, LttMatrix) and isinstance(b, LttMatrix):
        return ltt_multiply(a, b)
    return LowerTriMatrix.from_dense(a.to_dense() @ b.to_dense())


def column_norms(m: AnyLowerTri) -> ColumnNorms:
    """
    Euclidean norm of every column
    :param m: source matrix
    :type m: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    :return: d_j = ||m[:, j]||_2
    :rtype: ColumnNorms
    """
    if isinstance(m, LttMatrix):
        # column j holds c_0..c_{n-1-j}
        return ColumnNorms(np.sqrt(np.cumsum(m.first_col ** 2)[::-1]))
    return ColumnNorms(np.sqrt(np.sum(m.to_dense() ** 2, axis=0)))


def c_lambda_column_norms(n: int, lam: float) -> ColumnNorms:
    """
    Closed-form column norms of C_lambda, d_j^2 = (1 - lambda^(2(n-j+1))) / (1 - lambda^2)
    :param n: matrix order
    :type n: int
    :param lam: correlation parameter in [0, 1)
    :type lam: float
    :return: norms d_1..d_n
    :rtype: ColumnNorms
    """
    lam = check_lambda(lam)
    heights = np.arange(n, 0, -1, dtype=np.float64)
    return ColumnNorms(np.sqrt((1.0 - lam ** (2.0 * heights)) / (1.0 - lam * lam)))


def normalize_columns(m: AnyLowerTri) -> LowerTriMatrix:
    """
    Rescale every column to unit norm, m @ diag(1 / d_j)
    :param m: source matrix
    :type m: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    :return: column-normalized matrix, no longer Toeplitz in general
    :rtype: LowerTriMatrix
    """
    norms = column_norms(m).d
    if np.any(norms == 0.0):
        raise MatrixError("cannot normalize a zero column (column {})".format(int(np.argmin(norms))))
    return LowerTriMatrix.from_dense(m.to_dense() / norms[np.newaxis, :])


def frobenius_norm(m: AnyLowerTri) -> float:
    if isinstance(m, LttMatrix):
        weights = np.arange(m.n, 0, -1, dtype=np.float64)
        return float(np.sqrt(np.dot(weights, m.first_col ** 2)))
    return float(np.linalg.norm(m.entries))


def row_max_norm(m: AnyLowerTri) -> float:
    """
    Largest row norm ||m||_{2->inf}
    :param m: source matrix
    :type m: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    :return: max_i ||m[i, :]||_2
    :rtype: float
    """
    if isinstance(m, LttMatrix):
        # the last row holds every coefficient
        return float(np.sqrt(np.max(np.cumsum(m.first_col ** 2))))
    starts = np.arange(m.n) * (np.arange(m.n) + 1) // 2
    return float(np.sqrt(np.max(np.add.reduceat(m.entries ** 2, starts))))


def b_factor(strategy: AnyLowerTri) -> AnyLowerTri:
    """
    Left factor B = A C^-1 of the prefix-sum factorization A = B C
    :param strategy: invertible strategy matrix C
    :type strategy: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    :return: B, Toeplitz when C is Toeplitz
    :rtype: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    """
    n = strategy.n
    if isinstance(strategy, LttMatrix):
        return ltt_multiply(prefix_sum_matrix(n), ltt_inverse(strategy))

    if np.any(strategy.diag() == 0.0):
        raise MatrixError("singular strategy: zero on the diagonal")

    # B C = A  <=>  C^T B^T = A^T
    transposed = solve_triangular(strategy.to_dense(), prefix_sum_matrix(n).to_dense().T, trans="T", lower=True)
    logger.debug("dense triangular solve for b_factor of order %d", n)
    return LowerTriMatrix.from_dense(transposed.T)
