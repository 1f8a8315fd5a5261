#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: test_matrix
# Created on: 2026/10/19

import numpy as np
import pytest

from lambdacgd import (LttMatrix, LowerTriMatrix, ColumnNorms, MatrixError, make_c_lambda, prefix_sum_matrix,
                       identity_ltt, ltt_multiply, ltt_inverse, matmul, column_norms, c_lambda_column_norms,
                       normalize_columns, frobenius_norm, row_max_norm, b_factor, matrix_from_dict)


class TestLttMatrix:

    def test_dense_layout(self):
        m = LttMatrix([3.0, 2.0, 1.0])
        np.testing.assert_array_equal(m.to_dense(), [[3, 0, 0], [2, 3, 0], [1, 2, 3]])
        assert m.entry(2, 0) == 1.0
        assert m.entry(0, 2) == 0.0

    def test_rejects_bad_input(self):
        with pytest.raises(MatrixError):
            LttMatrix([])
        with pytest.raises(MatrixError):
            LttMatrix([1.0, np.nan])
        with pytest.raises(MatrixError):
            LttMatrix([1.0, 2.0], n=3)

    def test_first_column_is_read_only(self):
        m = LttMatrix([1.0, 0.5])
        with pytest.raises(ValueError):
            m.first_col[0] = 2.0

    def test_dict_dump(self):
        m = make_c_lambda(4, 0.5)
        again = matrix_from_dict(m.to_dict())
        np.testing.assert_array_equal(again.to_dense(), m.to_dense())

    def test_monotone_check(self):
        assert make_c_lambda(6, 0.3).is_monotone_non_negative()
        assert not LttMatrix([1.0, 2.0]).is_monotone_non_negative()
        assert not LttMatrix([1.0, -0.5]).is_monotone_non_negative()


class TestLowerTriMatrix:

    def test_packed_rows(self):
        m = LowerTriMatrix.from_rows([[1.0], [2.0, 3.0], [4.0, 5.0, 6.0]])
        np.testing.assert_array_equal(m.entries, [1, 2, 3, 4, 5, 6])
        np.testing.assert_array_equal(m.row(2), [4, 5, 6])
        np.testing.assert_array_equal(m.column(1), [0, 3, 5])
        assert m.entry(1, 0) == 2.0

    def test_from_dense_drops_upper_part(self):
        dense = np.arange(9.0).reshape(3, 3)
        np.testing.assert_array_equal(LowerTriMatrix.from_dense(dense).to_dense(), np.tril(dense))

    def test_storage_size_is_checked(self):
        with pytest.raises(MatrixError):
            LowerTriMatrix(3, [1.0, 2.0])

    def test_dict_dump(self):
        m = LowerTriMatrix.from_rows([[1.0], [0.5, 2.0]])
        np.testing.assert_array_equal(matrix_from_dict(m.to_dict()).to_dense(), m.to_dense())


class TestCLambda:

    def test_entries(self):
        c = make_c_lambda(4, 0.5)
        np.testing.assert_array_equal(c.first_col, [1.0, 0.5, 0.25, 0.125])

    def test_lambda_zero_is_identity(self):
        np.testing.assert_array_equal(make_c_lambda(5, 0.0).to_dense(), np.eye(5))

    def test_inverse_is_two_banded(self):
        inv = ltt_inverse(make_c_lambda(4, 0.5))
        np.testing.assert_allclose(inv.first_col, [1.0, -0.5, 0.0, 0.0], atol=1e-15)

    @pytest.mark.parametrize("lam", [-0.1, 1.0, 1.5])
    def test_lambda_domain(self, lam):
        with pytest.raises(MatrixError):
            make_c_lambda(4, lam)

    def test_order_must_be_positive(self):
        with pytest.raises(MatrixError):
            make_c_lambda(0, 0.5)

    @pytest.mark.parametrize("lam", [0.0, 0.3, 0.9, 0.999])
    def test_closed_form_column_norms(self, lam):
        n = 50
        np.testing.assert_allclose(c_lambda_column_norms(n, lam).d, column_norms(make_c_lambda(n, lam)).d,
                                   rtol=1e-12)
        assert c_lambda_column_norms(n, lam).is_non_increasing()


class TestAlgebra:

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(7)
        for n in (1, 2, 16, 64):
            col = rng.uniform(-1.0, 1.0, n) * 0.4 ** np.arange(n)
            col[0] = 1.0
            m = LttMatrix(col)
            product = ltt_multiply(m, ltt_inverse(m))
            np.testing.assert_allclose(product.to_dense(), np.eye(n), atol=1e-12)

    def test_singular_inverse(self):
        with pytest.raises(MatrixError):
            ltt_inverse(LttMatrix([0.0, 1.0]))

    def test_convolution_matches_dense_product(self):
        a = make_c_lambda(8, 0.7)
        b = prefix_sum_matrix(8)
        np.testing.assert_allclose(ltt_multiply(a, b).to_dense(), a.to_dense() @ b.to_dense(), rtol=1e-14)

    def test_mixed_product_is_dense(self):
        a = make_c_lambda(5, 0.5)
        b = LowerTriMatrix.diagonal(np.arange(1.0, 6.0))
        product = matmul(a, b)
        assert isinstance(product, LowerTriMatrix)
        np.testing.assert_allclose(product.to_dense(), a.to_dense() @ b.to_dense())

    def test_dimension_mismatch(self):
        with pytest.raises(MatrixError):
            matmul(identity_ltt(3), identity_ltt(4))

    def test_prefix_sum(self):
        a = prefix_sum_matrix(4)
        np.testing.assert_array_equal(a.to_dense() @ np.array([1.0, 2.0, 3.0, 4.0]), [1, 3, 6, 10])

    def test_norms_match_dense(self):
        for m in (make_c_lambda(12, 0.8), b_factor(make_c_lambda(12, 0.8)),
                  LowerTriMatrix.from_dense(np.tril(np.arange(16.0).reshape(4, 4)))):
            dense = m.to_dense()
            assert frobenius_norm(m) == pytest.approx(np.linalg.norm(dense), rel=1e-12)
            assert row_max_norm(m) == pytest.approx(np.linalg.norm(dense, axis=1).max(), rel=1e-12)

    def test_b_factor_of_c_lambda(self):
        n, lam = 6, 0.4
        b = b_factor(make_c_lambda(n, lam))
        expected = np.ones(n) * (1.0 - lam)
        expected[0] = 1.0
        np.testing.assert_allclose(b.first_col, expected, rtol=1e-14)

    def test_b_factor_dense_solve(self):
        c = normalize_columns(make_c_lambda(10, 0.9))
        b = b_factor(c)
        np.testing.assert_allclose(b.to_dense() @ c.to_dense(), prefix_sum_matrix(10).to_dense(), atol=1e-10)

    def test_b_factor_singular(self):
        with pytest.raises(MatrixError):
            b_factor(LowerTriMatrix.diagonal([1.0, 0.0, 1.0]))


class TestNormalization:

    def test_unit_columns(self):
        c = normalize_columns(make_c_lambda(20, 0.9))
        np.testing.assert_allclose(column_norms(c).d, 1.0, rtol=1e-14)

    def test_zero_column(self):
        with pytest.raises(MatrixError):
            normalize_columns(LowerTriMatrix.diagonal([1.0, 0.0]))

    def test_negative_norms_rejected(self):
        with pytest.raises(MatrixError):
            ColumnNorms([1.0, -1.0])


class TestWorkedExamples:

    def test_prefix_sum_inverse_is_first_difference(self):
        np.testing.assert_array_equal(ltt_inverse(prefix_sum_matrix(5)).first_col, [1, -1, 0, 0, 0])

    def test_prefix_sum_times_c_lambda_inverse(self):
        product = ltt_multiply(prefix_sum_matrix(3), ltt_inverse(make_c_lambda(3, 0.3)))
        np.testing.assert_allclose(product.first_col, [1.0, 0.7, 0.7], rtol=1e-15)

    def test_double_inverse(self):
        rng = np.random.default_rng(11)
        col = rng.uniform(-1.0, 1.0, 128) * 0.5 ** np.arange(128)
        col[0] = 1.0
        m = LttMatrix(col)
        np.testing.assert_allclose(ltt_inverse(ltt_inverse(m)).first_col, col, rtol=1e-10, atol=1e-12)

    def test_small_column_norms(self):
        np.testing.assert_allclose(column_norms(make_c_lambda(2, 0.5)).d, [np.sqrt(1.25), 1.0], rtol=1e-15)
        d1_sq = (1 - 0.9 ** 16) / (1 - 0.81)
        assert c_lambda_column_norms(8, 0.9).d[0] ** 2 == pytest.approx(d1_sq, rel=1e-12)

    def test_small_normalization(self):
        expected = np.array([[1.0, 0.0], [0.5, 1.0]])
        expected[:, 0] /= np.sqrt(1.25)
        np.testing.assert_allclose(normalize_columns(make_c_lambda(2, 0.5)).to_dense(), expected, rtol=1e-15)

    def test_normalized_b_factor_entries(self):
        n, lam = 6, 0.7
        d = c_lambda_column_norms(n, lam).d
        left = b_factor(normalize_columns(make_c_lambda(n, lam))).to_dense()
        np.testing.assert_allclose(np.diag(left), d, rtol=1e-10)
        for j in range(n - 1):
            np.testing.assert_allclose(left[j + 1:, j], d[j] - lam * d[j + 1], rtol=1e-10)
