#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: __init__
# Created on: 2026/10/19

from .__exceptions import (LambdaCGDError, MatrixError, SchemaError, SensitivityError, PrngError, StreamError,
                           CalibrationError, AmplificationNotImplemented, ConfigError, TrainingDivergedError)
from .__matrix import (LttMatrix, LowerTriMatrix, ColumnNorms, make_c_lambda, prefix_sum_matrix, identity_ltt,
                       ltt_multiply, ltt_inverse, matmul, column_norms, c_lambda_column_norms, normalize_columns,
                       frobenius_norm, row_max_norm, b_factor, matrix_from_dict)
from .__prng import PrngState, gaussian_block
from .__tasks import SynthTask, synth_task
from .sensitivity import (ParticipationSchema, ParticipationPattern, sens_leftmost, sens_min_sep,
                          sens_c_lambda_block_form, sens_c_lambda_closed, sens_normalized, sens_bruteforce,
                          bruteforce_argmax, count_patterns, sensitivity)
from .metrics import (Factorization, MetricReport, LambdaSearch, FullBatchBounds, evaluate, optimize_lambda,
                      full_batch_bounds, dp_sgd_factorization, lambda_factorization,
                      normalized_lambda_factorization, diagonal_strategy, rmse_lambda_closed, maxse_lambda_closed,
                      normalized_rmse_ratio, ones_vector_bound)
from .noise import (NoiseStreamConfig, NoiseStream, DrawAccounting, buffered_reference, draw_accounting,
                    empirical_variance)
from .privacy import PrivacyBudget, NoiseScale, gaussian_multiplier, calibrate, amplified_multiplier_stub
from .trainer import TrainConfig, TrainTrace, BatchPlan, clip, allocate_balls_in_bins, sequential_batches, train

__version__ = "0.1.0"
