#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: demo
# Created on: 2026/10/19


import time

import numpy as np

from lambdacgd import (ParticipationSchema, PrivacyBudget, NoiseStreamConfig, NoiseStream, TrainConfig, make_c_lambda,
                       normalize_columns, sensitivity, sens_c_lambda_closed, evaluate, lambda_factorization,
                       dp_sgd_factorization, optimize_lambda, full_batch_bounds, calibrate, buffered_reference,
                       draw_accounting, empirical_variance, train)
from lambdacgd.trainer import reconstruct_theta


def matrix_demo():
    # C_lambda has entries lambda^(i-j), its inverse only keeps two diagonals
    c = make_c_lambda(6, 0.5)
    print("[MATRIX] C_0.5 first column: {}".format(c.first_col))
    print("[MATRIX] column-normalized C_0.5 (dense):\n{}".format(np.round(normalize_columns(c).to_dense(), 3)))

    bounds = full_batch_bounds(10_000)
    print("[MATRIX] full-batch RMSE bounds at n=10000: {}".format(bounds.to_dict()))


def sensitivity_demo():
    schema = ParticipationSchema(n=1024, k=4, b=256)
    for lam in (0.0, 0.5, 0.9, 0.99):
        print("[SENS] k=4, b=256, lambda={:<5} sens={:.6f}".format(lam, sens_c_lambda_closed(1024, 4, 256, lam)))

    # -*- Way 2 -*- (generic dispatcher, any non-negative lower-triangular strategy)
    # sens = sensitivity(make_c_lambda(1024, 0.9), schema)
    print("[SENS] dispatcher on C_0.9: {:.6f}".format(sensitivity(make_c_lambda(1024, 0.9), schema)))

    for metric in ("rmse", "maxse"):
        search = optimize_lambda(metric, schema)
        print("[SENS] optimal lambda for {}: {:.4f} ({} = {:.4f}, DP-SGD {} = {:.4f})".format(
            metric, search.lambda_star, metric, search.value, metric,
            getattr(evaluate(dp_sgd_factorization(1024), schema), metric)))

    report = evaluate(lambda_factorization(1024, 0.9), schema)
    print("[SENS] dense evaluation of C_0.9: {}".format(report))


def noise_demo():
    # initialize a zero-buffer stream of dimension one million
    # -*- Way 1 -*-
    config = NoiseStreamConfig.lambda_cancel(0.9, 1_000_000, scale=1.0, seed=2026)

    # -*- Way 2 -*- (banded inverse, keeps p - 1 generator states)
    # config = NoiseStreamConfig.banded_inverse([1.0, -0.5, 0.25, -0.125], 1_000_000, seed=2026)

    stream = NoiseStream(config)
    t0 = time.time()
    for _ in range(20):
        stream.next_noise()
    acc = draw_accounting(stream)
    print("[NOISE] 20 steps in {:.2f} ms, fresh blocks: {}, regenerated blocks: {}".format(
        (time.time() - t0) * 1000, acc.fresh_blocks, acc.regenerated_blocks))

    # the stream matches a comparator that stores every block, bit for bit
    small = NoiseStreamConfig.lambda_cancel(0.9, 8, seed=2026)
    print("[NOISE] stream equals buffered reference: {}".format(
        np.array_equal(NoiseStream(small).take(32), buffered_reference(small, 32))))

    # partial cancellation: per-step variance 1 + lambda^2, cumulative variance 1 + (1 - lambda)^2 (n - 1)
    stats = empirical_variance(NoiseStreamConfig.lambda_cancel(0.9, 10_000, seed=7), 10)
    print("[NOISE] per-step variance {}, cumulative variance {:.4f}".format(
        np.round(stats["step_variance"], 3), stats["cumulative_variance"]))


def privacy_demo():
    budget = PrivacyBudget(epsilon=1.0, delta=1e-5)
    schema = ParticipationSchema(n=512, k=8, b=64)
    for lam in (0.0, 0.9):
        scale = calibrate(make_c_lambda(512, lam), schema, budget)
        print("[PRIVACY] lambda={}: sigma multiplier {:.4f}, sens {:.4f}, noise std {:.4f}".format(
            lam, scale.sigma_multiplier, scale.sens, scale.total))


def train_demo():
    for lam in (0.0, 0.9):
        config = TrainConfig(dim=5, dataset_size=1024, batch_size=16, epochs=8, lam=lam, seed=1)
        theta, trace = train(config)
        print("[TRAIN] lambda={}: final loss {:.6f}, theta {}".format(lam, trace.final_loss, np.round(theta, 4)))
        print("[TRAIN] replayed from trace: {}".format(np.array_equal(reconstruct_theta(trace), theta)))


if __name__ == "__main__":
    matrix_demo()
    sensitivity_demo()
    #noise_demo()
    #privacy_demo()
    train_demo()
