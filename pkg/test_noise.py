#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: test_noise
# Created on: 2026/10/19

import json

import numpy as np
import pytest

from lambdacgd import (NoiseStreamConfig, NoiseStream, PrngState, gaussian_block, buffered_reference, draw_accounting,
                       empirical_variance, PrngError, StreamError, MatrixError)
from lambdacgd.__prng import BLOCK_STRIDE, COUNTER_LIMIT, SEED_LIMIT
from lambdacgd.noise import (replay_blocks, dense_correlation_oracle, expected_regenerations, bench_config,
                             bench_stream, emit_test_vectors, check_test_vectors, load_test_vectors, BENCH_HEADER)


def random_config(rng: np.random.Generator) -> NoiseStreamConfig:
    d = int(rng.integers(1, 9))
    seed = int(rng.integers(0, 2 ** 63))
    mode = rng.choice(["independent", "lambda_cancel", "banded_inverse"])
    if mode == "independent":
        return NoiseStreamConfig.independent(d, scale=float(rng.uniform(0.1, 3.0)), seed=seed)
    if mode == "lambda_cancel":
        return NoiseStreamConfig.lambda_cancel(float(rng.uniform(0.0, 0.99)), d, seed=seed)
    p = int(rng.choice([2, 4, 16]))
    coeffs = [1.0] + list(rng.uniform(-1.0, 1.0, p - 1))
    return NoiseStreamConfig.banded_inverse(coeffs, d, scale=float(rng.uniform(0.1, 3.0)), seed=seed)


class TestGaussianBlock:

    def test_deterministic(self):
        a, next_a = gaussian_block(PrngState(42, 0), 16)
        b, next_b = gaussian_block(PrngState(42, 0), 16)
        np.testing.assert_array_equal(a, b)
        assert next_a == next_b
        assert next_a.counter == BLOCK_STRIDE
        assert next_a.block_index == 1

    def test_blocks_are_addressable(self):
        z = replay_blocks(9, 4, 5)
        block, _ = gaussian_block(PrngState.for_block(9, 3), 4)
        np.testing.assert_array_equal(block, z[3])

    def test_copied_state_generates_same_block(self):
        state = PrngState.for_block(77, 5)
        duplicate = state.copy()
        assert duplicate == state and duplicate is not state
        a, next_a = gaussian_block(state, 32)
        b, next_b = gaussian_block(duplicate, 32)
        np.testing.assert_array_equal(a, b)
        assert next_a == next_b

    def test_seeds_differ(self):
        a, _ = gaussian_block(PrngState(1, 0), 8)
        b, _ = gaussian_block(PrngState(2, 0), 8)
        assert not np.array_equal(a, b)

    def test_moments(self):
        block, _ = gaussian_block(PrngState(2026, 0), 1_000_000)
        assert abs(block.mean()) < 5e-3
        assert abs(block.var() - 1.0) < 1e-2

    def test_counter_overflow(self):
        with pytest.raises(PrngError):
            gaussian_block(PrngState(0, COUNTER_LIMIT - BLOCK_STRIDE), 4)
        with pytest.raises(OverflowError):
            gaussian_block(PrngState(0, COUNTER_LIMIT - 1), 1)

    def test_state_validation(self):
        with pytest.raises(PrngError):
            PrngState(SEED_LIMIT)
        with pytest.raises(PrngError):
            PrngState(0, -1)
        with pytest.raises(PrngError):
            gaussian_block(PrngState(0), 0)


class TestConfig:

    def test_invalid(self):
        with pytest.raises(StreamError):
            NoiseStreamConfig("lowpass", 3)
        with pytest.raises(StreamError):
            NoiseStreamConfig.independent(0)
        with pytest.raises(StreamError):
            NoiseStreamConfig.banded_inverse([0.5, 0.1], 3)
        with pytest.raises(StreamError):
            NoiseStreamConfig("lambda_cancel", 3)
        with pytest.raises(MatrixError):
            NoiseStreamConfig.lambda_cancel(1.0, 3)
        with pytest.raises(StreamError):
            NoiseStreamConfig.independent(3, horizon=4, column_scales=[1.0, 1.0])

    def test_coefficients(self):
        np.testing.assert_array_equal(NoiseStreamConfig.independent(2).correlation_coeffs, [1.0])
        np.testing.assert_array_equal(NoiseStreamConfig.lambda_cancel(0.3, 2).correlation_coeffs, [1.0, -0.3])
        assert NoiseStreamConfig.banded_inverse([1.0, 0.2, 0.1], 2).bandwidth == 3

    def test_dict_dump(self):
        config = NoiseStreamConfig.banded_inverse([1.0, -0.5], 3, scale=2.0, seed=11, horizon=5)
        assert NoiseStreamConfig.from_dict(config.to_dict()) == config
        with pytest.raises(StreamError):
            NoiseStreamConfig.from_dict({"dim": 3})


class TestStreamAgainstReference:
    """
    the zero-buffer stream reproduces the buffered comparator bit for bit
    """

    def test_random_configs(self):
        rng = np.random.default_rng(20261019)
        for _ in range(50):
            config = random_config(rng)
            n = int(rng.integers(1, 41))
            got = NoiseStream(config).take(n)
            np.testing.assert_array_equal(got, buffered_reference(config, n), err_msg=str(config))

    def test_dense_oracle_lambda(self):
        config = NoiseStreamConfig.lambda_cancel(0.7, 3, seed=5)
        got = NoiseStream(config).take(8)
        np.testing.assert_allclose(got, dense_correlation_oracle(config, 8), rtol=1e-12, atol=1e-12)

    def test_dense_oracle_banded(self):
        config = NoiseStreamConfig.banded_inverse([1.0, -0.5, 0.1, -0.02], 2, seed=6)
        got = NoiseStream(config).take(8)
        np.testing.assert_allclose(got, dense_correlation_oracle(config, 8), rtol=1e-12, atol=1e-12)

    def test_first_row_is_fresh_block(self):
        config = NoiseStreamConfig.lambda_cancel(0.9, 4, scale=1.0, seed=3)
        np.testing.assert_array_equal(NoiseStream(config).next_noise(), replay_blocks(3, 4, 1)[0])

    def test_lambda_zero_matches_independent(self):
        a = NoiseStream(NoiseStreamConfig.lambda_cancel(0.0, 5, scale=1.5, seed=8)).take(12)
        b = NoiseStream(NoiseStreamConfig.independent(5, scale=1.5, seed=8)).take(12)
        np.testing.assert_array_equal(a, b)

    def test_lambda_mode_matches_two_band(self):
        a = NoiseStream(NoiseStreamConfig.lambda_cancel(0.6, 4, seed=2)).take(10)
        b = NoiseStream(NoiseStreamConfig.banded_inverse([1.0, -0.6], 4, seed=2)).take(10)
        np.testing.assert_array_equal(a, b)

    def test_column_scales(self):
        scales = np.linspace(1.0, 0.5, 6)
        config = NoiseStreamConfig.lambda_cancel(0.8, 3, scale=2.0, seed=4, column_scales=scales)
        plain = NoiseStreamConfig.lambda_cancel(0.8, 3, scale=2.0, seed=4)
        got = NoiseStream(config).take(6)
        np.testing.assert_array_equal(got, buffered_reference(config, 6))
        np.testing.assert_allclose(got, scales[:, None] * NoiseStream(plain).take(6), rtol=1e-14)

    def test_reference_limits(self):
        config = NoiseStreamConfig.independent(10, horizon=4)
        with pytest.raises(StreamError):
            buffered_reference(config, 5)
        with pytest.raises(StreamError):
            buffered_reference(NoiseStreamConfig.independent(10), 100, max_elements=999)
        with pytest.raises(StreamError):
            buffered_reference(NoiseStreamConfig.independent(2, column_scales=[1.0, 1.0]), 3)


class TestStreamState:

    def test_saved_states_bounded(self):
        stream = NoiseStream(NoiseStreamConfig.banded_inverse([1.0, 0.1, 0.1, 0.1], 2, seed=1))
        for i in range(1, 10):
            stream.next_noise()
            assert len(stream.saved_states) == min(i, 3)
        assert [s.block_index for s in stream.saved_states] == [6, 7, 8]

    def test_independent_keeps_nothing(self):
        stream = NoiseStream(NoiseStreamConfig.independent(2))
        stream.take(5)
        assert stream.saved_states == ()

    def test_draw_accounting(self):
        stream = NoiseStream(NoiseStreamConfig.lambda_cancel(0.5, 3))
        stream.take(10)
        acc = draw_accounting(stream)
        assert (acc.fresh_blocks, acc.regenerated_blocks) == (10, 9)

        stream = NoiseStream(NoiseStreamConfig.independent(3))
        stream.take(10)
        assert draw_accounting(stream).to_dict() == {"fresh_blocks": 10, "regenerated_blocks": 0}

        stream = NoiseStream(NoiseStreamConfig.banded_inverse([1.0, 0.3, 0.2, 0.1], 3))
        stream.take(10)
        assert draw_accounting(stream).regenerated_blocks == expected_regenerations(10, 4) == 24

    def test_horizon(self):
        stream = NoiseStream(NoiseStreamConfig.lambda_cancel(0.5, 2, horizon=3))
        assert len(list(stream)) == 3
        assert stream.exhausted
        with pytest.raises(StreamError):
            stream.next_noise()

    def test_busy_stream(self):
        stream = NoiseStream(NoiseStreamConfig.independent(2))
        lock = stream._NoiseStream__lock
        lock.acquire()
        try:
            with pytest.raises(StreamError):
                stream.next_noise()
        finally:
            lock.release()
        assert stream.next_noise().shape == (2,)

    def test_empty_take(self):
        assert NoiseStream(NoiseStreamConfig.independent(4)).take(0).shape == (0, 4)


class TestVariance:

    @pytest.mark.parametrize("lam", [0.3, 0.5, 0.9])
    def test_lambda_stream(self, lam):
        n = 10
        stats = empirical_variance(NoiseStreamConfig.lambda_cancel(lam, 1000, seed=100), n, trials=20)
        assert stats["step_variance"][0] == pytest.approx(1.0, rel=5e-2)
        np.testing.assert_allclose(stats["step_variance"][1:], 1.0 + lam ** 2, rtol=5e-2)
        assert stats["cumulative_variance"] == pytest.approx(1.0 + (1.0 - lam) ** 2 * (n - 1), rel=5e-2)

    def test_independent_stream(self):
        n = 10
        stats = empirical_variance(NoiseStreamConfig.independent(1000, seed=7), n, trials=20)
        np.testing.assert_allclose(stats["step_variance"], 1.0, rtol=5e-2)
        assert stats["cumulative_variance"] == pytest.approx(n, rel=5e-2)


class TestBenchAndVectors:

    def test_bench(self):
        result = bench_stream(bench_config("banded_inverse", 16, p=4), 20)
        assert result.p == 4
        assert result.fresh == 20
        assert result.regenerated == expected_regenerations(20, 4)
        assert len(result.to_row()) == len(BENCH_HEADER)

    def test_vectors_round_trip(self, tmp_path):
        payload = emit_test_vectors(NoiseStreamConfig.lambda_cancel(0.9, 3, seed=123), 5)
        assert payload["schema_version"] == 1
        assert check_test_vectors(payload)

        path = tmp_path / "vectors.json"
        path.write_text(json.dumps([payload]), encoding="utf-8")
        loaded = load_test_vectors(str(path))
        assert len(loaded) == 1
        assert check_test_vectors(loaded[0])

    def test_vectors_detect_tampering(self):
        payload = emit_test_vectors(NoiseStreamConfig.independent(2, seed=1), 3)
        payload["outputs"][1][0] += 1e-12
        assert not check_test_vectors(payload)
