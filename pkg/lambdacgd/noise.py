#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: noise
# Created on: 2026/10/19

"""
Correlated Gaussian noise streams.

A stream emits scale * (C^-1 Z)_i one row at a time, where C^-1 is lower-triangular Toeplitz with
p non-zero leading coefficients and Z_i are fresh Gaussian blocks. Past blocks are never stored:
the stream keeps the generator states of the last p - 1 blocks and regenerates them on demand.
"""

import json
import logging
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from functools import wraps
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .__exceptions import StreamError
from .__matrix import LttMatrix, check_lambda
from .__prng import PrngState, gaussian_block

logger = logging.getLogger(__name__)

MODES = ("independent", "lambda_cancel", "banded_inverse")
DEFAULT_MAX_ELEMENTS = 1 << 26
TEST_VECTOR_SCHEMA = 1


@dataclass(frozen=True)
class NoiseStreamConfig:
    """
    Immutable description of a noise stream

    mode is one of "independent", "lambda_cancel" (uses lam) or "banded_inverse" (uses coeffs, coeffs[0] == 1).
    column_scales, when given, multiplies output row i by column_scales[i - 1] (column-normalized correlator).
    """
    mode: str
    dim: int
    scale: float = 1.0
    seed: int = 0
    lam: Optional[float] = None
    coeffs: Optional[Tuple[float, ...]] = None
    horizon: Optional[int] = None
    column_scales: Optional[Tuple[float, ...]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise StreamError("unknown noise mode '{}', expecting one of {}".format(self.mode, MODES))
        if self.dim < 1:
            raise StreamError("stream dimension must be positive, got {}".format(self.dim))
        if not np.isfinite(self.scale) or self.scale < 0:
            raise StreamError("scale must be a finite non-negative number, got {}".format(self.scale))
        if self.horizon is not None and self.horizon < 1:
            raise StreamError("horizon must be positive, got {}".format(self.horizon))

        if self.mode == "lambda_cancel":
            if self.lam is None:
                raise StreamError("lambda_cancel mode needs lam")
            check_lambda(self.lam)
        elif self.mode == "banded_inverse":
            if self.coeffs is None or len(self.coeffs) < 1:
                raise StreamError("banded_inverse mode needs at least one coefficient")
            coeffs = tuple(float(c) for c in self.coeffs)
            if coeffs[0] != 1.0:
                raise StreamError("leading banded coefficient must be 1, got {}".format(coeffs[0]))
            if not all(np.isfinite(coeffs)):
                raise StreamError("banded coefficients must be finite")
            object.__setattr__(self, "coeffs", coeffs)

        if self.column_scales is not None:
            scales = tuple(float(s) for s in self.column_scales)
            if not scales:
                raise StreamError("column scales must not be empty")
            if not all(np.isfinite(scales)) or min(scales) < 0:
                raise StreamError("column scales must be finite and non-negative")
            if self.horizon is not None and len(scales) < self.horizon:
                raise StreamError("{} column scales cannot cover a horizon of {} steps".format(
                    len(scales), self.horizon))
            object.__setattr__(self, "column_scales", scales)

    @classmethod
    def independent(cls, dim: int, scale: float = 1.0, seed: int = 0, **kwargs) -> "NoiseStreamConfig":
        return cls("independent", dim, scale, seed, **kwargs)

    @classmethod
    def lambda_cancel(cls, lam: float, dim: int, scale: float = 1.0, seed: int = 0,
                      **kwargs) -> "NoiseStreamConfig":
        return cls("lambda_cancel", dim, scale, seed, lam=lam, **kwargs)

    @classmethod
    def banded_inverse(cls, coeffs: Sequence[float], dim: int, scale: float = 1.0, seed: int = 0,
                       **kwargs) -> "NoiseStreamConfig":
        return cls("banded_inverse", dim, scale, seed, coeffs=tuple(coeffs), **kwargs)

    @property
    def correlation_coeffs(self) -> np.ndarray:
        """
        leading coefficients of C^-1's first column
        :rtype: numpy.ndarray
        """
        if self.mode == "independent":
            return np.array([1.0])
        if self.mode == "lambda_cancel":
            return np.array([1.0, -self.lam])
        return np.array(self.coeffs)

    @property
    def bandwidth(self) -> int:
        return len(self.correlation_coeffs)

    def correlation_matrix(self, n: int) -> LttMatrix:
        """
        dense-able LTT form of C^-1 truncated to n steps
        :param n: number of steps
        :type n: int
        :rtype: LttMatrix
        """
        coeffs = self.correlation_coeffs
        first_col = np.zeros(n)
        first_col[:min(n, len(coeffs))] = coeffs[:n]
        return LttMatrix(first_col)

    def with_seed(self, seed: int) -> "NoiseStreamConfig":
        return NoiseStreamConfig(self.mode, self.dim, self.scale, seed, self.lam, self.coeffs,
                                 self.horizon, self.column_scales)

    def to_dict(self) -> dict:
        ret = {"mode": self.mode, "dim": self.dim, "scale": self.scale, "seed": self.seed}
        if self.lam is not None:
            ret["lam"] = self.lam
        if self.coeffs is not None:
            ret["coeffs"] = list(self.coeffs)
        if self.horizon is not None:
            ret["horizon"] = self.horizon
        if self.column_scales is not None:
            ret["column_scales"] = list(self.column_scales)
        return ret

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseStreamConfig":
        try:
            return cls(
                mode=data["mode"],
                dim=int(data["dim"]),
                scale=float(data.get("scale", 1.0)),
                seed=int(data.get("seed", 0)),
                lam=data.get("lam"),
                coeffs=tuple(data["coeffs"]) if data.get("coeffs") is not None else None,
                horizon=data.get("horizon"),
                column_scales=tuple(data["column_scales"]) if data.get("column_scales") is not None else None,
            )
        except KeyError as err:
            raise StreamError("noise config is missing field {}".format(err))


@dataclass(frozen=True)
class DrawAccounting:
    fresh_blocks: int
    regenerated_blocks: int

    def to_dict(self) -> dict:
        return {"fresh_blocks": self.fresh_blocks, "regenerated_blocks": self.regenerated_blocks}


class NoiseStream(object):

    def __init__(self, config: NoiseStreamConfig):
        """
        Zero-buffer correlated noise producer. Holds at most p - 1 saved generator states and no past
        noise vectors. Single owner: concurrent calls from another thread raise StreamError
        :param config: stream description
        :type config: NoiseStreamConfig
        """
        self.config = config
        self.step = 0
        self.fresh_blocks = 0
        self.regenerated_blocks = 0

        self.__coeffs = config.correlation_coeffs
        self.__state = PrngState(config.seed, 0)
        self.__saved = deque(maxlen=max(len(self.__coeffs) - 1, 0))
        self.__lock = threading.Lock()

    def __stream_lock(timeout: float = 1):
        """
        stream ownership decorator
        :param timeout: seconds to wait for another caller to finish
        :type timeout: float
        :return:
        """

        def aop(func):
            @wraps(func)
            def wrapper(self, *args, **kwargs):
                if not self.__lock.acquire(timeout=timeout):
                    raise StreamError("noise stream is in use by another thread")
                try:
                    return func(self, *args, **kwargs)
                finally:
                    self.__lock.release()

            return wrapper

        return aop

    @property
    def saved_states(self) -> Tuple[PrngState, ...]:
        """
        generator states of the most recent blocks, oldest first
        :rtype: tuple
        """
        return tuple(self.__saved)

    @property
    def exhausted(self) -> bool:
        return self.config.horizon is not None and self.step >= self.config.horizon

    @__stream_lock(1)
    def next_noise(self) -> np.ndarray:
        """
        emit the next correlated noise row
        :return: scale * sum_s coeffs[s] * Z_{i-s}
        :rtype: numpy.ndarray
        """
        if self.exhausted:
            raise StreamError("noise stream exhausted after {} steps".format(self.step))

        d = self.config.dim
        fresh_state = self.__state

        # generate fresh noise
        fresh, self.__state = gaussian_block(fresh_state, d)
        self.fresh_blocks += 1
        acc = self.__coeffs[0] * fresh

        # regenerate previous noise, most recent first
        for s, state in enumerate(reversed(self.__saved), start=1):
            past, _ = gaussian_block(state, d)
            acc += self.__coeffs[s] * past
            self.regenerated_blocks += 1

        if self.__saved.maxlen:
            self.__saved.append(fresh_state)

        if self.config.column_scales is not None:
            acc = self.config.column_scales[self.step] * acc
        self.step += 1

        return self.config.scale * acc

    def take(self, n: int) -> np.ndarray:
        """
        stack the next n rows
        :param n: number of rows
        :type n: int
        :rtype: numpy.ndarray
        """
        return np.stack([self.next_noise() for _ in range(n)]) if n else np.empty((0, self.config.dim))

    def __iter__(self):
        while not self.exhausted:
            yield self.next_noise()


def replay_blocks(seed: int, d: int, n: int) -> np.ndarray:
    """
    raw fresh Gaussian blocks Z_1..Z_n of a seed, stacked as rows
    :param seed: 64-bit seed
    :type seed: int
    :param d: block dimension
    :type d: int
    :param n: number of blocks
    :type n: int
    :rtype: numpy.ndarray
    """
    z = np.empty((n, d))
    state = PrngState(seed, 0)
    for i in range(n):
        z[i], state = gaussian_block(state, d)
    return z


def buffered_reference(config: NoiseStreamConfig, n: int, max_elements: int = DEFAULT_MAX_ELEMENTS) -> np.ndarray:
    """
    Buffered comparator of NoiseStream: stores every block and correlates them offline.
    Bit-identical to n calls of next_noise with the same config
    :param config: stream description
    :type config: NoiseStreamConfig
    :param n: number of rows
    :type n: int
    :param max_elements: memory budget in float64 elements
    :type max_elements: int
    :return: n x d matrix
    :rtype: numpy.ndarray
    """
    if n * config.dim > max_elements:
        raise StreamError("buffer of {}x{} exceeds the budget of {} elements".format(n, config.dim, max_elements))
    if config.horizon is not None and n > config.horizon:
        raise StreamError("{} rows requested past the horizon of {}".format(n, config.horizon))
    if config.column_scales is not None and n > len(config.column_scales):
        raise StreamError("{} rows requested but only {} column scales given".format(n, len(config.column_scales)))

    coeffs = config.correlation_coeffs
    z = replay_blocks(config.seed, config.dim, n)
    out = np.empty_like(z)
    for i in range(n):
        acc = coeffs[0] * z[i]
        for s in range(1, min(len(coeffs), i + 1)):
            acc += coeffs[s] * z[i - s]
        if config.column_scales is not None:
            acc = config.column_scales[i] * acc
        out[i] = config.scale * acc

    return out


def dense_correlation_oracle(config: NoiseStreamConfig, n: int) -> np.ndarray:
    """
    scale * diag(column_scales) * C^-1 * Z through a dense matrix product
    :rtype: numpy.ndarray
    """
    z = replay_blocks(config.seed, config.dim, n)
    out = config.correlation_matrix(n).to_dense() @ z
    if config.column_scales is not None:
        out = np.asarray(config.column_scales[:n])[:, None] * out
    return config.scale * out


def draw_accounting(stream: NoiseStream) -> DrawAccounting:
    return DrawAccounting(stream.fresh_blocks, stream.regenerated_blocks)


def expected_regenerations(n: int, p: int) -> int:
    """
    sum over i = 1..n of min(p - 1, i - 1)
    :rtype: int
    """
    return sum(min(p - 1, i - 1) for i in range(1, n + 1))


def empirical_variance(config: NoiseStreamConfig, n: int, trials: int = 1) -> dict:
    """
    Monte-Carlo variances of a stream, pooling every coordinate of every trial (trial t uses seed + t)
    :param config: stream description, normally with unit scale
    :type config: NoiseStreamConfig
    :param n: number of steps
    :type n: int
    :param trials: number of independent seeds
    :type trials: int
    :return: {"step_variance": per-step variances (length n), "cumulative_variance": variance of the n-step sum}
    :rtype: dict
    """
    rows = [buffered_reference(config.with_seed(config.seed + t), n) for t in range(trials)]
    samples = np.concatenate(rows, axis=1)
    return {
        "step_variance": samples.var(axis=1),
        "cumulative_variance": float(samples.sum(axis=0).var()),
    }


@dataclass(frozen=True)
class BenchResult:
    mode: str
    p: int
    d: int
    ns_per_step: float
    fresh: int
    regenerated: int

    def to_row(self) -> list:
        return [self.mode, self.p, self.d, "{:.1f}".format(self.ns_per_step), self.fresh, self.regenerated]


BENCH_HEADER = ["mode", "p", "d", "ns_per_step", "fresh", "regenerated"]


def bench_config(mode: str, d: int, p: int = 2, seed: int = 0, lam: float = 0.9) -> NoiseStreamConfig:
    """
    stream used by the benchmark; banded mode takes coefficients (-1/2)^s for s < p
    """
    if mode == "independent":
        return NoiseStreamConfig.independent(d, seed=seed)
    if mode == "lambda_cancel":
        return NoiseStreamConfig.lambda_cancel(lam, d, seed=seed)
    return NoiseStreamConfig.banded_inverse([(-0.5) ** s for s in range(p)], d, seed=seed)


def bench_stream(config: NoiseStreamConfig, steps: int) -> BenchResult:
    """
    time a stream over a number of steps
    :param config: stream description
    :type config: NoiseStreamConfig
    :param steps: number of next_noise calls
    :type steps: int
    :rtype: BenchResult
    """
    stream = NoiseStream(config)
    t0 = time.perf_counter_ns()
    for _ in range(steps):
        stream.next_noise()
    elapsed = time.perf_counter_ns() - t0
    logger.debug("bench %s p=%d d=%d: %d ns", config.mode, config.bandwidth, config.dim, elapsed)

    acc = draw_accounting(stream)
    return BenchResult(config.mode, config.bandwidth, config.dim, elapsed / max(steps, 1),
                       acc.fresh_blocks, acc.regenerated_blocks)


def emit_test_vectors(config: NoiseStreamConfig, steps: int) -> dict:
    """
    serialize the first steps of a stream for cross-implementation checks
    :rtype: dict
    """
    outputs = NoiseStream(config).take(steps)
    ret = {"schema_version": TEST_VECTOR_SCHEMA, "steps": steps, "d": config.dim}
    ret.update(config.to_dict())
    ret["outputs"] = outputs.tolist()
    return ret


def check_test_vectors(payload: dict) -> bool:
    """
    replay a test-vector payload and compare bit-exactly
    :rtype: bool
    """
    data = dict(payload)
    data.setdefault("dim", data.get("d"))
    config = NoiseStreamConfig.from_dict(data)
    expected = np.asarray(payload["outputs"], dtype=np.float64).reshape(int(payload["steps"]), config.dim)
    got = NoiseStream(config).take(int(payload["steps"]))
    return bool(np.array_equal(expected, got))


def load_test_vectors(path: str) -> List[dict]:
    """
    read a test-vector file holding one payload or a list of payloads
    :rtype: list
    """
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    return data if isinstance(data, list) else [data]
