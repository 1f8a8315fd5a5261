#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: __prng
# Created on: 2026/10/19

"""
Counter-based Gaussian blocks on top of numpy's Philox4x64-10 bit generator.

A state is (64-bit seed, 128-bit counter). Every Gaussian block owns a fixed window of
BLOCK_STRIDE Philox counter values, so the block at step i starts at counter i * BLOCK_STRIDE and
can be regenerated from its state alone, whatever the block dimension or the number of words the
normal transform consumed. Not cryptographically secure.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .__exceptions import PrngError

SEED_LIMIT: int = 1 << 64
COUNTER_LIMIT: int = 1 << 128
BLOCK_STRIDE: int = 1 << 64


@dataclass(frozen=True)
class PrngState:
    seed: int
    counter: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < SEED_LIMIT:
            raise PrngError("seed must be a 64-bit unsigned integer, got {}".format(self.seed))
        if not 0 <= self.counter < COUNTER_LIMIT:
            raise PrngError("counter must be a 128-bit unsigned integer, got {}".format(self.counter))

    @classmethod
    def for_block(cls, seed: int, index: int) -> "PrngState":
        """
        State that generates the index-th block (0-based) of a seed's sequence
        :param seed: 64-bit seed
        :type seed: int
        :param index: block index
        :type index: int
        :return: state with counter index * BLOCK_STRIDE
        :rtype: PrngState
        """
        return cls(seed, index * BLOCK_STRIDE)

    @property
    def block_index(self) -> int:
        return self.counter // BLOCK_STRIDE

    def copy(self) -> "PrngState":
        return PrngState(self.seed, self.counter)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "counter": self.counter}


def gaussian_block(state: PrngState, d: int) -> Tuple[np.ndarray, PrngState]:
    """
    Draw d standard normals addressed by (seed, counter)
    :param state: generator state of the block
    :type state: PrngState
    :param d: block dimension
    :type d: int
    :return: (vector of d standard normals, state of the next block)
    :rtype: (numpy.ndarray, PrngState)
    """
    if d < 1:
        raise PrngError("block dimension must be positive, got {}".format(d))
    if state.counter + BLOCK_STRIDE >= COUNTER_LIMIT:
        raise PrngError("counter {} would overflow the 128-bit range".format(state.counter))

    generator = np.random.Generator(np.random.Philox(key=state.seed, counter=state.counter))
    block = generator.standard_normal(d)

    return block, PrngState(state.seed, state.counter + BLOCK_STRIDE)
