#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: __tasks
# Created on: 2026/10/19

import numpy as np
from scipy.special import expit

from .__exceptions import ConfigError

TASKS = ("linreg", "logreg")


class SynthTask(object):

    def __init__(self, kind: str, features: np.ndarray, labels: np.ndarray, w_star: np.ndarray):
        """
        Synthetic differentiable task with closed-form per-example gradients
        :param kind: "linreg" (squared loss) or "logreg" (logistic loss, labels in {0, 1})
        :type kind: str
        :param features: N x d design matrix
        :type features: numpy.ndarray
        :param labels: N targets
        :type labels: numpy.ndarray
        :param w_star: ground-truth parameter the data was generated from
        :type w_star: numpy.ndarray
        """
        self.kind = kind
        self.X = features
        self.y = labels
        self.w_star = w_star

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def size(self) -> int:
        return self.X.shape[0]

    def __repr__(self):
        return "SynthTask(kind={}, size={}, dim={})".format(self.kind, self.size, self.dim)

    def per_example_loss(self, theta: np.ndarray, idx=None) -> np.ndarray:
        """
        losses of the selected examples
        :param theta: parameters
        :type theta: numpy.ndarray
        :param idx: example indices, all examples when None
        :return: vector of losses
        :rtype: numpy.ndarray
        """
        X, y = self.__select(idx)
        z = X @ theta
        if self.kind == "linreg":
            return 0.5 * (z - y) ** 2
        return np.logaddexp(0.0, z) - y * z

    def per_example_grads(self, theta: np.ndarray, idx=None) -> np.ndarray:
        """
        gradients of the selected examples, one row per example
        :param theta: parameters
        :type theta: numpy.ndarray
        :param idx: example indices, all examples when None
        :return: len(idx) x d matrix
        :rtype: numpy.ndarray
        """
        X, y = self.__select(idx)
        z = X @ theta
        if self.kind == "linreg":
            residual = z - y
        else:
            residual = expit(z) - y
        return residual[:, None] * X

    def loss(self, theta: np.ndarray) -> float:
        return float(np.mean(self.per_example_loss(theta)))

    def grad(self, theta: np.ndarray) -> np.ndarray:
        return self.per_example_grads(theta).mean(axis=0)

    def __select(self, idx):
        if idx is None:
            return self.X, self.y
        return self.X[idx], self.y[idx]


def synth_task(kind: str, d: int, dataset_size: int, seed: int, label_noise: float = 0.1) -> SynthTask:
    """
    Generate a deterministic synthetic dataset
    :param kind: "linreg" or "logreg"
    :type kind: str
    :param d: feature dimension
    :type d: int
    :param dataset_size: number of examples
    :type dataset_size: int
    :param seed: data seed
    :type seed: int
    :param label_noise: standard deviation of the linreg target noise
    :type label_noise: float
    :return: task
    :rtype: SynthTask
    """
    if kind not in TASKS:
        raise ConfigError("unknown task '{}', expecting one of {}".format(kind, TASKS))
    if d < 1 or dataset_size < 1:
        raise ConfigError("task needs d >= 1 and dataset_size >= 1, got d={}, size={}".format(d, dataset_size))

    rng = np.random.default_rng(seed)
    w_star = rng.standard_normal(d) / np.sqrt(d)
    X = rng.standard_normal((dataset_size, d))
    z = X @ w_star

    if kind == "linreg":
        y = z + label_noise * rng.standard_normal(dataset_size)
    else:
        # labels from the w_star separator
        y = (z > 0).astype(np.float64)

    return SynthTask(kind, X, y, w_star)
