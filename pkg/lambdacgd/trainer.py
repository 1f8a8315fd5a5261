#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: trainer
# Created on: 2026/10/19

"""
Desk-scale DP-lambdaCGD: per-example clipping, lambda-cancelled correlated noise from a zero-buffer
NoiseStream, and a trace that lets every step be replayed.
"""

import dataclasses
import json
import logging
import warnings
from dataclasses import dataclass, field
from hashlib import sha256
from typing import List, Optional, Tuple

import numpy as np

from .__exceptions import ConfigError, TrainingDivergedError, LambdaCGDError
from .__matrix import c_lambda_column_norms, check_lambda
from .__tasks import SynthTask, synth_task, TASKS
from .noise import NoiseStream, NoiseStreamConfig, buffered_reference
from .privacy import PrivacyBudget, gaussian_multiplier, amplified_multiplier_stub, DEFAULT_DELTA
from .sensitivity import ParticipationSchema, sens_c_lambda_closed, sens_normalized

logger = logging.getLogger(__name__)

TRACE_SCHEMA = 1
BATCHING_MODES = ("balls_in_bins", "sequential")
AMPLIFICATION_MODES = ("none", "bnb")
THETA0_MODES = ("zeros", "gaussian")


def clip(g: np.ndarray, zeta: float) -> np.ndarray:
    """
    per-example clipping, min(1, zeta / ||g||) * g
    :param g: gradient vector
    :type g: numpy.ndarray
    :param zeta: clip norm, positive
    :type zeta: float
    :return: clipped vector, g itself when ||g|| <= zeta
    :rtype: numpy.ndarray
    """
    return clip_rows(np.asarray(g, dtype=np.float64)[None, :], zeta)[0]


def clip_rows(grads: np.ndarray, zeta: float) -> np.ndarray:
    """
    clip every row of a gradient matrix
    :param grads: B x d per-example gradients
    :type grads: numpy.ndarray
    :param zeta: clip norm, positive
    :type zeta: float
    :rtype: numpy.ndarray
    """
    if zeta <= 0:
        raise ConfigError("clip norm must be positive, got {}".format(zeta))
    norms = np.linalg.norm(grads, axis=1)
    over = norms > zeta
    if not over.any():
        return grads
    factors = np.ones_like(norms)
    factors[over] = zeta / norms[over]
    return grads * factors[:, None]


class BatchPlan(object):

    def __init__(self, assignment: np.ndarray, batches_per_epoch: int):
        """
        Balls-in-Bins allocation, reused by every epoch
        :param assignment: batch index (0-based) of every data point
        :type assignment: numpy.ndarray
        :param batches_per_epoch: number of bins m
        :type batches_per_epoch: int
        """
        self.assignment = np.asarray(assignment, dtype=np.int64)
        self.batches_per_epoch = int(batches_per_epoch)

        order = np.argsort(self.assignment, kind="stable")
        bounds = np.searchsorted(self.assignment[order], np.arange(self.batches_per_epoch + 1))
        self.__batches = [order[bounds[j]:bounds[j + 1]] for j in range(self.batches_per_epoch)]

    def __repr__(self):
        return "BatchPlan(size={}, batches_per_epoch={})".format(len(self.assignment), self.batches_per_epoch)

    def batch(self, j: int) -> np.ndarray:
        """
        indices of bin j, ascending
        :rtype: numpy.ndarray
        """
        return self.__batches[j]

    def batch_for_step(self, i: int) -> np.ndarray:
        """
        batch used at 1-based iteration i; steps 1..m traverse bins 0..m-1, repeated every epoch
        :rtype: numpy.ndarray
        """
        return self.__batches[(i - 1) % self.batches_per_epoch]

    def counts(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.batches_per_epoch)


def allocate_balls_in_bins(dataset_size: int, batches_per_epoch: int, rng_seed: int) -> BatchPlan:
    """
    assign each data point to a uniformly random bin, independently
    :param dataset_size: number of data points N
    :type dataset_size: int
    :param batches_per_epoch: number of bins m
    :type batches_per_epoch: int
    :param rng_seed: allocation seed
    :type rng_seed: int
    :rtype: BatchPlan
    """
    if batches_per_epoch < 1:
        raise ConfigError("batches_per_epoch must be positive, got {}".format(batches_per_epoch))
    rng = np.random.default_rng(rng_seed)
    return BatchPlan(rng.integers(0, batches_per_epoch, size=dataset_size), batches_per_epoch)


def sequential_batches(dataset_size: int, batch_size: int, i: int) -> np.ndarray:
    """
    wrap-around slice ((i-1)B + t) mod N for t < B
    :param dataset_size: number of data points N
    :type dataset_size: int
    :param batch_size: B
    :type batch_size: int
    :param i: 1-based iteration
    :type i: int
    :rtype: numpy.ndarray
    """
    if i < 1:
        raise ConfigError("iterations are 1-based, got {}".format(i))
    return ((i - 1) * batch_size + np.arange(batch_size)) % dataset_size


@dataclass(frozen=True)
class TrainConfig:
    task: str = "linreg"
    dim: int = 5
    dataset_size: int = 1024
    batch_size: int = 16
    clip_norm: float = 1.0
    learning_rate: float = 0.01
    lam: float = 0.0
    epochs: int = 1
    iterations: Optional[int] = None
    epsilon: float = 1.0
    delta: float = DEFAULT_DELTA
    batching: str = "balls_in_bins"
    amplification: str = "none"
    seed: int = 0
    data_seed: Optional[int] = None
    label_noise: float = 0.1
    theta0: str = "zeros"
    theta0_std: float = 1.0
    sigma_override: Optional[float] = None
    normalize_columns: bool = False
    warnings_enabled: bool = True

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError("unknown task '{}'".format(self.task))
        if self.batching not in BATCHING_MODES:
            raise ConfigError("unknown batching '{}', expecting one of {}".format(self.batching, BATCHING_MODES))
        if self.amplification not in AMPLIFICATION_MODES:
            raise ConfigError("unknown amplification '{}', expecting one of {}".format(
                self.amplification, AMPLIFICATION_MODES))
        if self.theta0 not in THETA0_MODES:
            raise ConfigError("unknown theta0 '{}', expecting one of {}".format(self.theta0, THETA0_MODES))
        if self.dim < 1 or self.dataset_size < 1 or self.epochs < 1:
            raise ConfigError("dim, dataset_size and epochs must be positive")
        if not 1 <= self.batch_size <= self.dataset_size:
            raise ConfigError("batch size {} must lie in [1, {}]".format(self.batch_size, self.dataset_size))
        if self.dataset_size % self.batch_size:
            raise ConfigError("dataset size {} is not divisible by batch size {}".format(
                self.dataset_size, self.batch_size))
        if self.clip_norm <= 0 or self.learning_rate <= 0:
            raise ConfigError("clip_norm and learning_rate must be positive")
        if self.sigma_override is not None and self.sigma_override < 0:
            raise ConfigError("sigma_override must be non-negative")
        try:
            check_lambda(self.lam)
        except LambdaCGDError as err:
            raise ConfigError(str(err))

        expected = self.epochs * self.batches_per_epoch
        if self.iterations is None:
            object.__setattr__(self, "iterations", expected)
        elif self.iterations != expected:
            raise ConfigError("iterations {} != epochs {} * batches per epoch {}".format(
                self.iterations, self.epochs, self.batches_per_epoch))

    @property
    def batches_per_epoch(self) -> int:
        return self.dataset_size // self.batch_size

    @property
    def budget(self) -> PrivacyBudget:
        return PrivacyBudget(self.epsilon, self.delta)

    @property
    def schema(self) -> ParticipationSchema:
        return ParticipationSchema(self.iterations, self.epochs, self.batches_per_epoch)

    def with_overrides(self, **fields) -> "TrainConfig":
        """
        copy with some fields replaced, None values are ignored
        :rtype: TrainConfig
        """
        fields = {k: v for k, v in fields.items() if v is not None}
        if "epochs" in fields or "batch_size" in fields or "dataset_size" in fields:
            fields.setdefault("iterations", None)
        try:
            return dataclasses.replace(self, **fields)
        except TypeError as err:
            raise ConfigError(str(err))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        data = dict(data)
        budget = data.pop("budget", None)
        if isinstance(budget, dict):
            data.setdefault("epsilon", budget.get("epsilon"))
            data.setdefault("delta", budget.get("delta", DEFAULT_DELTA))
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError("unknown config fields: {}".format(", ".join(unknown)))
        return cls(**data)

    @classmethod
    def from_json(cls, path: str) -> "TrainConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, ValueError) as err:
            raise ConfigError("cannot read config {}: {}".format(path, err))
        return cls.from_dict(data)


@dataclass
class StepRecord:
    step: int
    batch_size: int
    clipped_sum: np.ndarray
    noise: np.ndarray
    max_clipped_norm: float
    theta_sha256: str

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "batch_size": self.batch_size,
            "clipped_sum": self.clipped_sum.tolist(),
            "noise": self.noise.tolist(),
            "max_clipped_norm": self.max_clipped_norm,
            "theta_sha256": self.theta_sha256,
        }


@dataclass
class TrainTrace:
    config: TrainConfig
    noise_config: NoiseStreamConfig
    theta0: np.ndarray
    records: List[StepRecord] = field(default_factory=list)
    final_theta: Optional[np.ndarray] = None
    final_loss: Optional[float] = None

    def __len__(self):
        return len(self.records)

    def noise_rows(self) -> np.ndarray:
        return np.stack([r.noise for r in self.records])

    def clipped_rows(self) -> np.ndarray:
        return np.stack([r.clipped_sum for r in self.records])

    def to_jsonl(self, path: str):
        """
        write a header line (config, noise stream, theta0), one line per step and a final line
        :param path: output file
        :type path: str
        """
        with open(path, "w", encoding="utf-8") as f:
            header = {
                "schema_version": TRACE_SCHEMA,
                "config": self.config.to_dict(),
                "noise": self.noise_config.to_dict(),
                "theta0": self.theta0.tolist(),
            }
            f.write(json.dumps(header) + "\n")
            for record in self.records:
                f.write(json.dumps(record.to_dict()) + "\n")
            f.write(json.dumps({"final_theta": self.final_theta.tolist(), "final_loss": self.final_loss}) + "\n")

    @classmethod
    def from_jsonl(cls, path: str) -> "TrainTrace":
        with open(path, "r", encoding="utf-8") as f:
            lines = [json.loads(line) for line in f if line.strip()]
        if not lines or lines[0].get("schema_version") != TRACE_SCHEMA:
            raise ConfigError("{} is not a version {} trace".format(path, TRACE_SCHEMA))
        header, body, final = lines[0], lines[1:-1], lines[-1]
        trace = cls(
            config=TrainConfig.from_dict(header["config"]),
            noise_config=NoiseStreamConfig.from_dict(header["noise"]),
            theta0=np.asarray(header["theta0"], dtype=np.float64),
        )
        for r in body:
            trace.records.append(StepRecord(
                r["step"], r["batch_size"], np.asarray(r["clipped_sum"], dtype=np.float64),
                np.asarray(r["noise"], dtype=np.float64), r["max_clipped_norm"], r["theta_sha256"]))
        trace.final_theta = np.asarray(final["final_theta"], dtype=np.float64)
        trace.final_loss = final["final_loss"]
        return trace


def theta_hash(theta: np.ndarray) -> str:
    return sha256(np.ascontiguousarray(theta, dtype=np.float64).tobytes()).hexdigest()


def initial_theta(config: TrainConfig) -> np.ndarray:
    if config.theta0 == "zeros":
        return np.zeros(config.dim)
    return config.theta0_std * np.random.default_rng([config.seed, 2]).standard_normal(config.dim)


def noise_multiplier(config: TrainConfig) -> float:
    """
    sigma_{eps, delta} of the run, or the override used by tests
    :rtype: float
    """
    if config.amplification == "bnb":
        return amplified_multiplier_stub(config.budget, k=config.epochs)
    if config.sigma_override is not None:
        return float(config.sigma_override)
    return gaussian_multiplier(config.budget)


def noise_config_for(config: TrainConfig) -> NoiseStreamConfig:
    """
    noise stream of a run: scale zeta * sens * sigma, lambda-cancel correlation, optional column normalization
    :rtype: NoiseStreamConfig
    """
    sigma = noise_multiplier(config)
    n, k, b = config.iterations, config.epochs, config.batches_per_epoch
    if config.normalize_columns:
        sens = sens_normalized(n, k, b, config.lam)
        scales = tuple(c_lambda_column_norms(n, config.lam).d)
    else:
        sens = sens_c_lambda_closed(n, k, b, config.lam)
        scales = None
    scale = config.clip_norm * sens * sigma
    logger.info("noise scale %.6g (sens %.6g, sigma %.6g, lambda %g)", scale, sens, sigma, config.lam)

    return NoiseStreamConfig.lambda_cancel(config.lam, config.dim, scale=scale, seed=config.seed,
                                           horizon=n, column_scales=scales)


def build_task(config: TrainConfig) -> SynthTask:
    data_seed = config.seed if config.data_seed is None else config.data_seed
    return synth_task(config.task, config.dim, config.dataset_size, data_seed, label_noise=config.label_noise)


def train(config: TrainConfig, task: SynthTask = None) -> Tuple[np.ndarray, TrainTrace]:
    """
    Run DP-lambdaCGD
    :param config: run configuration
    :type config: TrainConfig
    :param task: dataset to train on, generated from the config when None
    :type task: SynthTask
    :return: (theta_n, trace)
    :rtype: (numpy.ndarray, TrainTrace)
    """
    noise_config = noise_config_for(config)
    if task is None:
        task = build_task(config)
    if task.size != config.dataset_size or task.dim != config.dim:
        raise ConfigError("task shape {}x{} does not match the config".format(task.size, task.dim))

    plan = None
    if config.batching == "balls_in_bins":
        plan = allocate_balls_in_bins(config.dataset_size, config.batches_per_epoch, [config.seed, 1])

    theta = initial_theta(config)
    trace = TrainTrace(config, noise_config, theta.copy())
    stream = NoiseStream(noise_config)
    eta, batch_size, zeta = config.learning_rate, config.batch_size, config.clip_norm
    logger.info("training %s: n=%d k=%d B=%d lambda=%g", config.task, config.iterations, config.epochs,
                batch_size, config.lam)

    for i in range(1, config.iterations + 1):
        if plan is not None:
            idx = plan.batch_for_step(i)
            if not len(idx) and config.warnings_enabled:
                warnings.warn("batch {} is empty at step {}, only noise is applied".format(
                    (i - 1) % plan.batches_per_epoch, i))
        else:
            idx = sequential_batches(config.dataset_size, batch_size, i)

        # aggregate clipped gradients
        grads = task.per_example_grads(theta, idx)
        if not np.all(np.isfinite(grads)):
            raise TrainingDivergedError(i)
        clipped = clip_rows(grads, zeta)
        x = clipped.sum(axis=0) if len(idx) else np.zeros(config.dim)
        max_norm = float(np.linalg.norm(clipped, axis=1).max()) if len(idx) else 0.0

        # correlated noise, regenerated and fresh
        nu = stream.next_noise()

        # model update
        theta = theta - (eta / batch_size) * (x + nu)
        trace.records.append(StepRecord(i, len(idx), x, nu, max_norm, theta_hash(theta)))
        logger.debug("step %d: |x|=%.4g |nu|=%.4g", i, np.linalg.norm(x), np.linalg.norm(nu))

    trace.final_theta = theta
    trace.final_loss = task.loss(theta)
    logger.info("final loss %.6g", trace.final_loss)

    return theta, trace


def reconstruct_theta(trace: TrainTrace) -> np.ndarray:
    """
    replay theta_n from theta_0, the recorded clipped sums and freshly regenerated noise
    :param trace: trace of a finished run
    :type trace: TrainTrace
    :rtype: numpy.ndarray
    """
    config = trace.config
    noise = buffered_reference(trace.noise_config, len(trace.records))
    eta, batch_size = config.learning_rate, config.batch_size

    theta = trace.theta0.copy()
    for record, nu in zip(trace.records, noise):
        theta = theta - (eta / batch_size) * (record.clipped_sum + nu)
    return theta
