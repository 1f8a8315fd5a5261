#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: privacy
# Created on: 2026/10/19

"""
Unamplified noise calibration: sigma = sens * sigma(eps, delta), where sigma(eps, delta) is the smallest
multiplier of the analytic Gaussian mechanism with unit sensitivity.
"""

import logging
import math
from dataclasses import dataclass

from scipy.optimize import bisect
from scipy.special import ndtr

from .__exceptions import CalibrationError, AmplificationNotImplemented
from .__matrix import AnyLowerTri
from .sensitivity import ParticipationSchema, sensitivity

logger = logging.getLogger(__name__)

DEFAULT_DELTA: float = 1e-5
SIGMA_XTOL: float = 1e-9
BRACKET_LIMIT: int = 200


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise CalibrationError("epsilon must be a finite positive number, got {}".format(self.epsilon))
        if not 0 < self.delta < 1:
            raise CalibrationError("delta must lie in (0, 1), got {}".format(self.delta))

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "delta": self.delta}


@dataclass(frozen=True)
class NoiseScale:
    sigma_multiplier: float
    sens: float
    total: float

    def to_dict(self) -> dict:
        return {"sigma_multiplier": self.sigma_multiplier, "sens": self.sens, "total": self.total}


def delta_for_sigma(sigma: float, epsilon: float) -> float:
    """
    Tight delta of the unit-sensitivity Gaussian mechanism with noise multiplier sigma
    :param sigma: noise multiplier, positive
    :type sigma: float
    :param epsilon: privacy parameter
    :type epsilon: float
    :return: Phi(1/(2 sigma) - eps sigma) - e^eps Phi(-1/(2 sigma) - eps sigma)
    :rtype: float
    """
    a = 1.0 / (2.0 * sigma)
    b = epsilon * sigma
    return float(ndtr(a - b) - math.exp(epsilon) * ndtr(-a - b))


def gaussian_multiplier(budget: PrivacyBudget, xtol: float = SIGMA_XTOL) -> float:
    """
    Smallest sigma (to xtol) whose unit-sensitivity Gaussian mechanism is (eps, delta)-DP
    :param budget: privacy target
    :type budget: PrivacyBudget
    :param xtol: absolute tolerance on sigma
    :type xtol: float
    :return: sigma_{eps, delta}
    :rtype: float
    """
    eps, delta = budget.epsilon, budget.delta

    def excess(sigma: float) -> float:
        return delta_for_sigma(sigma, eps) - delta

    # delta_for_sigma decreases in sigma, expand until excess(lo) > 0 >= excess(hi)
    lo, hi = 1.0, 1.0
    for _ in range(BRACKET_LIMIT):
        if excess(hi) <= 0:
            break
        lo, hi = hi, hi * 2.0
    else:
        raise CalibrationError("no upper bracket for sigma at {}".format(budget))
    for _ in range(BRACKET_LIMIT):
        if excess(lo) > 0:
            break
        hi, lo = lo, lo / 2.0
    else:
        raise CalibrationError("no lower bracket for sigma at {}".format(budget))

    logger.debug("sigma bracket for %s: [%g, %g]", budget, lo, hi)
    sigma = bisect(excess, lo, hi, xtol=xtol)
    # keep the returned multiplier on the private side of the root
    while excess(sigma) > 0:
        sigma += xtol

    return float(sigma)


def classical_multiplier(budget: PrivacyBudget) -> float:
    """
    sqrt(2 ln(1.25 / delta)) / eps, an upper bound on gaussian_multiplier for eps <= 1
    :rtype: float
    """
    return math.sqrt(2.0 * math.log(1.25 / budget.delta)) / budget.epsilon


def calibrate(strategy: AnyLowerTri, schema: ParticipationSchema, budget: PrivacyBudget,
              leftmost_optimal: bool = False) -> NoiseScale:
    """
    Noise scale of the unamplified mechanism for a strategy
    :param strategy: strategy matrix C
    :type strategy: :obj:`LttMatrix`, :obj:`LowerTriMatrix`
    :param schema: participation schema
    :type schema: ParticipationSchema
    :param budget: privacy target
    :type budget: PrivacyBudget
    :param leftmost_optimal: forward to the sensitivity dispatcher
    :type leftmost_optimal: bool
    :return: (sigma_multiplier, sens, sens * sigma_multiplier)
    :rtype: NoiseScale
    """
    sens = sensitivity(strategy, schema, leftmost_optimal=leftmost_optimal)
    multiplier = gaussian_multiplier(budget)
    return NoiseScale(multiplier, sens, sens * multiplier)


def amplified_multiplier_stub(budget: PrivacyBudget, strategy: AnyLowerTri = None, k: int = None) -> float:
    """
    Extension point for the Balls-in-Bins amplified accountant; always raises
    :raises AmplificationNotImplemented:
    """
    raise AmplificationNotImplemented(
        "not implemented: Balls-in-Bins Monte-Carlo accountant out of scope (amplified_multiplier_stub)")
