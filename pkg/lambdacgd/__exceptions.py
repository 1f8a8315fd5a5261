#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: __exceptions
# Created on: 2026/10/19


class LambdaCGDError(Exception):
    """
    Base class of every domain error raised by lambdacgd
    """


class MatrixError(LambdaCGDError, ValueError):
    """
    Raised for singular strategies, zero columns, dimension mismatch, non-finite entries or lambda out of [0, 1)
    """


class SchemaError(LambdaCGDError, ValueError):
    """
    Raised for invalid participation schemas and patterns
    """


class SensitivityError(LambdaCGDError, ValueError):
    """
    Raised when a sensitivity routine cannot be applied to the given matrix
    """


class PrngError(LambdaCGDError, OverflowError):
    """
    Raised when a generator counter would overflow its 128-bit range
    """


class StreamError(LambdaCGDError):
    """
    Raised for exhausted, busy or over-budget noise streams
    """


class CalibrationError(LambdaCGDError, ValueError):
    """
    Raised for malformed privacy budgets or failed noise calibration
    """


class AmplificationNotImplemented(LambdaCGDError, NotImplementedError):
    """
    Raised by the Balls-in-Bins accountant extension point
    """


class ConfigError(LambdaCGDError, ValueError):
    """
    Raised for invalid training configurations
    """


class TrainingDivergedError(LambdaCGDError, FloatingPointError):

    def __init__(self, step: int, message: str = None):
        """
        Raised when a task gradient becomes non-finite
        :param step: 1-based iteration index at which the run diverged
        :type step: int
        :param message: optional detail
        :type message: str
        """
        self.step = step
        if message is None:
            message = "non-finite gradient at step {}".format(step)
        super(TrainingDivergedError, self).__init__(message)
