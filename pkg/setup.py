#!/usr/bin/python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: setup
# Created on: 2026/10/19

import setuptools

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setuptools.setup(
    name="lambdacgd",
    version="0.1.0",
    author="I2cy Cloud",
    author_email="i2cy@outlook.com",
    description="A Python toolkit for DP-lambdaCGD: lambda-cancelled correlated Gaussian noise for private"
                " multi-epoch training, with sensitivity, error-metric and calibration routines.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    install_requires=[
        'numpy>=1.22',
        'scipy>=1.8'
    ],
    extras_require={
        'tests': ['pytest>=7']
    },
    packages=setuptools.find_packages(exclude=["examples", "examples.*"]),
    python_requires=">=3.8",
    entry_points={'console_scripts':
                      ['lambdacgd=lambdacgd.cli:main']
                  }
)
