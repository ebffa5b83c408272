#!/usr/bin/env python
# -*- coding: utf-8 -*-

from setuptools import setup
import glob
import os

with open("README.rst") as readme_file:
    readme = readme_file.read()

with open("HISTORY.rst") as history_file:
    history = history_file.read()

requirements = [
    "numpy>=1.17",
    "scipy",
    "astropy",
]

test_requirements = [
    "pytest",
]

# Treat everything in scripts except README.rst as a script to be installed
scripts = [
    fname
    for fname in glob.glob(os.path.join("scripts", "*"))
    if os.path.basename(fname) != "README.rst"
]

setup(
    name="fcs_qkd",
    version="0.3.0",
    description="Finite-key bounds and simulation for finite-correlation-secure QKD",
    long_description=readme + "\n\n" + history,
    author="FCS-QKD developers",
    author_email="fcs-qkd@users.noreply.github.com",
    packages=["fcs_qkd"],
    package_dir={"fcs_qkd": "fcs_qkd"},
    package_data={"fcs_qkd": ["data/*.cfg"]},
    include_package_data=True,
    install_requires=requirements,
    python_requires=">=3.9",
    scripts=scripts,
    license="MIT license",
    zip_safe=False,
    keywords="qkd finite-key concentration-inequalities",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Natural Language :: English",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    test_suite="tests",
    tests_require=test_requirements,
)
