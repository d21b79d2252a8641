#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# setup.py
from setuptools import setup, find_packages

setup(
    name="kirchhoff_centrality",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    py_modules=["main"],
    install_requires=[
        'numpy>=1.26.0',
        'scipy>=1.11.0',
        'networkx>=3.2',
        'pandas>=2.1.3',
        'python-dotenv>=1.0.0',
        'configparser>=6.0.0',
    ],
    extras_require={
        'test': [
            'pytest>=7.4.3',
            'pytest-cov>=4.1.0',
        ],
    },
    entry_points={
        'console_scripts': [
            'kcent=main:main',
        ],
    },
    description="theta-Kirchhoff edge and vertex centrality with exact and randomized estimators",
    long_description=open('README.md').read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3.12",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.10',
)
