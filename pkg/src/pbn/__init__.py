"""Projected belief networks: tractable-likelihood two-directional networks.

Subpackages cover the exponential-family scalar engine, single-layer
saddle-point machinery, multi-layer networks, discriminative-alignment
training, GMM-emission HMMs, audio feature extraction, and the experiment
harness with its CLI.
"""

from . import errors
from .expfam import (
    EXPONENTIAL,
    GAUSSIAN,
    TRUNC_EXPONENTIAL,
    TRUNC_GAUSSIAN,
    DomainKind,
    ExpFamilySpec,
    Family,
)

__all__ = [
    "errors",
    "ExpFamilySpec",
    "Family",
    "DomainKind",
    "GAUSSIAN",
    "TRUNC_GAUSSIAN",
    "EXPONENTIAL",
    "TRUNC_EXPONENTIAL",
]

__version__ = "0.1.0"
