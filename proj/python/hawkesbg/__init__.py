"""Hawkes processes with a smooth time-varying background."""

import json

from ._hawkesbg import (
    ConfigError,
    ConvergenceError,
    DomainError,
    NumericalError,
    ParseError,
    basis_count,
    basis_values,
    extract_movements,
    gof,
    ks_uniform,
    log_likelihood,
    simulate,
)
from . import _hawkesbg

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "NumericalError",
    "ParseError",
    "basis_count",
    "basis_values",
    "extract_movements",
    "fit",
    "gof",
    "ks_uniform",
    "log_likelihood",
    "simulate",
]


def fit(times, start, end, model="bcb", order=1, k=50, fixed_V=None):
    """Fit one model; returns the fit document as a dict."""
    return json.loads(_hawkesbg.fit_json(list(times), start, end, model, order, k, fixed_V))
