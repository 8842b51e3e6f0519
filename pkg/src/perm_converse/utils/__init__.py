"""Shared helpers: errors, log-base conversion, normal quantile, integer sweeps, float formatting."""

from __future__ import annotations

import math
from typing import List

import numpy as np
from scipy.stats import norm

LN2 = math.log(2.0)


class PermConverseError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PermConverseError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericDomainError(PermConverseError, ArithmeticError):
    """A well-posed computation has no finite answer at these parameters."""


def nats_to_bits(x):
    return x / LN2


def norm_ppf(p: float) -> float:
    """Inverse of the standard normal CDF. Raises DomainError outside (0, 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"normal quantile needs 0 < p < 1, got {p!r}")
    return float(norm.ppf(p))


def log_spaced_ints(n_min: int, n_max: int, points: int) -> List[int]:
    """Log-spaced integers in [n_min, n_max], rounded and deduplicated (ascending)."""
    if n_min < 1 or n_max < n_min:
        raise DomainError(f"need 1 <= n_min <= n_max, got {n_min}, {n_max}")
    if points < 2:
        raise DomainError(f"need at least 2 points, got {points}")
    raw = np.logspace(math.log10(n_min), math.log10(n_max), points)
    values = sorted({int(round(v)) for v in raw})
    # rounding may push the ends out by one ulp of the log
    values[0] = max(values[0], n_min)
    values[-1] = min(values[-1], n_max)
    return sorted(set(values))


def make_rng(seed) -> np.random.Generator:
    """Counter-based (Philox) generator; `seed` may be an int or a SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


def fmt_float(x: float) -> str:
    """Full precision (17 significant digits) for data files."""
    return format(float(x), ".17g")
