"""Empirical distribution functions and the Kolmogorov-Smirnov distance."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import ValidationError


class EmpiricalCDF:
    """Right-continuous empirical cdf F(x) = #{samples <= x} / n."""

    __slots__ = ("sorted_samples",)

    def __init__(self, samples):
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if x.size == 0:
            raise ValidationError("EmpiricalCDF needs at least one sample")
        if not np.all(np.isfinite(x)):
            raise ValidationError("samples must be finite")
        x.setflags(write=False)
        self.sorted_samples = x

    @property
    def n(self) -> int:
        return self.sorted_samples.size

    def __call__(self, x):
        out = np.searchsorted(self.sorted_samples, x, side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out


def ks_distance(samples, target_cdf: Callable) -> float:
    """sup_x |F_n(x) - F(x)|, evaluated exactly at the jump points.

    ``samples`` may be an :class:`EmpiricalCDF` or any array of reals;
    ``target_cdf`` must accept a vector.
    """
    ecdf = samples if isinstance(samples, EmpiricalCDF) else EmpiricalCDF(samples)
    x = ecdf.sorted_samples
    n = x.size
    f = np.asarray(target_cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    upper = np.max(i / n - f)
    lower = np.max(f - (i - 1) / n)
    return float(min(1.0, max(upper, lower, 0.0)))


def ks_two_sample(x, y) -> float:
    """Two-sample KS statistic sup |F_x - F_y|."""
    fx, fy = EmpiricalCDF(x), EmpiricalCDF(y)
    grid = np.concatenate((fx.sorted_samples, fy.sorted_samples))
    return float(np.max(np.abs(fx(grid) - fy(grid))))
