"""Soft-edge rescaling of the largest eigenvalue."""

from __future__ import annotations

import math

import numpy as np

from ..errors import NoSoftEdge, ValidationError
from .equilibrium import EquilibriumMeasure


def edge_rescale(x_max, n: int, eq: EquilibriumMeasure):
    """s = (x_max - E) N^(2/3) (pi c)^(2/3) for a density ~ c sqrt(E - x) at the edge E."""
    c = eq.edge_coefficient
    if c is None or not c > 0.0:
        raise NoSoftEdge(f"{eq.name} has no square-root right edge")
    if n < 1:
        raise ValidationError("N must be >= 1")
    scale = n ** (2.0 / 3.0) * (math.pi * c) ** (2.0 / 3.0)
    out = (np.asarray(x_max, dtype=float) - eq.right_edge) * scale
    return float(out) if np.ndim(out) == 0 else out
