"""Implicit QL eigensolver for symmetric tridiagonal matrices.

Eigenvalues alone cost O(N^2).  The quadrature weights (squared first
components of the normalized eigenvectors) are obtained by applying each
Givens rotation to the first row of the eigenvector matrix only, which keeps
the weighted variant O(N^2) as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import ConvergenceFailure, ValidationError
from .tridiag import JacobiCoefficients

MAX_SWEEPS = 50
_EPS = np.finfo(float).eps


@nb.njit(cache=True, nogil=True)
def _tql(d, e, z, with_vectors):
    """In-place implicit QL with Wilkinson-type shifts.

    ``d`` holds the diagonal, ``e[i]`` couples ``i`` and ``i + 1`` (``e[-1]``
    is scratch).  ``z`` is the first row of the eigenvector matrix.  Returns
    the index of a non-converged eigenvalue, or -1.
    """
    n = d.shape[0]
    eps = 2.220446049250313e-16
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                if abs(e[m]) <= eps * (abs(d[m]) + abs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > 50:
                return l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                bb = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * bb
                p = s * r
                d[i + 1] = g + p
                g = c * r - bb
                if with_vectors:
                    f = z[i + 1]
                    z[i + 1] = s * z[i] + c * f
                    z[i] = c * z[i] - s * f
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


@nb.njit(cache=True, nogil=True)
def tridiag_eigvals(a, b):
    """Ascending eigenvalues of the Jacobi matrix with diagonal a, squared off-diagonal b."""
    n = a.shape[0]
    d = a.copy()
    e = np.zeros(n)
    for i in range(n - 1):
        e[i] = math.sqrt(b[i])
    z = np.zeros(1)
    bad = _tql(d, e, z, False)
    if bad >= 0:
        d[:] = np.nan
    d.sort()
    return d


@nb.njit(cache=True, nogil=True)
def tridiag_eig_weights(a, b):
    n = a.shape[0]
    d = a.copy()
    e = np.zeros(n)
    for i in range(n - 1):
        e[i] = math.sqrt(b[i])
    z = np.zeros(n)
    z[0] = 1.0
    bad = _tql(d, e, z, True)
    if bad >= 0:
        d[:] = np.nan
    order = np.argsort(d, kind="mergesort")
    return d[order], z[order] ** 2


@dataclass(frozen=True, eq=False)
class SpectralSample:
    """Ascending eigenvalues, optionally with their quadrature weights."""

    eigenvalues: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        if np.any(np.diff(self.eigenvalues) < 0.0):
            raise ValidationError("eigenvalues must be sorted ascending")
        if self.weights is not None:
            if self.weights.shape != self.eigenvalues.shape:
                raise ValidationError("weights and eigenvalues differ in length")
            if np.any(self.weights <= 0.0) or abs(self.weights.sum() - 1.0) > 1e-10:
                raise ValidationError("weights must be positive and sum to 1")

    @property
    def n(self) -> int:
        return self.eigenvalues.size


def _check(values: np.ndarray) -> np.ndarray:
    if np.isnan(values).any():
        raise ConvergenceFailure(f"QL iteration did not converge within {MAX_SWEEPS} sweeps")
    return values


def eigvals_tridiagonal(J: JacobiCoefficients) -> SpectralSample:
    return SpectralSample(_check(tridiag_eigvals(J.a, J.b)))


def eig_with_weights(J: JacobiCoefficients) -> SpectralSample:
    x, w = tridiag_eig_weights(J.a, J.b)
    _check(x)
    # rotations preserve the unit norm of the first row up to rounding
    return SpectralSample(x, w / w.sum())
