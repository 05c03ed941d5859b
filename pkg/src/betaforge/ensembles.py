"""Exact tridiagonal samplers for the Hermite, Laguerre and Jacobi beta-ensembles.

Conventions for the ensemble density ``|Delta(x)|^beta exp(-sum V(x_n))``:

* Hermite(mu, sigma):  V(x) = (x - mu)^2 / (2 sigma^2)
* Laguerre(k, theta):  V(x) = -(k - 1) log x + x / theta
* Jacobi(p, q):        V(x) = -(p - 1) log x - (q - 1) log(1 - x)

Every coefficient of the tridiagonal model is drawn independently; Laguerre
draws go through the Cholesky entries ``xi`` and Jacobi draws through the
canonical moments ``c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numba as nb
import numpy as np

from . import rng as _rng
from .errors import ValidationError
from .rng import RngStream
from .spectral import SpectralSample, eigvals_tridiagonal, tridiag_eigvals
from .tridiag import (
    CanonicalMoments,
    JacobiCoefficients,
    XiParams,
    c_to_xi,
    xi_to_ab,
)


@dataclass(frozen=True)
class Hermite:
    mu: float = 0.0
    sigma: float = 1.0


@dataclass(frozen=True)
class Laguerre:
    k: float = 1.0
    theta: float = 1.0


@dataclass(frozen=True)
class Jacobi:
    p: float = 1.0
    q: float = 1.0


Kind = Union[Hermite, Laguerre, Jacobi]


@dataclass(frozen=True)
class EnsembleSpec:
    kind: Kind
    n: int
    beta: float

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("N must be >= 1")
        if not self.beta > 0.0:
            raise ValidationError("beta must be positive")
        kind = self.kind
        if isinstance(kind, Hermite):
            positive = {"sigma": kind.sigma}
        elif isinstance(kind, Laguerre):
            positive = {"k": kind.k, "theta": kind.theta}
        elif isinstance(kind, Jacobi):
            positive = {"p": kind.p, "q": kind.q}
        else:
            raise ValidationError(f"unknown ensemble kind {kind!r}")
        for name, value in positive.items():
            if not value > 0.0:
                raise ValidationError(f"{name} must be positive")

    def rescaled(self) -> EnsembleSpec:
        """The ensemble with potential (beta N / 2) V.

        Under this scaling the empirical spectrum converges to a fixed law:
        the semicircle of radius 2 sigma around mu for Hermite, a
        Marchenko-Pastur law for Laguerre, and (for p = q = 1) the arcsine law
        for Jacobi.
        """
        f = 0.5 * self.beta * self.n
        kind = self.kind
        if isinstance(kind, Hermite):
            kind = replace(kind, sigma=kind.sigma / math.sqrt(f))
        elif isinstance(kind, Laguerre):
            kind = Laguerre(k=1.0 + f * (kind.k - 1.0), theta=kind.theta / f)
        else:
            kind = Jacobi(p=1.0 + f * (kind.p - 1.0), q=1.0 + f * (kind.q - 1.0))
        return replace(self, kind=kind)


def sample_gamma(shape: float, scale: float, rng: RngStream) -> float:
    if not (shape > 0.0 and scale > 0.0):
        raise ValidationError("shape and scale must be positive")
    return _rng.gamma(rng.state, float(shape), float(scale))


def sample_beta(p: float, q: float, rng: RngStream) -> float:
    if not (p > 0.0 and q > 0.0):
        raise ValidationError("p and q must be positive")
    return _rng.beta(rng.state, float(p), float(q))


def sample_dirichlet(alpha: float, n: int, rng: RngStream) -> np.ndarray:
    if not alpha > 0.0 or n < 1:
        raise ValidationError("alpha must be positive and n >= 1")
    return _rng.dirichlet(rng.state, float(alpha), int(n))


@nb.njit(cache=True, nogil=True)
def _hermite_ab(state, n, beta, mu, sigma):
    a = np.empty(n)
    b = np.empty(n - 1)
    var = sigma * sigma
    for i in range(n):
        a[i] = mu + sigma * _rng.normal(state)
    for i in range(n - 1):
        b[i] = _rng.gamma(state, 0.5 * beta * (n - 1 - i), var)
    return a, b


@nb.njit(cache=True, nogil=True)
def _laguerre_xi(state, n, beta, k, theta):
    xi = np.empty(2 * n - 1)
    for i in range(n):
        # xi_{2i+1} and xi_{2i+2} in 1-based numbering
        xi[2 * i] = _rng.gamma(state, 0.5 * beta * (n - 1 - i) + k, theta)
        if i < n - 1:
            xi[2 * i + 1] = _rng.gamma(state, 0.5 * beta * (n - 1 - i), theta)
    return xi


@nb.njit(cache=True, nogil=True)
def _jacobi_c(state, n, beta, p, q):
    c = np.empty(2 * n - 1)
    for i in range(n):
        h = 0.5 * beta * (n - 1 - i)
        c[2 * i] = _rng.beta(state, h + p, h + q)
        if i < n - 1:
            c[2 * i + 1] = _rng.beta(state, h, 0.5 * beta * (n - 2 - i) + p + q)
    return c


def sample_coefficients(spec: EnsembleSpec, rng: RngStream) -> JacobiCoefficients:
    kind, n, beta = spec.kind, spec.n, float(spec.beta)
    if isinstance(kind, Hermite):
        a, b = _hermite_ab(rng.state, n, beta, float(kind.mu), float(kind.sigma))
        return JacobiCoefficients(a, b)
    if isinstance(kind, Laguerre):
        xi = _laguerre_xi(rng.state, n, beta, float(kind.k), float(kind.theta))
        return xi_to_ab(XiParams(xi))
    c = _jacobi_c(rng.state, n, beta, float(kind.p), float(kind.q))
    return xi_to_ab(c_to_xi(CanonicalMoments(c)))


def sample_ensemble(spec: EnsembleSpec, rng: RngStream) -> SpectralSample:
    return eigvals_tridiagonal(sample_coefficients(spec, rng))


def sample_many(spec: EnsembleSpec, rng: RngStream, count: int) -> np.ndarray:
    """``count`` consecutive draws from one stream, as a (count, N) array."""
    out = np.empty((count, spec.n))
    for i in range(count):
        J = sample_coefficients(spec, rng)
        out[i] = tridiag_eigvals(J.a, J.b)
    return out
