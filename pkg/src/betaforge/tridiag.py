"""Parametrizations of an N-atomic probability measure on the real line.

A measure with atoms ``x_1 > ... > x_N`` and positive weights is in bijection
with the recurrence coefficients ``(a, b)`` of its monic orthogonal
polynomials,

    P_{k+1}(x) = (x - a_{k+1}) P_k(x) - b_k P_{k-1}(x),

and ``(a, b)`` are stored as the diagonal and the *squared* off-diagonal of a
symmetric tridiagonal (Jacobi) matrix.  Measures on (0, inf) are further
described by the bidiagonal Cholesky entries ``xi`` of that matrix, and
measures on (0, 1) by their canonical moments ``c``.

Moment vectors and Hankel determinants are provided for verification only:
they are exponentially ill-conditioned and nothing else depends on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DuplicateAtoms,
    LengthMismatch,
    NonFinite,
    NonPositiveOffDiagonal,
    NotInUnitInterval,
    NotPositiveDefinite,
    NumericalBreakdown,
    SingularJacobian,
    ValidationError,
)

# relative size of the Stieltjes residual below which the recurrence is
# declared broken down
BREAKDOWN_TOL = 1e-28


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class JacobiCoefficients:
    """Diagonal ``a`` (length N) and squared off-diagonal ``b`` (length N-1)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _as_vector(self.a, "a")
        b = _as_vector(self.b, "b")
        if a.size < 1:
            raise LengthMismatch("a must have at least one entry")
        if b.size != a.size - 1:
            raise LengthMismatch(f"len(b) = {b.size}, expected len(a) - 1 = {a.size - 1}")
        if np.any(b <= 0.0):
            raise NonPositiveOffDiagonal(f"b_{int(np.argmax(b <= 0.0)) + 1} <= 0")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.size

    def dense(self) -> np.ndarray:
        """The symmetric N x N matrix with off-diagonal entries sqrt(b)."""
        off = np.sqrt(self.b)
        return np.diag(self.a) + np.diag(off, 1) + np.diag(off, -1)

    def __eq__(self, other):
        if not isinstance(other, JacobiCoefficients):
            return NotImplemented
        return np.array_equal(self.a, other.a) and np.array_equal(self.b, other.b)

    def __repr__(self) -> str:
        return f"JacobiCoefficients(a={self.a.tolist()}, b={self.b.tolist()})"


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Distinct atoms in strictly decreasing order with positive weights summing to 1.

    The constructor sorts the atoms (carrying the weights along) and rescales
    the weights by their sum, which must already be 1 up to 1e-12.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = _as_vector(self.atoms, "atoms")
        w = _as_vector(self.weights, "weights")
        if x.size != w.size or x.size == 0:
            raise LengthMismatch("atoms and weights must be non-empty and of equal length")
        if np.any(w <= 0.0):
            raise ValidationError("weights must be positive")
        total = w.sum()
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"weights sum to {total!r}, not 1")
        order = np.argsort(-x, kind="stable")
        x = x[order]
        w = w[order] / total
        if np.any(np.diff(x) >= 0.0):
            raise DuplicateAtoms("atoms must be distinct")
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "atoms", x)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.atoms.size


@dataclass(frozen=True, eq=False)
class XiParams:
    """Positive entries xi_1..xi_{2N-1} of the bidiagonal Cholesky factor."""

    xi: np.ndarray

    def __post_init__(self):
        xi = _as_vector(self.xi, "xi")
        if xi.size % 2 != 1:
            raise LengthMismatch("xi must have odd length 2N - 1")
        if np.any(xi <= 0.0):
            raise ValidationError("xi entries must be positive")
        object.__setattr__(self, "xi", xi)

    @property
    def n(self) -> int:
        return (self.xi.size + 1) // 2


@dataclass(frozen=True, eq=False)
class CanonicalMoments:
    """Canonical moments c_1..c_{2N-1}, each strictly inside (0, 1)."""

    c: np.ndarray

    def __post_init__(self):
        c = _as_vector(self.c, "c")
        if c.size % 2 != 1:
            raise LengthMismatch("c must have odd length 2N - 1")
        if np.any(c <= 0.0) or np.any(c >= 1.0):
            raise NotInUnitInterval("canonical moments must lie in (0, 1)")
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return (self.c.size + 1) // 2


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Moments m_1..m_K; m_0 = 1 is implicit."""

    m: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m", _as_vector(self.m, "m"))

    def with_zeroth(self) -> np.ndarray:
        return np.concatenate(([1.0], self.m))


def build_jacobi(a: Sequence[float], b: Sequence[float]) -> JacobiCoefficients:
    return JacobiCoefficients(a, b)


def xi_to_ab(xi: XiParams) -> JacobiCoefficients:
    v = xi.xi
    a = np.empty(xi.n)
    a[0] = v[0]
    a[1:] = v[1:-1:2] + v[2::2]
    b = v[0:-1:2] * v[1::2]
    return JacobiCoefficients(a, b)


def ab_to_xi(J: JacobiCoefficients) -> XiParams:
    """Cholesky entries of J; raises NotPositiveDefinite unless spec(J) is in (0, inf)."""
    n = J.n
    xi = np.empty(2 * n - 1)
    xi[0] = J.a[0]
    if xi[0] <= 0.0:
        raise NotPositiveDefinite("xi_1 <= 0")
    for k in range(1, n):
        xi[2 * k - 1] = J.b[k - 1] / xi[2 * k - 2]
        xi[2 * k] = J.a[k] - xi[2 * k - 1]
        if xi[2 * k] <= 0.0:
            raise NotPositiveDefinite(f"xi_{2 * k + 1} <= 0")
    return XiParams(xi)


def c_to_xi(c: CanonicalMoments) -> XiParams:
    v = c.c
    xi = np.empty_like(v)
    xi[0] = v[0]
    xi[1:] = (1.0 - v[:-1]) * v[1:]
    return XiParams(xi)


def xi_to_c(xi: XiParams) -> CanonicalMoments:
    """Inverse of :func:`c_to_xi`; raises NotInUnitInterval unless the measure lives in (0, 1)."""
    v = xi.xi
    c = np.empty_like(v)
    prev = 0.0
    for k in range(v.size):
        c[k] = v[k] / (1.0 - prev)
        if not 0.0 < c[k] < 1.0:
            raise NotInUnitInterval(f"c_{k + 1} = {c[k]!r}")
        prev = c[k]
    return CanonicalMoments(c)


def stieltjes_from_atoms(mu: AtomicMeasure) -> JacobiCoefficients:
    """Recurrence coefficients of ``mu`` by the discretized Stieltjes procedure.

    Polynomials are carried as their values on the atoms, normalized at each
    step; ``b_k`` is the squared norm of the new residual, which equals the
    ratio ``||P_k||^2 / ||P_{k-1}||^2`` of the monic formulation.  Each new
    residual is reorthogonalized against all earlier polynomials.
    """
    x, w = mu.atoms, mu.weights
    n = mu.n
    a = np.empty(n)
    b = np.empty(n - 1)
    # rows are the orthonormal polynomials p_0..p_k evaluated on the atoms
    basis = np.empty((n, n))
    basis[0] = 1.0
    sqrt_b = 0.0
    for k in range(n):
        p = basis[k]
        xp = x * p
        a[k] = np.dot(w, xp * p)
        if k == n - 1:
            break
        q = xp - a[k] * p
        if k > 0:
            q -= sqrt_b * basis[k - 1]
        # two passes of Gram-Schmidt against every earlier polynomial; the
        # three-term recurrence alone loses orthogonality once N ~ 20
        prev = basis[: k + 1]
        for _ in range(2):
            q -= (prev * w) @ q @ prev
        bk = np.dot(w, q * q)
        if bk <= BREAKDOWN_TOL * np.dot(w, xp * xp):
            raise NumericalBreakdown(f"residual norm vanished at step {k + 1}")
        b[k] = bk
        sqrt_b = np.sqrt(bk)
        basis[k + 1] = q / sqrt_b
    return JacobiCoefficients(a, b)


def monic_polynomials(J: JacobiCoefficients, x) -> np.ndarray:
    """Values of the monic P_0..P_N at points ``x``; row k holds P_k."""
    x = np.asarray(x, dtype=float)
    n = J.n
    out = np.empty((n + 1,) + x.shape)
    out[0] = 1.0
    out[1] = x - J.a[0]
    for k in range(1, n):
        out[k + 1] = (x - J.a[k]) * out[k] - J.b[k - 1] * out[k - 1]
    return out


def moments_from_atoms(mu: AtomicMeasure, kmax: int) -> MomentVector:
    if kmax < 1:
        raise ValidationError("kmax must be >= 1")
    powers = mu.atoms[None, :] ** np.arange(1, kmax + 1)[:, None]
    return MomentVector(powers @ mu.weights)


def hankel_determinants(m: MomentVector, N: int) -> tuple[float, float, float]:
    """Determinants of the moment matrices H_{2N-2}, H_{2N-1} and Hbar_{2N-1}.

    ``m`` must hold at least 2N - 1 moments.
    """
    full = m.with_zeroth()
    if full.size < 2 * N:
        raise LengthMismatch(f"need {2 * N - 1} moments, got {full.size - 1}")
    idx = np.add.outer(np.arange(N), np.arange(N))
    h_even = full[idx]
    h_odd = full[idx + 1]
    h_bar = h_even - h_odd
    return (
        float(np.linalg.det(h_even)),
        float(np.linalg.det(h_odd)),
        float(np.linalg.det(h_bar)),
    )


def vandermonde_squared(x) -> float:
    x = np.asarray(x, dtype=float)
    diff = np.subtract.outer(x, x)[np.triu_indices(x.size, 1)]
    return float(np.prod(diff**2))


def fd_jacobian_det(f: Callable[[np.ndarray], np.ndarray], z, h: float = 1e-6) -> float:
    """|det| of the Jacobian of ``f`` at ``z`` by central differences.

    Coordinate i is perturbed by ``h * max(1, |z_i|)``.
    """
    z = np.asarray(z, dtype=float)
    cols = []
    for i in range(z.size):
        step = h * max(1.0, abs(z[i]))
        zp = z.copy()
        zm = z.copy()
        zp[i] += step
        zm[i] -= step
        cols.append((np.asarray(f(zp)) - np.asarray(f(zm))) / (2.0 * step))
    jac = np.column_stack(cols)
    if jac.shape[0] != jac.shape[1]:
        raise ValidationError("map is not square")
    if not np.all(np.isfinite(jac)) or np.linalg.cond(jac) > 1e13:
        raise SingularJacobian("finite-difference Jacobian is numerically singular")
    return float(abs(np.linalg.det(jac)))


def _split_ab(z: np.ndarray, n: int) -> JacobiCoefficients:
    return JacobiCoefficients(z[:n], z[n:])


def favard_jacobian_fd(mu: AtomicMeasure, h: float = 1e-6) -> float:
    """Finite-difference |d(x_{1:N}, w_{1:N-1}) / d(a, b)| at the coefficients of ``mu``."""
    from .spectral import eig_with_weights

    if not 1e-7 <= h <= 1e-4:
        raise ValidationError("step h must lie in [1e-7, 1e-4]")
    J = stieltjes_from_atoms(mu)
    n = J.n

    def atoms_and_weights(z):
        s = eig_with_weights(_split_ab(z, n))
        x = s.eigenvalues[::-1]
        w = s.weights[::-1]
        return np.concatenate((x, w[: n - 1]))

    return fd_jacobian_det(atoms_and_weights, np.concatenate((J.a, J.b)), h)


def favard_jacobian(mu: AtomicMeasure) -> float:
    """Closed form prod(b)^-1 prod(w) of the same Jacobian."""
    J = stieltjes_from_atoms(mu)
    return float(np.prod(mu.weights) / np.prod(J.b))


def xi_jacobian_fd(xi: XiParams, h: float = 1e-6) -> float:
    """Finite-difference |d(a, b) / d(xi)|; closed form prod xi_{2i-1}, i < N."""

    def to_ab(z):
        J = xi_to_ab(XiParams(z))
        return np.concatenate((J.a, J.b))

    return fd_jacobian_det(to_ab, xi.xi, h)


def canonical_jacobian_fd(c: CanonicalMoments, h: float = 1e-6) -> float:
    """Finite-difference |d(xi) / d(c)|; closed form prod (1 - c_n), n <= 2N-2."""
    return fd_jacobian_det(lambda z: c_to_xi(CanonicalMoments(z)).xi, c.c, h)
