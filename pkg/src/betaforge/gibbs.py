"""Gibbs / Metropolis-within-Gibbs sampling of Jacobi coefficients.

For a polynomial potential V the coefficients of the Jacobi matrix have joint
density proportional to

    prod_n b_n^{beta/2 (N - n) - 1} * exp(-Tr V(J_{a,b}))

(1-based n), and the eigenvalues of J then follow the beta-ensemble with
potential V.  Since Tr J^k only couples entries within distance k/2, every
full conditional is an explicit univariate density:

* a_n:  exp(-poly(a_n)) on the real line, poly of degree deg V;
* b_n:  b_n^{gamma - 1} exp(-poly(b_n)) on (0, inf), poly of degree deg V / 2,
  gamma = beta/2 (N - n).

The polynomials are recovered by interpolating a windowed trace at 7
Chebyshev abscissae.  Log-concave conditionals are drawn exactly by
Devroye's plateau-and-tail rejection sampler; the rest get a few MALA steps
(b_n in the coordinate log b_n).

Indices in the public functions are 1-based like the recurrence; internally
everything is 0-based.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from . import rng as _rng
from .errors import NotLogConcave, ValidationError
from .rng import RngStream
from .spectral import SpectralSample, eigvals_tridiagonal
from .tridiag import JacobiCoefficients

EPS_B = 1e-3  # initial value of every b_n (b = 0 is outside the state space)
TARGET_ACCEPT = 0.574
ADAPT_RATE = 0.05
ADAPT_FRACTION = 0.1
MAX_DEGREE = 6
LN4 = math.log(4.0)

# Chebyshev abscissae on [-1, 1] and the inverse of their Vandermonde matrix
_NODES = np.cos((2.0 * np.arange(7) + 1.0) * np.pi / 14.0)
_VINV = np.linalg.inv(np.vander(_NODES, 7, increasing=True))


# ----------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class PolynomialPotential:
    """V(x) = g_1 x + g_2 x^2 + g_3 x^3 + g_4 x^4 + g_6 x^6.

    With ``rescale_by_N`` a chain targets (beta N / 2) V instead of V.
    """

    g: tuple[float, ...]
    rescale_by_N: bool = False

    def __post_init__(self):
        g = tuple(float(v) for v in self.g)
        if len(g) > MAX_DEGREE:
            raise ValidationError("at most 6 coefficients g_1..g_6")
        g = g + (0.0,) * (MAX_DEGREE - len(g))
        if not all(math.isfinite(v) for v in g):
            raise ValidationError("coefficients must be finite")
        if g[4] != 0.0:
            raise ValidationError("g_5 must be zero")
        g1, g2, g3, g4, _, g6 = g
        if not (g6 > 0.0 or (g6 == 0.0 and g4 > 0.0) or (g6 == g4 == g3 == 0.0 and g2 > 0.0)):
            raise ValidationError("leading even coefficient must be positive")
        object.__setattr__(self, "g", g)

    @classmethod
    def quartic(cls, g4: float = 0.25, g2: float = 0.0, g3: float = 0.0, g1: float = 0.0, rescale: bool = False):
        return cls((g1, g2, g3, g4), rescale)

    @classmethod
    def sextic(cls, g6: float = 1.0 / 6.0, g4: float = 0.0, g3: float = 0.0, g2: float = 0.0, g1: float = 0.0, rescale: bool = False):
        return cls((g1, g2, g3, g4, 0.0, g6), rescale)

    @property
    def degree(self) -> int:
        return max(k + 1 for k, v in enumerate(self.g) if v != 0.0)

    def coefficients(self) -> np.ndarray:
        return np.array(self.g)

    def effective(self, n: int, beta: float) -> np.ndarray:
        """Coefficients actually targeted by a chain with N = n."""
        g = self.coefficients()
        return g * (0.5 * beta * n) if self.rescale_by_N else g

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x * np.polynomial.polynomial.polyval(x, self.g)


# ----------------------------------------------------------------------------
# traces


def _closed_walks(k: int) -> np.ndarray:
    """Step sequences in {-1, 0, 1}^k summing to 0 (Motzkin-type closed walks)."""
    return np.array([s for s in itertools.product((-1, 0, 1), repeat=k) if sum(s) == 0], dtype=int)


_WALKS = {k: _closed_walks(k) for k in range(1, MAX_DEGREE + 1)}


def power_traces(J: JacobiCoefficients, kmax: int = MAX_DEGREE) -> np.ndarray:
    """Tr J^k for k = 0..kmax as a sum over closed lattice walks.

    A level step at height i contributes a_i, an up step i -> i+1 contributes
    b_i and a down step 1 (the walk returns, so each b is paired).
    """
    n = J.n
    pad = kmax // 2 + 1
    a = np.concatenate((np.zeros(pad), J.a, np.zeros(pad)))
    b = np.concatenate((np.zeros(pad), J.b, np.zeros(pad + 1)))
    start = np.arange(pad, pad + n)
    out = np.zeros(kmax + 1)
    out[0] = n
    for k in range(1, kmax + 1):
        total = 0.0
        for steps in _WALKS[k]:
            pos = start.copy()
            term = np.ones(n)
            for s in steps:
                if s == 0:
                    term *= a[pos]
                elif s == 1:
                    term *= b[pos]
                pos = pos + s
            total += term.sum()
        out[k] = total
    return out


def trace_potential(J: JacobiCoefficients, V: PolynomialPotential) -> float:
    """Tr V(J) with the raw coefficients of V (no N-rescaling)."""
    p = power_traces(J, V.degree)
    return float(np.dot(V.coefficients()[: V.degree], p[1:]))


@nb.njit(cache=True, nogil=True)
def _window_traces(a, b, lo, hi, kmax, out):
    # powers of the (nonsymmetric, similar) window matrix with b above and 1
    # below the diagonal, so every entry enters linearly
    m = hi - lo + 1
    M = np.zeros((m, m))
    for i in range(m):
        M[i, i] = a[lo + i]
        if i + 1 < m:
            M[i, i + 1] = b[lo + i]
            M[i + 1, i] = 1.0
    P = M.copy()
    Q = np.empty((m, m))
    out[1] = np.trace(M)
    for k in range(2, kmax + 1):
        for i in range(m):
            for j in range(m):
                s = 0.0
                for l in range(max(0, j - 1), min(m, j + 2)):
                    s += P[i, l] * M[l, j]
                Q[i, j] = s
        P, Q = Q, P
        out[k] = np.trace(P)


@nb.njit(cache=True, nogil=True)
def _window_value(a, b, lo, hi, g, kmax, tr):
    _window_traces(a, b, lo, hi, kmax, tr)
    v = 0.0
    for k in range(1, kmax + 1):
        v += g[k - 1] * tr[k]
    return v


@nb.njit(cache=True, nogil=True)
def _interpolate(values, scale, keep, out):
    for k in range(6):
        out[k] = 0.0
    for k in range(1, keep + 1):
        c = 0.0
        for j in range(7):
            c += _VINV[k, j] * values[j]
        out[k - 1] = c / scale**k


@nb.njit(cache=True, nogil=True)
def _a_poly(a, b, n, g, kmax, out):
    N = a.shape[0]
    d = kmax // 2
    lo = max(0, n - d)
    hi = min(N - 1, n + d)
    scale = 1.0
    for i in range(lo, hi + 1):
        scale = max(scale, 1.0 + abs(a[i]))
    for i in range(lo, hi):
        scale = max(scale, 1.0 + math.sqrt(b[i]))
    tr = np.zeros(MAX_DEGREE + 1)
    vals = np.empty(7)
    saved = a[n]
    for j in range(7):
        a[n] = scale * _NODES[j]
        vals[j] = _window_value(a, b, lo, hi, g, kmax, tr)
    a[n] = saved
    _interpolate(vals, scale, kmax, out)


@nb.njit(cache=True, nogil=True)
def _b_poly(a, b, n, g, kmax, out):
    N = a.shape[0]
    d = kmax // 2
    lo = max(0, n - d + 1)
    hi = min(N - 1, n + d)
    scale = 1.0
    for i in range(lo, hi + 1):
        scale = max(scale, (1.0 + abs(a[i])) ** 2)
    for i in range(lo, hi):
        scale = max(scale, 1.0 + b[i])
    tr = np.zeros(MAX_DEGREE + 1)
    vals = np.empty(7)
    saved = b[n]
    for j in range(7):
        b[n] = scale * _NODES[j]
        vals[j] = _window_value(a, b, lo, hi, g, kmax, tr)
    b[n] = saved
    _interpolate(vals, scale, d, out)


# ----------------------------------------------------------------------------
# univariate conditionals: kind 0 is exp(-poly(x)) on R, kind 1 is
# x^(gamma-1) exp(-poly(x)) on (0, inf)


@nb.njit(cache=True, nogil=True)
def _poly_val(p, x):
    s = 0.0
    for k in range(5, -1, -1):
        s = s * x + p[k]
    return s * x


@nb.njit(cache=True, nogil=True)
def _poly_der(p, x):
    s = 0.0
    for k in range(5, -1, -1):
        s = s * x + (k + 1) * p[k]
    return s


@nb.njit(cache=True, nogil=True)
def _logpdf(kind, p, gamma, x):
    if kind == 1:
        if x <= 0.0:
            return -np.inf
        if gamma != 1.0:
            return (gamma - 1.0) * math.log(x) - _poly_val(p, x)
    return -_poly_val(p, x)


@nb.njit(cache=True, nogil=True)
def _dlogpdf(kind, p, gamma, x):
    if kind == 1:
        return (gamma - 1.0) / x - _poly_der(p, x)
    return -_poly_der(p, x)


@nb.njit(cache=True, nogil=True)
def _certified(kind, p, gamma):
    """Sufficient condition for a log-concave, normalizable conditional."""
    if kind == 0:
        if p[4] != 0.0 or p[5] != 0.0:
            return False
        c2, c3, c4 = p[1], p[2], p[3]
        if c4 > 0.0:
            return 36.0 * c3 * c3 <= 96.0 * c4 * c2
        return c3 == 0.0 and c2 > 0.0
    if gamma < 1.0 or p[1] < 0.0 or p[2] < 0.0:
        return False
    for k in range(3, 6):
        if p[k] != 0.0:
            return False
    return p[2] > 0.0 or p[1] > 0.0 or p[0] > 0.0


@nb.njit(cache=True, nogil=True)
def _mode(kind, p, gamma):
    # root of the decreasing derivative of the log density
    if kind == 1:
        if gamma == 1.0 and -_poly_der(p, 0.0) <= 0.0:
            return 0.0
        hi = 1.0
        while _dlogpdf(kind, p, gamma, hi) > 0.0:
            hi *= 2.0
        lo = 0.5 * hi
        while _dlogpdf(kind, p, gamma, lo) < 0.0 and lo > 1e-300:
            lo *= 0.5
    else:
        d0 = _dlogpdf(kind, p, gamma, 0.0)
        if d0 == 0.0:
            return 0.0
        if d0 > 0.0:
            lo, hi = 0.0, 1.0
            while _dlogpdf(kind, p, gamma, hi) > 0.0:
                lo = hi
                hi *= 2.0
        else:
            lo, hi = -1.0, 0.0
            while _dlogpdf(kind, p, gamma, lo) < 0.0:
                hi = lo
                lo *= 2.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-12 or mid == lo or mid == hi:
            break
        if _dlogpdf(kind, p, gamma, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@nb.njit(cache=True, nogil=True)
def _quarter_width(kind, p, gamma, m, lm, direction, limit):
    """Outer end of the bisection bracket for pi(m + direction x) = pi(m) / 4.

    ``limit`` bounds x (distance to the support boundary), or is inf.
    """
    target = lm - LN4
    hi = min(1.0, 0.5 * limit)
    while _logpdf(kind, p, gamma, m + direction * hi) > target:
        if hi >= limit:
            return hi
        hi = min(2.0 * hi, limit)
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _logpdf(kind, p, gamma, m + direction * mid) > target:
            lo = mid
        else:
            hi = mid
    return hi


@nb.njit(cache=True, nogil=True)
def _envelope(kind, p, gamma):
    """(m, lm, v, lv, u, lu, left_plateau): widths are half the quarter-height distances."""
    m = _mode(kind, p, gamma)
    lm = _logpdf(kind, p, gamma, m) if m > 0.0 or kind == 0 else -_poly_val(p, 0.0)
    v = 0.5 * _quarter_width(kind, p, gamma, m, lm, 1.0, np.inf)
    lv = _logpdf(kind, p, gamma, m + v) - lm
    left_plateau = False
    if kind == 1:
        if m == 0.0:
            return m, lm, v, lv, 0.0, -np.inf, True
        at_zero = -np.inf if gamma > 1.0 else -_poly_val(p, 0.0)
        if at_zero - lm > -LN4:
            return m, lm, v, lv, m, -np.inf, True
    u = 0.5 * _quarter_width(kind, p, gamma, m, lm, -1.0, np.inf if kind == 0 else m)
    lu = _logpdf(kind, p, gamma, m - u) - lm
    return m, lm, v, lv, u, lu, left_plateau


@nb.njit(cache=True, nogil=True)
def _envelope_masses(v, lv, u, lu, left_plateau, out):
    out[0] = v
    out[1] = v * math.exp(lv)
    out[2] = v / (2.0 * LN4)
    if left_plateau:
        out[3] = u
        out[4] = 0.0
        out[5] = 0.0
    else:
        out[3] = u
        out[4] = u * math.exp(lu)
        out[5] = u / (2.0 * LN4)


@nb.njit(cache=True, nogil=True)
def _log_envelope(x, m, v, lv, u, lu, left_plateau):
    t = x - m
    if t >= 0.0:
        if t <= v:
            return 0.0
        if t <= 2.0 * v:
            return lv
        return -LN4 * t / (2.0 * v)
    t = -t
    if left_plateau:
        return 0.0 if t <= u else -np.inf
    if t <= u:
        return 0.0
    if t <= 2.0 * u:
        return lu
    return -LN4 * t / (2.0 * u)


@nb.njit(cache=True, nogil=True)
def _devroye(kind, p, gamma, state):
    m, lm, v, lv, u, lu, left_plateau = _envelope(kind, p, gamma)
    w = np.empty(6)
    _envelope_masses(v, lv, u, lu, left_plateau, w)
    total = w.sum()
    trials = 0
    while True:
        trials += 1
        r = _rng.uniform(state) * total
        e = _rng.uniform(state)
        if r < w[0]:
            x, lh = m + v * e, 0.0
        elif r < w[0] + w[1]:
            x, lh = m + v * (1.0 + e), lv
        elif r < w[0] + w[1] + w[2]:
            t = 2.0 * v - 2.0 * v / LN4 * math.log(e)
            x, lh = m + t, -LN4 * t / (2.0 * v)
        elif r < w[0] + w[1] + w[2] + w[3]:
            x, lh = m - u * e, 0.0
        elif r < total - w[5]:
            x, lh = m - u * (1.0 + e), lu
        else:
            t = 2.0 * u - 2.0 * u / LN4 * math.log(e)
            x, lh = m - t, -LN4 * t / (2.0 * u)
        lx = _logpdf(kind, p, gamma, x) - lm
        if math.log(_rng.uniform(state)) <= lx - lh:
            return x, trials


# ----------------------------------------------------------------------------
# MALA


@nb.njit(cache=True, nogil=True)
def mala_log_proposal(x_to, x_from, step, grad_from):
    """log q(x_to | x_from) up to a constant for the Langevin proposal."""
    r = x_to - x_from - 0.5 * step * step * grad_from
    return -r * r / (2.0 * step * step)


@nb.njit(cache=True, nogil=True)
def mh_log_ratio(logpi_to, logpi_from, logq_back, logq_forward):
    return logpi_to - logpi_from + logq_back - logq_forward


@nb.njit(cache=True, nogil=True)
def _mala_target(kind, p, gamma, y):
    # kind 1 works in y = log b; gamma y is the density in y
    if kind == 1:
        x = math.exp(y)
        if x == 0.0 or not math.isfinite(x):
            return -np.inf, 0.0
        return gamma * y - _poly_val(p, x), gamma - x * _poly_der(p, x)
    return -_poly_val(p, y), -_poly_der(p, y)


@nb.njit(cache=True, nogil=True)
def _mala(kind, p, gamma, x0, step, nsteps, state):
    y = math.log(x0) if kind == 1 else x0
    ly, gy = _mala_target(kind, p, gamma, y)
    accepted = 0
    for _ in range(nsteps):
        yp = y + 0.5 * step * step * gy + step * _rng.normal(state)
        lp, gp = _mala_target(kind, p, gamma, yp)
        u = _rng.uniform(state)
        if not math.isfinite(lp) or not math.isfinite(gp):
            continue
        lr = mh_log_ratio(lp, ly, mala_log_proposal(y, yp, step, gp), mala_log_proposal(yp, y, step, gy))
        if math.log(u) < lr:
            y, ly, gy = yp, lp, gp
            accepted += 1
    x = math.exp(y) if kind == 1 else y
    return x, accepted


# ----------------------------------------------------------------------------
# one systematic-scan pass


@nb.njit(cache=True, nogil=True)
def _gibbs_pass(a, b, g, kmax, beta, state, log_step, nsteps, adapt, counters):
    """counters: devroye draws, devroye trials, mala steps, mala accepted."""
    N = a.shape[0]
    p = np.zeros(6)
    for n in range(N):
        _a_poly(a, b, n, g, kmax, p)
        if _certified(0, p, 0.0):
            x, t = _devroye(0, p, 0.0, state)
            counters[0] += 1
            counters[1] += t
        else:
            x, acc = _mala(0, p, 0.0, a[n], math.exp(log_step[0]), nsteps, state)
            counters[2] += nsteps
            counters[3] += acc
            if adapt:
                log_step[0] += ADAPT_RATE * (acc / nsteps - TARGET_ACCEPT)
        a[n] = x
        if n < N - 1:
            gamma = 0.5 * beta * (N - 1 - n)
            _b_poly(a, b, n, g, kmax, p)
            if _certified(1, p, gamma):
                x, t = _devroye(1, p, gamma, state)
                counters[0] += 1
                counters[1] += t
            else:
                x, acc = _mala(1, p, gamma, b[n], math.exp(log_step[1]), nsteps, state)
                counters[2] += nsteps
                counters[3] += acc
                if adapt:
                    log_step[1] += ADAPT_RATE * (acc / nsteps - TARGET_ACCEPT)
            b[n] = x


# ----------------------------------------------------------------------------
# public API


@dataclass(frozen=True, eq=False)
class ConditionalDensity:
    """Full conditional of one Jacobi coefficient.

    ``kind`` is ``"a"`` (density exp(-poly(x)) on R) or ``"b"`` (density
    x^(shape - 1) exp(-poly(x)) on (0, inf)); ``poly`` holds p_1..p_6 of
    poly(x) = sum_k p_k x^k; ``index`` is 1-based.
    """

    kind: str
    index: int
    poly: np.ndarray
    shape: float = 0.0

    def __post_init__(self):
        if self.kind not in ("a", "b"):
            raise ValidationError("kind must be 'a' or 'b'")
        p = np.zeros(6)
        src = np.asarray(self.poly, dtype=float)
        if src.size > 6:
            raise ValidationError("poly has at most 6 coefficients")
        p[: src.size] = src
        p.setflags(write=False)
        object.__setattr__(self, "poly", p)
        if self.kind == "b" and not self.shape > 0.0:
            raise ValidationError("b-conditionals need a positive shape")

    @property
    def code(self) -> int:
        return 0 if self.kind == "a" else 1

    def logpdf(self, x):
        """Unnormalized log density."""
        x = np.asarray(x, dtype=float)
        val = -x * np.polynomial.polynomial.polyval(x, self.poly)
        if self.kind == "b":
            with np.errstate(divide="ignore", invalid="ignore"):
                val = np.where(x > 0.0, val + (self.shape - 1.0) * np.log(np.where(x > 0.0, x, 1.0)), -np.inf)
        return val

    def is_log_concave(self) -> bool:
        return bool(_certified(self.code, np.asarray(self.poly), float(self.shape)))


def _state(J: JacobiCoefficients) -> tuple[np.ndarray, np.ndarray]:
    return np.array(J.a, dtype=float), np.array(J.b, dtype=float)


def _degree_of(g: np.ndarray) -> int:
    nz = np.nonzero(g)[0]
    return int(nz[-1]) + 1 if nz.size else 1


def conditional_for_a(n: int, J: JacobiCoefficients, V: PolynomialPotential, beta: float) -> ConditionalDensity:
    """Conditional law of a_n given all other coefficients (n is 1-based)."""
    if not 1 <= n <= J.n:
        raise ValidationError(f"index {n} outside 1..{J.n}")
    g = V.effective(J.n, beta)
    a, b = _state(J)
    p = np.zeros(6)
    _a_poly(a, b, n - 1, g, _degree_of(g), p)
    return ConditionalDensity("a", n, p)


def conditional_for_b(n: int, J: JacobiCoefficients, V: PolynomialPotential, beta: float) -> ConditionalDensity:
    """Conditional law of b_n given all other coefficients (n is 1-based)."""
    if not 1 <= n <= J.n - 1:
        raise ValidationError(f"index {n} outside 1..{J.n - 1}")
    g = V.effective(J.n, beta)
    a, b = _state(J)
    p = np.zeros(6)
    _b_poly(a, b, n - 1, g, _degree_of(g), p)
    return ConditionalDensity("b", n, p, 0.5 * beta * (J.n - n))


@dataclass(frozen=True)
class DevroyeEnvelope:
    """Dominating function normalized so that h(mode) = pi(mode) = 1.

    Right of the mode: plateau 1 on [0, v], plateau pi(m+v) on [v, 2v], then
    4^(-t/(2v)); the left side mirrors it with u.  When the density is still
    above pi(m)/4 at the support boundary 0, the left side is a single
    plateau on [0, m] (``left_plateau``).
    """

    mode: float
    log_mode: float
    v: float
    log_v: float
    u: float
    log_u: float
    left_plateau: bool

    def log_h(self, x):
        """log h(x) - log pi(mode)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([
            _log_envelope(xi, self.mode, self.v, self.log_v, self.u, self.log_u, self.left_plateau) for xi in x
        ])

    def mass(self) -> float:
        w = np.empty(6)
        _envelope_masses(self.v, self.log_v, self.u, self.log_u, self.left_plateau, w)
        return float(w.sum())


def devroye_envelope(d: ConditionalDensity) -> DevroyeEnvelope:
    if not d.is_log_concave():
        raise NotLogConcave(f"{d.kind}_{d.index} conditional has no log-concavity certificate")
    m, lm, v, lv, u, lu, lp = _envelope(d.code, np.asarray(d.poly), float(d.shape))
    return DevroyeEnvelope(float(m), float(lm), float(v), float(lv), float(u), float(lu), bool(lp))


def devroye_sample_trials(d: ConditionalDensity, rng: RngStream) -> tuple[float, int]:
    """One exact draw and the number of envelope proposals it took."""
    if not d.is_log_concave():
        raise NotLogConcave(f"{d.kind}_{d.index} conditional has no log-concavity certificate")
    x, t = _devroye(d.code, np.asarray(d.poly), float(d.shape), rng.state)
    return float(x), int(t)


def devroye_sample(d: ConditionalDensity, rng: RngStream) -> float:
    return devroye_sample_trials(d, rng)[0]


def mala_update(d: ConditionalDensity, x0: float, step: float, nsteps: int, rng: RngStream) -> float:
    """Run ``nsteps`` MALA transitions from x0; b-conditionals move in log b."""
    return mala_run(d, x0, step, nsteps, rng)[0]


def mala_run(d: ConditionalDensity, x0: float, step: float, nsteps: int, rng: RngStream) -> tuple[float, int]:
    """Like :func:`mala_update` but also returns the number of accepted moves."""
    if not step > 0.0 or nsteps < 1:
        raise ValidationError("need step > 0 and nsteps >= 1")
    if d.kind == "b" and not x0 > 0.0:
        raise ValidationError("b-conditionals start from a positive value")
    x, acc = _mala(d.code, np.asarray(d.poly), float(d.shape), float(x0), float(step), int(nsteps), rng.state)
    return float(x), int(acc)


@dataclass
class MalaSettings:
    """Step sizes of the a- and b-updates and MALA steps per conditional update.

    ``steps_per_update=None`` picks 100 for sextic potentials, else 1.  Step
    sizes adapt toward acceptance 0.574 during the first ``adapt_fraction`` of
    the passes of :func:`run_chain` and stay frozen afterwards.
    """

    step_a: float | None = None
    step_b: float = 0.5
    steps_per_update: int | None = None
    adapt_fraction: float = ADAPT_FRACTION


@dataclass
class GibbsChain:
    """Mutable chain state: coefficients are updated in place by :func:`gibbs_pass`."""

    a: np.ndarray
    b: np.ndarray
    potential: PolynomialPotential
    beta: float
    rng: RngStream
    mala: MalaSettings = field(default_factory=MalaSettings)
    pass_count: int = 0
    adapt_passes: int = 0
    log_step: np.ndarray = field(default=None)
    counters: np.ndarray = field(default=None)

    def __post_init__(self):
        self.a = np.array(self.a, dtype=float)
        self.b = np.array(self.b, dtype=float)
        if self.a.size < 1 or self.b.size != self.a.size - 1:
            raise ValidationError("need len(b) = len(a) - 1 >= 0")
        if np.any(self.b <= 0.0):
            raise ValidationError("b must be positive")
        if not self.beta > 0.0:
            raise ValidationError("beta must be positive")
        if self.log_step is None:
            g = self.potential.effective(self.n, self.beta)
            deg = _degree_of(g)
            # typical spread of a conditional: lead coefficient ^ (-1/deg)
            step_a = self.mala.step_a or 0.5 * abs(g[deg - 1]) ** (-1.0 / deg)
            self.log_step = np.log(np.array([step_a, self.mala.step_b]))
        if self.counters is None:
            self.counters = np.zeros(4, dtype=np.int64)

    @classmethod
    def initial(cls, n: int, potential: PolynomialPotential, beta: float, rng: RngStream,
                mala: MalaSettings | None = None) -> GibbsChain:
        """a = 0 and b = 1e-3 everywhere."""
        if n < 1:
            raise ValidationError("N must be >= 1")
        return cls(np.zeros(n), np.full(n - 1, EPS_B), potential, beta, rng, mala or MalaSettings())

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def coefficients(self) -> JacobiCoefficients:
        return JacobiCoefficients(self.a.copy(), self.b.copy())

    @property
    def steps_per_update(self) -> int:
        if self.mala.steps_per_update is not None:
            return int(self.mala.steps_per_update)
        return 100 if self.potential.degree == 6 else 1

    @property
    def devroye_acceptance(self) -> float:
        """Accepted draws per envelope proposal so far."""
        return self.counters[0] / self.counters[1] if self.counters[1] else float("nan")

    @property
    def mala_acceptance(self) -> float:
        return self.counters[3] / self.counters[2] if self.counters[2] else float("nan")


def gibbs_pass(chain: GibbsChain) -> GibbsChain:
    """One systematic scan a_1, b_1, a_2, b_2, ..., a_N; returns the same chain."""
    g = chain.potential.effective(chain.n, chain.beta)
    adapt = chain.pass_count < chain.adapt_passes
    _gibbs_pass(chain.a, chain.b, g, _degree_of(g), float(chain.beta), chain.rng.state,
                chain.log_step, chain.steps_per_update, adapt, chain.counters)
    chain.pass_count += 1
    return chain


def run_chain(chain: GibbsChain, passes: int, snapshot_every: int = 1) -> list[SpectralSample]:
    """Run ``passes`` passes, recording the spectrum every ``snapshot_every`` passes."""
    if passes < 1 or snapshot_every < 1:
        raise ValidationError("passes and snapshot_every must be >= 1")
    chain.adapt_passes = max(chain.adapt_passes, chain.pass_count + math.ceil(chain.mala.adapt_fraction * passes))
    out = []
    for t in range(1, passes + 1):
        gibbs_pass(chain)
        if t % snapshot_every == 0:
            out.append(eigvals_tridiagonal(JacobiCoefficients(chain.a, chain.b)))
    return out


def sample_potential(n: int, potential: PolynomialPotential, beta: float, rng: RngStream, passes: int,
                     mala: MalaSettings | None = None) -> SpectralSample:
    """Spectrum after ``passes`` passes from the default initial state."""
    chain = GibbsChain.initial(n, potential, beta, rng, mala)
    return run_chain(chain, passes, passes)[-1]


__all__ = [
    "ConditionalDensity",
    "DevroyeEnvelope",
    "GibbsChain",
    "MalaSettings",
    "PolynomialPotential",
    "conditional_for_a",
    "conditional_for_b",
    "devroye_envelope",
    "devroye_sample",
    "devroye_sample_trials",
    "gibbs_pass",
    "mala_log_proposal",
    "mala_run",
    "mala_update",
    "mh_log_ratio",
    "power_traces",
    "run_chain",
    "sample_potential",
    "trace_potential",
]
