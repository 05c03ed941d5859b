"""Large-N limiting spectral laws (equilibrium measures).

Every density handled here is a smooth factor times a square root vanishing
at both ends of each interval of the support,

    rho(x) = phi(x) * sqrt((x - lo) (hi - x)),

so distribution functions are integrated in the angle variable
``x = lo + (hi - lo) sin^2(theta / 2)``, where the integrand is smooth and
composite Gauss-Legendre converges spectrally.

For polynomial potentials the measure solves

    integral rho = 1,   PV integral rho(y) / (x - y) dy = V'(x) / 2 on the support,

with the normalization in which V(x) = x^2 / 2 gives the semicircle on [-2, 2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from scipy import optimize

from ..errors import UnsupportedPotential, ValidationError

_PANELS = 64
_NODES = 16
_GL_T, _GL_W = np.polynomial.legendre.leggauss(_NODES)

EDGE_FIT_FRACTION = 0.02


@dataclass(frozen=True, eq=False)
class _Arc:
    """Mass ``phi(y) sqrt((y - lo)(hi - y)) dy`` on [lo, hi] in some variable y."""

    lo: float
    hi: float
    phi: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        edges = np.linspace(0.0, math.pi, _PANELS + 1)
        partial = self._integral(edges[:-1], edges[1:])
        object.__setattr__(self, "_edges", edges)
        object.__setattr__(self, "_cum", np.concatenate(([0.0], np.cumsum(partial))))

    def _y(self, theta):
        return self.lo + (self.hi - self.lo) * np.sin(0.5 * theta) ** 2

    def _integrand(self, theta):
        r = 0.5 * (self.hi - self.lo)
        return self.phi(self._y(theta)) * (r * np.sin(theta)) ** 2

    def _integral(self, start, stop):
        start = np.asarray(start, dtype=float)
        stop = np.asarray(stop, dtype=float)
        half = 0.5 * (stop - start)
        nodes = start[:, None] + half[:, None] * (_GL_T[None, :] + 1.0)
        return half * (self._integrand(nodes) @ _GL_W)

    @property
    def total(self) -> float:
        return float(self._cum[-1])

    def mass_below(self, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        frac = np.clip((y - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        theta = 2.0 * np.arcsin(np.sqrt(frac))
        panel = np.minimum(np.searchsorted(self._edges, theta, side="right") - 1, _PANELS - 1)
        start = self._edges[panel]
        out = self._cum[panel].copy()
        inner = theta > start
        if np.any(inner):
            out[inner] += self._integral(start[inner], theta[inner])
        return out

    def density(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        inside = (y > self.lo) & (y < self.hi)
        out = np.zeros(y.shape)
        yi = y[inside]
        out[inside] = self.phi(yi) * np.sqrt((yi - self.lo) * (self.hi - yi))
        return out


@dataclass(frozen=True, eq=False)
class EquilibriumMeasure:
    """Limiting spectral law with pdf/cdf evaluators.

    ``edge_coefficient`` is the constant c in pdf(x) ~ c sqrt(E - x) at the
    right edge E, or None when that edge is not a square-root (soft) edge.
    """

    name: str
    support: tuple[tuple[float, float], ...]
    _pdf: Callable[[np.ndarray], np.ndarray]
    _cdf: Callable[[np.ndarray], np.ndarray]
    edge_coefficient: float | None = None

    @property
    def left_edge(self) -> float:
        return self.support[0][0]

    @property
    def right_edge(self) -> float:
        return self.support[-1][1]

    def pdf(self, x):
        scalar = np.ndim(x) == 0
        out = self._pdf(np.atleast_1d(np.asarray(x, dtype=float)))
        return float(out[0]) if scalar else out

    def cdf(self, x):
        scalar = np.ndim(x) == 0
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.clip(self._cdf(arr), 0.0, 1.0)
        out[arr <= self.left_edge] = 0.0
        out[arr >= self.right_edge] = 1.0
        return float(out[0]) if scalar else out

    def __call__(self, x):
        return self.cdf(x)


def fit_edge_coefficient(pdf: Callable, lo: float, edge: float, fraction: float = EDGE_FIT_FRACTION) -> float:
    """Least-squares intercept of pdf(x) / sqrt(E - x) ~ c + d (E - x) over the last ``fraction`` of [lo, E]."""
    width = fraction * (edge - lo)
    d = width * (np.arange(1, 51) / 50.0)
    x = edge - d
    ratio = np.asarray(pdf(x)) / np.sqrt(d)
    design = np.column_stack((np.ones_like(d), d))
    coef, *_ = np.linalg.lstsq(design, ratio, rcond=None)
    return float(coef[0])


def _from_arc(name: str, arc: _Arc, soft_right: bool = True) -> EquilibriumMeasure:
    def cdf(x):
        return arc.mass_below(x) / arc.total

    def pdf(x):
        return arc.density(x) / arc.total

    c = fit_edge_coefficient(pdf, arc.lo, arc.hi) if soft_right else None
    return EquilibriumMeasure(name, ((arc.lo, arc.hi),), pdf, cdf, c)


def semicircle(center: float = 0.0, radius: float = 2.0) -> EquilibriumMeasure:
    if not radius > 0.0:
        raise ValidationError("radius must be positive")
    lo, hi = center - radius, center + radius
    k = 2.0 / (math.pi * radius * radius)

    def pdf(x):
        return k * np.sqrt(np.clip(radius * radius - (x - center) ** 2, 0.0, None))

    def cdf(x):
        s = np.clip((x - center) / radius, -1.0, 1.0)
        return 0.5 + (s * np.sqrt(1.0 - s * s) + np.arcsin(s)) / math.pi

    return EquilibriumMeasure("semicircle", ((lo, hi),), pdf, cdf, fit_edge_coefficient(pdf, lo, hi))


def arcsine(lo: float = 0.0, hi: float = 1.0) -> EquilibriumMeasure:
    if not hi > lo:
        raise ValidationError("need lo < hi")

    def pdf(x):
        inside = (x > lo) & (x < hi)
        out = np.zeros(np.shape(x))
        xi = x[inside]
        out[inside] = 1.0 / (math.pi * np.sqrt((xi - lo) * (hi - xi)))
        return out

    def cdf(x):
        frac = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
        return 2.0 / math.pi * np.arcsin(np.sqrt(frac))

    return EquilibriumMeasure("arcsine", ((lo, hi),), pdf, cdf, None)


def marchenko_pastur(alpha: float = 0.0, scale: float = 1.0) -> EquilibriumMeasure:
    """Limit of the rescaled Laguerre ensemble, potential x - alpha log x, times ``scale``.

    alpha = 0 is the square case, supported on [0, 4 scale].
    """
    if alpha < 0.0 or not scale > 0.0:
        raise ValidationError("need alpha >= 0 and scale > 0")
    root = math.sqrt(1.0 + alpha)
    lo, hi = scale * (root - 1.0) ** 2, scale * (root + 1.0) ** 2
    # rho(x) = sqrt((x - lo)(hi - x)) / (2 pi scale x), mass 1
    arc = _Arc(lo, hi, lambda x: 1.0 / (2.0 * math.pi * scale * x))
    return _from_arc("marchenko_pastur", arc)


def equilibrium_classical(kind: str, **params) -> EquilibriumMeasure:
    factories = {
        "semicircle": semicircle,
        "marchenko_pastur": marchenko_pastur,
        "arcsine": arcsine,
    }
    try:
        factory = factories[kind]
    except KeyError:
        raise ValidationError(f"unknown classical law {kind!r}") from None
    return factory(**params)


# ----------------------------------------------------------------------------
# polynomial potentials


def _derivative_coeffs(g: Sequence[float]) -> np.ndarray:
    """Ascending coefficients of V' for V = sum_k g[k-1] x^k."""
    g = np.asarray(g, dtype=float)
    return g * np.arange(1, g.size + 1)


def _cheb_of_dv(dv: np.ndarray, c: float, r: float) -> np.ndarray:
    """Chebyshev coefficients in s of V'(c + r s)."""
    shifted = np.zeros(1)
    basis = np.ones(1)
    lin = np.array([c, r])
    for coef in dv:
        shifted = P.polyadd(shifted, coef * basis)
        basis = P.polymul(basis, lin)
    return C.poly2cheb(shifted)


def _u_series(v: np.ndarray, s: np.ndarray) -> np.ndarray:
    """sum_{k>=1} v_k U_{k-1}(s)."""
    s = np.asarray(s, dtype=float)
    u_prev = np.zeros_like(s)
    u_cur = np.ones_like(s)
    out = np.zeros_like(s)
    for k in range(1, v.size):
        out += v[k] * u_cur
        u_prev, u_cur = u_cur, 2.0 * s * u_cur - u_prev
    return out


def _effective_potential_excess(V: np.ndarray, arcs_x, x: np.ndarray, edge: float) -> np.ndarray:
    """V(x) - 2 int log|x - y| rho(y) dy, minus its value at the right edge."""
    nodes, weights = np.polynomial.legendre.leggauss(400)
    theta = 0.5 * math.pi * (nodes + 1.0)
    wt = 0.5 * math.pi * weights
    ys, ws = [], []
    for arc, to_x in arcs_x:
        y = arc._y(theta)
        w = wt * arc._integrand(theta)
        for xv, wv in to_x(y, w):
            ys.append(xv)
            ws.append(wv)
    y = np.concatenate(ys)
    w = np.concatenate(ws)

    def phi(t):
        t = np.atleast_1d(t)
        vt = P.polyval(t, np.concatenate(([0.0], V)))
        logs = np.log(np.abs(t[:, None] - y[None, :]))
        return vt - 2.0 * (logs @ w)

    ref = phi(np.array([edge]))[0]
    return phi(x) - ref


def _outside_grid(support, span: float, dv: np.ndarray) -> np.ndarray:
    lo, hi = support[0][0], support[-1][1]
    # reach every other well of V as well as a margin around the support
    crit = [z.real for z in P.polyroots(dv) if abs(z.imag) < 1e-9] if dv.size > 1 else []
    right = max([hi + 3.0 * span] + [z + span for z in crit])
    left = min([lo - 3.0 * span] + [z - span for z in crit])
    pts = [np.linspace(hi, right, 400)[1:], np.linspace(left, lo, 400)[:-1]]
    for (_, b), (a, _) in zip(support[:-1], support[1:]):
        pts.append(np.linspace(b, a, 102)[1:-1])
    return np.concatenate(pts)


def _one_cut(g: np.ndarray, dv: np.ndarray, c: float, r: float):
    v = _cheb_of_dv(dv, c, r)
    v = np.concatenate((v, np.zeros(2)))
    lo, hi = c - r, c + r

    def h_of_x(x):
        return _u_series(v, (x - c) / r) / r

    arc = _Arc(lo, hi, lambda x: h_of_x(x) / (2.0 * math.pi))
    return arc, h_of_x


def _one_cut_candidates(g: np.ndarray, dv: np.ndarray) -> list[tuple[float, float]]:
    even = np.allclose(g[0::2], 0.0)
    if even:
        # V' odd: center 0 and v_1(r) r = 4 is a polynomial equation in r
        roots = np.roots(_even_radius_poly(dv))
        return [(0.0, float(z.real)) for z in roots if abs(z.imag) < 1e-9 and z.real > 0]
    out = []
    dpoly = P.Polynomial(dv)
    crit = dpoly.roots()
    vfun = P.Polynomial(np.concatenate(([0.0], g)))
    real_crit = [z.real for z in crit if abs(z.imag) < 1e-9]
    x0 = min(real_crit, key=lambda z: vfun(z)) if real_crit else 0.0
    curv = max(dpoly.deriv()(x0), 1e-3)
    for mult in (1.0, 0.5, 2.0, 0.25, 4.0):
        for shift in (0.0, -1.0, 1.0):
            guess = (x0 + shift * 2.0 / math.sqrt(curv), mult * 2.0 / math.sqrt(curv))

            def eqs(z):
                vv = _cheb_of_dv(dv, z[0], z[1])
                vv = np.concatenate((vv, np.zeros(2)))
                return [vv[0], vv[1] * z[1] - 4.0]

            sol = optimize.root(eqs, guess, method="hybr", options={"xtol": 1e-14})
            if sol.success and sol.x[1] > 0 and max(abs(np.asarray(eqs(sol.x)))) < 1e-10:
                out.append((float(sol.x[0]), float(sol.x[1])))
    return out


def _even_radius_poly(dv: np.ndarray) -> np.ndarray:
    """Coefficients (highest first) of r -> v_1(r) r - 4 for odd V'."""
    coeffs = np.zeros(dv.size + 2)
    for k, coef in enumerate(dv):
        if coef == 0.0:
            continue
        # x^k = r^k s^k; first Chebyshev coefficient of s^k
        t1 = C.poly2cheb(np.eye(k + 1)[k])
        if t1.size > 1:
            coeffs[k + 1] += coef * t1[1]
    coeffs[0] -= 4.0
    return coeffs[::-1]


def _two_cut_symmetric(g: np.ndarray):
    """Symmetric two-interval solution for even V = Q(x^2), or None."""
    # V'(z) = z p(z^2), p ascending
    dv = _derivative_coeffs(g)
    p = dv[1::2]
    p = np.concatenate((p, np.zeros(3)))[:3]

    def s_coeffs(A, B, n):
        ca = np.array([math.comb(2 * j, j) * (A / 4.0) ** j for j in range(n)])
        cb = np.array([math.comb(2 * j, j) * (B / 4.0) ** j for j in range(n)])
        return np.convolve(ca, cb)[:n]

    def eqs(z):
        A, B = z
        s = s_coeffs(A, B, 6)
        rho1 = sum(p[i] * s[i] for i in range(3))
        rho2 = sum(p[i] * s[i + 1] for i in range(3))
        return [rho1, rho2 - 2.0]

    sols = []
    for A0, B0 in ((0.5, 4.5), (0.1, 2.0), (1.0, 3.0), (0.05, 1.0), (2.0, 8.0)):
        sol = optimize.root(eqs, [A0, B0], method="hybr", options={"xtol": 1e-14})
        A, B = sol.x
        if sol.success and 0.0 < A < B and max(abs(np.asarray(eqs(sol.x)))) < 1e-10:
            sols.append((float(A), float(B)))
    if not sols:
        return None
    A, B = sols[0]
    s = s_coeffs(A, B, 6)
    # k(u) = sum over exponents e <= 0 of sum_{1 - i + j = e} p_i s_j, times u^-e
    k = np.zeros(3)
    for i in range(3):
        for j in range(6):
            e = 1 - i + j
            if e <= 0:
                k[-e] += p[i] * s[j]
    return A, B, k


def equilibrium_polynomial(V) -> EquilibriumMeasure:
    """Equilibrium measure of a polynomial potential.

    ``V`` is a :class:`~betaforge.gibbs.PolynomialPotential` or a sequence
    ``(g_1, ..., g_d)``.  One-cut solutions are tried first (general or
    symmetric); for even potentials a symmetric two-cut solution follows.
    Asymmetric multi-cut cases raise UnsupportedPotential.
    """
    g = np.asarray(getattr(V, "g", V), dtype=float)
    while g.size > 1 and g[-1] == 0.0:
        g = g[:-1]
    if g.size < 2 or g.size % 2 or g[-1] <= 0.0:
        raise ValidationError("potential must have even degree >= 2 and positive leading coefficient")
    dv = _derivative_coeffs(g)

    for c, r in sorted(_one_cut_candidates(g, dv), key=lambda cr: -cr[1]):
        arc, h = _one_cut(g, dv, c, r)
        s = np.linspace(-1.0, 1.0, 2001)
        if np.min(h(c + r * s)) < -1e-10:
            continue
        support = ((c - r, c + r),)
        excess = _effective_potential_excess(g, [(arc, lambda y, w: [(y, w)])], _outside_grid(support, r, dv), c + r)
        if np.min(excess) < -1e-6:
            continue
        return _from_arc("polynomial", arc)

    even = np.allclose(g[0::2], 0.0)
    if even:
        two = _two_cut_symmetric(g)
        if two is not None:
            A, B, k = two

            def phi_u(u):
                return np.abs(P.polyval(u, k)) / (4.0 * math.pi)

            arc = _Arc(A, B, phi_u)
            a_in, b_out = math.sqrt(A), math.sqrt(B)
            support = ((-b_out, -a_in), (a_in, b_out))

            def to_x(y, w):
                x = np.sqrt(y)
                return [(x, 0.5 * w), (-x, 0.5 * w)]

            # the arc carries mass 1/2; double it for the symmetric image
            doubled = _Arc(A, B, lambda u: 2.0 * phi_u(u))
            excess = _effective_potential_excess(g, [(doubled, to_x)], _outside_grid(support, b_out, dv), b_out)
            if np.min(excess) >= -1e-6 and np.min(P.polyval(np.linspace(A, B, 501), k)) >= -1e-10:
                total = 2.0 * arc.total

                def cdf(x):
                    x = np.asarray(x, dtype=float)
                    m = arc.mass_below(x * x) / total
                    return np.where(x >= 0.0, 0.5 + m, 0.5 - m)

                def pdf(x):
                    x = np.asarray(x, dtype=float)
                    # rho_x(x) = |x| rho_u(x^2) * 2 / 2
                    return 2.0 * np.abs(x) * arc.density(x * x) / total

                c_edge = fit_edge_coefficient(pdf, a_in, b_out)
                return EquilibriumMeasure("polynomial", support, pdf, cdf, c_edge)
    raise UnsupportedPotential("no one-cut or symmetric two-cut equilibrium found")
