"""Airy function Ai and its derivative in double precision.

Three regimes:

* |x| <= 4.5: Maclaurin series of the two fundamental solutions.
* |x| >= 8: the large-argument expansions (exponentially decaying for x > 0,
  oscillatory for x < 0), truncated at their smallest term.
* in between: Taylor steps of the Airy equation y'' = x y, started from the
  asymptotic values at x = +-8.  On the positive side the steps run toward
  the origin, where Ai is the growing solution, so errors do not amplify.
"""

from __future__ import annotations

import math

import numpy as np

AI0 = 0.35502805388781723926  # 3^(-2/3) / Gamma(2/3)
AIP0 = -0.25881940379280679840  # -3^(-1/3) / Gamma(1/3)

SERIES_RADIUS = 4.5
ASYMPTOTIC_RADIUS = 8.0
_TAYLOR_STEP = 0.25
_SQRT_PI = math.sqrt(math.pi)


def _maclaurin(x: float) -> tuple[float, float]:
    x3 = x * x * x
    f, fp = 1.0, 0.0
    g, gp = x, 1.0
    tf, tg = 1.0, x
    k = 0
    while True:
        k += 1
        tf *= x3 / ((3 * k - 1) * (3 * k))
        tg *= x3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        fp += 3 * k * tf / x
        gp += (3 * k + 1) * tg / x
        if abs(tf) + abs(tg) < 1e-18 * (abs(f) + abs(g)) and k > 3:
            break
    return AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp


def _asym_coeffs(n: int) -> tuple[list[float], list[float]]:
    u = [1.0]
    for k in range(1, n):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    v = [1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, n)]
    return u, v


_U, _V = _asym_coeffs(40)


def _sum_decaying(coeffs, zeta: float) -> float:
    total, term_prev = 0.0, math.inf
    for k, ck in enumerate(coeffs):
        term = (-1) ** k * ck / zeta**k
        if abs(term) > term_prev:
            break
        total += term
        term_prev = abs(term)
        if abs(term) < 1e-17 * abs(total):
            break
    return total


def _asymptotic_positive(x: float) -> tuple[float, float]:
    zeta = 2.0 / 3.0 * x * math.sqrt(x)
    e = math.exp(-zeta) / (2.0 * _SQRT_PI)
    q = x**0.25
    return e / q * _sum_decaying(_U, zeta), -e * q * _sum_decaying(_V, zeta)


def _osc_sums(coeffs, zeta: float) -> tuple[float, float]:
    even = odd = 0.0
    prev = math.inf
    for k, ck in enumerate(coeffs):
        term = ck / zeta**k
        if abs(term) > prev:
            break
        prev = abs(term)
        sign = (-1) ** (k // 2)
        if k % 2 == 0:
            even += sign * term
        else:
            odd += sign * term
        if abs(term) < 1e-17:
            break
    return even, odd


def _asymptotic_negative(x: float) -> tuple[float, float]:
    t = -x
    zeta = 2.0 / 3.0 * t * math.sqrt(t)
    phase = zeta - math.pi / 4.0
    c, s = math.cos(phase), math.sin(phase)
    q = t**0.25
    pu, qu = _osc_sums(_U, zeta)
    pv, qv = _osc_sums(_V, zeta)
    ai = (c * pu + s * qu) / (_SQRT_PI * q)
    aip = q * (s * pv - c * qv) / _SQRT_PI
    return ai, aip


def _taylor_step(x0: float, y: float, yp: float, h: float) -> tuple[float, float]:
    # Taylor coefficients T_n = y^(n)(x0) / n! of a solution of y'' = x y:
    # (n + 2)(n + 1) T_{n+2} = x0 T_n + T_{n-1}
    t_nm1, t_n, t_np1 = 0.0, y, yp
    val = y + yp * h
    der = yp
    hp = h
    n = 0
    while True:
        t_np2 = (x0 * t_n + t_nm1) / ((n + 2) * (n + 1))
        der += (n + 2) * t_np2 * hp
        hp *= h
        val += t_np2 * hp
        t_nm1, t_n, t_np1 = t_n, t_np1, t_np2
        n += 1
        if n > 8 and abs(t_np2 * hp) < 1e-18 * (abs(val) + 1e-300) and abs(t_n * hp) < 1e-18 * (abs(val) + 1e-300):
            break
        if n > 200:
            break
    return val, der


def _bridge(x: float) -> tuple[float, float]:
    x0 = math.copysign(ASYMPTOTIC_RADIUS, x)
    y, yp = _asymptotic_positive(x0) if x0 > 0 else _asymptotic_negative(x0)
    nsteps = max(1, math.ceil(abs(x - x0) / _TAYLOR_STEP))
    h = (x - x0) / nsteps
    for _ in range(nsteps):
        y, yp = _taylor_step(x0, y, yp, h)
        x0 += h
    return y, yp


def _airy_scalar(x: float) -> tuple[float, float]:
    if not math.isfinite(x):
        raise ValueError("airy requires a finite argument")
    ax = abs(x)
    if ax <= SERIES_RADIUS:
        return _maclaurin(x) if x != 0.0 else (AI0, AIP0)
    if ax >= ASYMPTOTIC_RADIUS:
        return _asymptotic_positive(x) if x > 0 else _asymptotic_negative(x)
    return _bridge(x)


def airy(x):
    """Return ``(Ai(x), Ai'(x))`` for a scalar or array argument."""
    if np.ndim(x) == 0:
        return _airy_scalar(float(x))
    arr = np.asarray(x, dtype=float)
    ai = np.empty(arr.shape)
    aip = np.empty(arr.shape)
    for idx, xi in np.ndenumerate(arr):
        ai[idx], aip[idx] = _airy_scalar(float(xi))
    return ai, aip
