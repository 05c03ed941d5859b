import math

import numpy as np
import pytest
from scipy import integrate, stats

from betaforge.ensembles import EnsembleSpec, Hermite, sample_coefficients, sample_ensemble
from betaforge.errors import NotLogConcave, ValidationError
from betaforge.gibbs import (
    ConditionalDensity,
    GibbsChain,
    MalaSettings,
    PolynomialPotential,
    conditional_for_a,
    conditional_for_b,
    devroye_envelope,
    devroye_sample,
    devroye_sample_trials,
    gibbs_pass,
    mala_log_proposal,
    mala_run,
    mala_update,
    mh_log_ratio,
    power_traces,
    run_chain,
    trace_potential,
)
from betaforge.rng import RngStream
from betaforge.spectral import tridiag_eigvals
from betaforge.stats import equilibrium_polynomial, ks_distance, ks_two_sample
from betaforge.tridiag import JacobiCoefficients


def random_potential(gen, sextic):
    g = gen.normal(size=6) * 0.5
    g[4] = 0.0
    if sextic:
        g[5] = abs(g[5]) + 0.1
    else:
        g[5] = 0.0
        g[3] = abs(g[3]) + 0.1
    return PolynomialPotential(tuple(g))


def random_state(gen, n):
    return gen.normal(size=n), gen.gamma(2.0, 0.5, size=n - 1)


def numeric_cdf(d, lo, hi, m=40001):
    x = np.linspace(lo, hi, m)
    lp = d.logpdf(x)
    f = np.exp(lp - np.max(lp[np.isfinite(lp)]))
    c = integrate.cumulative_trapezoid(f, x, initial=0.0)
    c /= c[-1]
    return lambda t: np.interp(t, x, c)


# -- potentials and traces ------------------------------------------------------


def test_potential_validation():
    with pytest.raises(ValidationError):
        PolynomialPotential((0, 0, 0, 1, 1, 1))
    with pytest.raises(ValidationError):
        PolynomialPotential((0, 1, 0, -1))
    with pytest.raises(ValidationError):
        PolynomialPotential((0, 0, 1))
    with pytest.raises(ValidationError):
        PolynomialPotential((0, -1))
    assert PolynomialPotential((0, 0.5)).degree == 2
    assert PolynomialPotential.sextic().degree == 6


def test_effective_coefficients():
    V = PolynomialPotential.quartic(rescale=True)
    assert np.allclose(V.effective(10, 2.0), [0, 0, 0, 2.5, 0, 0])
    assert np.allclose(PolynomialPotential.quartic().effective(10, 2.0), [0, 0, 0, 0.25, 0, 0])


def test_trace_examples():
    J = JacobiCoefficients([0.0, 0.0], [1.0])
    assert trace_potential(J, PolynomialPotential((0, 1))) == pytest.approx(2.0)
    gen = np.random.default_rng(1)
    a, b = random_state(gen, 6)
    J = JacobiCoefficients(a, b)
    assert trace_potential(J, PolynomialPotential((1,) + (0,) * 4 + (1e-300,))) == pytest.approx(a.sum())


def test_trace_quartic_against_eigenvalues(nprng):
    for _ in range(20):
        J = JacobiCoefficients(*random_state(nprng, 5))
        x = tridiag_eigvals(J.a, J.b)
        assert trace_potential(J, PolynomialPotential((0, 0, 0, 1))) == pytest.approx(np.sum(x**4), rel=1e-9)


def test_power_traces_against_dense(nprng):
    for n in range(1, 9):
        J = JacobiCoefficients(*random_state(nprng, n))
        D = J.dense()
        P = np.eye(n)
        p = power_traces(J)
        for k in range(1, 7):
            P = P @ D
            assert p[k] == pytest.approx(np.trace(P), rel=1e-10, abs=1e-10)


def test_trace_potential_random(nprng):
    for _ in range(20):
        V = random_potential(nprng, sextic=True)
        J = JacobiCoefficients(*random_state(nprng, int(nprng.integers(1, 8))))
        x = tridiag_eigvals(J.a, J.b)
        assert trace_potential(J, V) == pytest.approx(np.sum(V(x)), rel=1e-9, abs=1e-9)


# -- conditionals ------------------------------------------------------------------


def test_quartic_a_conditional_example():
    V = PolynomialPotential.quartic(g4=1.0)
    d = conditional_for_a(2, JacobiCoefficients([0, 0, 0], [1, 1]), V, 2.0)
    assert np.allclose(d.poly, [0, 8, 0, 1, 0, 0], atol=1e-12)


def test_quartic_b_conditional_example():
    V = PolynomialPotential.quartic(g4=1.0)
    J = JacobiCoefficients([0.0] * 5, [1e-300, 1.0, 1e-300, 1.0])
    d = conditional_for_b(2, J, V, 2.0)
    assert d.shape == 3.0
    assert np.allclose(d.poly, [0, 2, 0, 0, 0, 0], atol=1e-12)


def test_quartic_conditionals_closed_form(nprng):
    for _ in range(30):
        g2, g4 = nprng.normal(), abs(nprng.normal()) + 0.1
        V = PolynomialPotential.quartic(g4=g4, g2=g2)
        n_tot = int(nprng.integers(2, 8))
        a, b = random_state(nprng, n_tot)
        J = JacobiCoefficients(a, b)
        ap = np.concatenate(([0.0], a, [0.0]))
        bp = np.concatenate(([0.0], b, [0.0]))
        n = int(nprng.integers(1, n_tot + 1))
        d = conditional_for_a(n, J, V, 2.0)
        lin = 4 * g4 * (ap[n - 1] * bp[n - 1] + ap[n + 1] * bp[n])
        quad = g2 + 4 * g4 * (bp[n - 1] + bp[n])
        assert np.allclose(d.poly, [lin, quad, 0, g4, 0, 0], atol=1e-10)
        n = int(nprng.integers(1, n_tot))
        d = conditional_for_b(n, J, V, 1.3)
        lin = 2 * (g2 + 2 * g4 * (ap[n] ** 2 + ap[n] * ap[n + 1] + ap[n + 1] ** 2 + bp[n - 1] + bp[n + 1]))
        assert np.allclose(d.poly, [lin, 2 * g4, 0, 0, 0, 0], atol=1e-10)
        assert d.shape == pytest.approx(0.65 * (n_tot - n))


def test_quadratic_conditionals_decouple(nprng):
    V = PolynomialPotential((0, 0.7))
    for _ in range(10):
        J = JacobiCoefficients(*random_state(nprng, 5))
        assert np.allclose(conditional_for_a(3, J, V, 2.0).poly, [0, 0.7, 0, 0, 0, 0], atol=1e-12)
        assert np.allclose(conditional_for_b(2, J, V, 2.0).poly, [1.4, 0, 0, 0, 0, 0], atol=1e-12)


def test_conditionals_against_direct_trace(nprng):
    for case in range(100):
        V = random_potential(nprng, sextic=case % 2 == 0)
        n_tot = int(nprng.integers(1, 9))
        a, b = random_state(nprng, n_tot)
        n = int(nprng.integers(1, n_tot + 1))
        d = conditional_for_a(n, JacobiCoefficients(a, b), V, 2.0)

        def tr_a(t):
            a2 = a.copy()
            a2[n - 1] = t
            return trace_potential(JacobiCoefficients(a2, b), V)

        for t in nprng.normal(size=20) * 1.5:
            ref = tr_a(t) - tr_a(0.0)
            got = -float(d.logpdf(t))
            assert abs(got - ref) <= 1e-8 * max(1.0, abs(ref))
        if n_tot == 1:
            continue
        n = int(nprng.integers(1, n_tot))
        d = conditional_for_b(n, JacobiCoefficients(a, b), V, 2.0)

        def tr_b(t):
            b2 = b.copy()
            b2[n - 1] = t
            return trace_potential(JacobiCoefficients(a, b2), V)

        t0 = 0.8
        for t in nprng.gamma(2.0, 0.5, size=20):
            ref = (tr_b(t) - (d.shape - 1) * math.log(t)) - (tr_b(t0) - (d.shape - 1) * math.log(t0))
            got = -float(d.logpdf(t) - d.logpdf(t0))
            assert abs(got - ref) <= 1e-8 * max(1.0, abs(ref))


def test_markov_blanket_locality(nprng):
    for V in (PolynomialPotential.quartic(g2=0.3), PolynomialPotential.sextic(g4=-0.2)):
        half = V.degree // 2
        n_tot, n = 12, 6
        a, b = random_state(nprng, n_tot)
        base_a = conditional_for_a(n, JacobiCoefficients(a, b), V, 2.0).poly
        base_b = conditional_for_b(n, JacobiCoefficients(a, b), V, 2.0).poly
        for j in range(1, n_tot + 1):
            a2 = a.copy()
            a2[j - 1] += 0.37
            if abs(j - n) > half:
                assert conditional_for_a(n, JacobiCoefficients(a2, b), V, 2.0).poly.tobytes() == base_a.tobytes()
            # b_n couples indices n and n+1
            if j < n - half + 1 or j > n + half:
                assert conditional_for_b(n, JacobiCoefficients(a2, b), V, 2.0).poly.tobytes() == base_b.tobytes()


def test_conditional_index_checks():
    J = JacobiCoefficients([0.0, 0.0], [1.0])
    V = PolynomialPotential((0, 1))
    with pytest.raises(ValidationError):
        conditional_for_a(0, J, V, 2.0)
    with pytest.raises(ValidationError):
        conditional_for_a(3, J, V, 2.0)
    with pytest.raises(ValidationError):
        conditional_for_b(2, J, V, 2.0)
    with pytest.raises(ValidationError):
        ConditionalDensity("c", 1, [1.0])
    with pytest.raises(ValidationError):
        ConditionalDensity("b", 1, [1.0], 0.0)


# -- Devroye ---------------------------------------------------------------------

GAUSS = ConditionalDensity("a", 1, [0, 0.5])
QUARTIC = ConditionalDensity("a", 1, [0, 0, 0, 1])


def test_envelope_widths():
    assert devroye_envelope(GAUSS).v == pytest.approx(math.sqrt(2 * math.log(4)) / 2, abs=1e-10)
    assert devroye_envelope(GAUSS).mode == pytest.approx(0.0, abs=1e-12)
    assert devroye_envelope(QUARTIC).v == pytest.approx(math.log(4) ** 0.25 / 2, abs=1e-10)


DEVROYE_CASES = [
    (GAUSS, -10, 10),
    (QUARTIC, -4, 4),
    (ConditionalDensity("a", 1, [-3.0, 2.0, 0.5, 1.0]), -6, 6),
    (ConditionalDensity("b", 1, [-2.0, 1.0], 3.0), 0, 12),
    (ConditionalDensity("b", 1, [1.0], 1.0), 0, 40),
    (ConditionalDensity("b", 1, [-1.0, 0.5], 1.0), 0, 12),
    (ConditionalDensity("b", 1, [0.0, 0.1, 0.5], 1.2), 0, 8),
]


@pytest.mark.parametrize("d, lo, hi", DEVROYE_CASES)
def test_envelope_dominates(d, lo, hi):
    env = devroye_envelope(d)
    x = np.random.default_rng(0).uniform(lo, hi, size=1000)
    assert np.all(env.log_h(x) >= d.logpdf(x) - env.log_mode - 1e-12)
    z = integrate.quad(lambda t: math.exp(d.logpdf(t) - env.log_mode), lo, hi, limit=200, points=[env.mode])[0]
    assert env.mass() / z <= 5.0


@pytest.mark.parametrize("d, lo, hi", DEVROYE_CASES)
def test_devroye_distribution(d, lo, hi):
    r = RngStream(31)
    draws = np.empty(100_000)
    trials = 0
    for i in range(draws.size):
        draws[i], t = devroye_sample_trials(d, r)
        trials += t
    assert draws.size / trials >= 0.2
    assert ks_distance(draws, numeric_cdf(d, lo, hi)) <= 0.02


def test_devroye_gamma_conditional():
    # V = g2 x^2 gives b ~ Gamma(gamma, 1 / (2 g2))
    d = conditional_for_b(1, JacobiCoefficients([0.3, -0.2, 0.1], [0.5, 2.0]), PolynomialPotential((0, 0.8)), 2.0)
    r = RngStream(5)
    x = np.array([devroye_sample(d, r) for _ in range(50_000)])
    assert stats.kstest(x, stats.gamma(d.shape, scale=1 / 1.6).cdf).statistic <= 0.01


def test_not_log_concave():
    with pytest.raises(NotLogConcave):
        devroye_sample(ConditionalDensity("a", 1, [0, -1, 0, 1]), RngStream(1))
    with pytest.raises(NotLogConcave):
        devroye_envelope(ConditionalDensity("b", 1, [1.0], 0.5))
    with pytest.raises(NotLogConcave):
        devroye_envelope(ConditionalDensity("a", 1, [0, 1, 0, 0, 0, 1]))
    assert ConditionalDensity("a", 1, [0, 0, 0, 0.25]).is_log_concave()


# -- MALA ------------------------------------------------------------------------


def test_mala_vanishing_step():
    _, acc = mala_run(GAUSS, 0.3, 1e-6, 10_000, RngStream(2))
    assert acc / 10_000 >= 0.999


def test_gaussian_drift():
    h, x = 0.3, 1.7
    # the proposal density peaks at x + h^2/2 * grad = x - h^2/2 * x
    assert mala_log_proposal(x - 0.5 * h * h * x, x, h, -x) == pytest.approx(0.0, abs=1e-15)
    assert mala_log_proposal(x, x, h, -x) < 0.0


def test_mala_quartic_conditional_moments():
    d = ConditionalDensity("a", 1, [0, 8, 0, 1])
    r = RngStream(3)
    x, chain = 0.0, []
    for _ in range(200_000):
        x = mala_update(d, x, 0.35, 1, r)
        chain.append(x)
    chain = np.array(chain)
    f = lambda t, k: t**k * math.exp(-(t**4) - 8 * t * t)
    z = integrate.quad(f, -5, 5, args=(0,))[0]
    var = integrate.quad(f, -5, 5, args=(2,))[0] / z
    batches = chain.reshape(200, -1).mean(axis=1)
    se = batches.std(ddof=1) / math.sqrt(batches.size)
    assert abs(chain.mean()) <= 3 * se
    assert chain.var() == pytest.approx(var, rel=0.05)


def test_mala_log_coordinates_for_b():
    d = ConditionalDensity("b", 1, [2.0], 0.5)
    r = RngStream(4)
    x, out = 1.0, []
    for _ in range(10_000):
        x = mala_update(d, x, 1.0, 20, r)
        assert x > 0.0
        out.append(x)
    assert stats.kstest(out, stats.gamma(0.5, scale=0.5).cdf).statistic <= 0.03


def test_mala_detailed_balance_three_points():
    d = ConditionalDensity("a", 1, [0.4, 1.0, -0.3, 0.8])
    x = np.array([-0.6, 0.1, 0.9])
    h = 0.8
    logpi = d.logpdf(x)
    grad = -np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(np.concatenate(([0], d.poly))))
    logq = np.array([[mala_log_proposal(x[j], x[i], h, grad[i]) for j in range(3)] for i in range(3)])
    logq -= np.log(np.exp(logq).sum(axis=1, keepdims=True))
    P = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            if i != j:
                r = mh_log_ratio(logpi[j], logpi[i], logq[j, i], logq[i, j])
                P[i, j] = math.exp(logq[i, j]) * min(1.0, math.exp(r))
        P[i, i] = 1.0 - P[i].sum()
    pi = np.exp(logpi - logpi.max())
    pi /= pi.sum()
    flow = pi[:, None] * P
    assert np.max(np.abs(flow - flow.T)) <= 1e-12


def test_mala_argument_checks():
    with pytest.raises(ValidationError):
        mala_update(GAUSS, 0.0, 0.0, 1, RngStream(1))
    with pytest.raises(ValidationError):
        mala_update(ConditionalDensity("b", 1, [1.0], 1.0), -1.0, 0.1, 1, RngStream(1))


# -- chains ----------------------------------------------------------------------


def test_single_coefficient_chain():
    V = PolynomialPotential((0, 0.8))
    out = []
    for i in range(10_000):
        ch = GibbsChain.initial(1, V, 2.0, RngStream(6, i))
        out.append(gibbs_pass(ch).a[0])
    assert stats.kstest(out, stats.norm(scale=math.sqrt(1 / 1.6)).cdf).statistic <= 0.02


def test_one_pass_is_exact_for_quadratic_potential():
    V = PolynomialPotential((0, 0.5))
    spec = EnsembleSpec(Hermite(), 8, 2.0)
    gibbs, exact = [], []
    for i in range(2000):
        ch = GibbsChain(np.full(8, 3.0), np.full(7, 5.0), V, 2.0, RngStream(7, i))
        gibbs_pass(ch)
        gibbs.append(tridiag_eigvals(ch.a, ch.b)[-1])
        exact.append(sample_ensemble(spec, RngStream(8, i)).eigenvalues[-1])
    assert ks_two_sample(gibbs, exact) <= 0.05


def test_hermite_law_is_stationary():
    V = PolynomialPotential((0, 0.5))
    spec = EnsembleSpec(Hermite(), 8, 2.0)
    before, after = [], []
    for i in range(2000):
        J = sample_coefficients(spec, RngStream(9, i))
        before.append(tridiag_eigvals(J.a, J.b)[-1])
        ch = GibbsChain(J.a, J.b, V, 2.0, RngStream(10, i))
        for _ in range(5):
            gibbs_pass(ch)
        after.append(tridiag_eigvals(ch.a, ch.b)[-1])
    assert ks_two_sample(before, after) <= 0.05


def test_positivity_with_small_beta():
    # beta = 0.5 makes gamma < 1 for the last b's: those go through MALA in log b
    ch = GibbsChain.initial(12, PolynomialPotential.quartic(g2=-1.0), 0.5, RngStream(11))
    for _ in range(20):
        gibbs_pass(ch)
        assert np.all(ch.b > 0) and np.all(np.isfinite(ch.a))
    assert ch.counters[2] > 0


def test_run_chain_shape_and_determinism():
    V = PolynomialPotential.quartic()
    s1 = run_chain(GibbsChain.initial(7, V, 2.0, RngStream(12)), 3, 1)
    s2 = run_chain(GibbsChain.initial(7, V, 2.0, RngStream(12)), 3, 1)
    assert len(s1) == 3
    for x, y in zip(s1, s2):
        assert x.n == 7 and np.all(np.diff(x.eigenvalues) >= 0)
        assert x.eigenvalues.tobytes() == y.eigenvalues.tobytes()
    assert len(run_chain(GibbsChain.initial(4, V, 2.0, RngStream(1)), 6, 4)) == 1
    with pytest.raises(ValidationError):
        run_chain(GibbsChain.initial(4, V, 2.0, RngStream(1)), 0, 1)


def test_chain_validation():
    V = PolynomialPotential.quartic()
    with pytest.raises(ValidationError):
        GibbsChain(np.zeros(3), np.ones(1), V, 2.0, RngStream(1))
    with pytest.raises(ValidationError):
        GibbsChain(np.zeros(2), np.zeros(1), V, 2.0, RngStream(1))
    with pytest.raises(ValidationError):
        GibbsChain.initial(3, V, -1.0, RngStream(1))
    ch = GibbsChain.initial(3, V, 2.0, RngStream(1))
    assert np.all(ch.a == 0) and np.all(ch.b == 1e-3)


def test_step_adaptation_freezes():
    V = PolynomialPotential.sextic(rescale=True)
    ch = GibbsChain.initial(10, V, 2.0, RngStream(13), MalaSettings(steps_per_update=5))
    run_chain(ch, 10, 10)
    assert ch.adapt_passes == 1
    frozen = ch.log_step.copy()
    gibbs_pass(ch)
    assert np.array_equal(frozen, ch.log_step)


def test_quartic_chain_converges():
    V = PolynomialPotential.quartic(rescale=True)
    eq = equilibrium_polynomial(V)
    pooled = [run_chain(GibbsChain.initial(50, V, 2.0, RngStream(14, c)), 10, 10)[-1].eigenvalues for c in range(100)]
    assert ks_distance(np.concatenate(pooled), eq.cdf) <= 0.05


def test_two_cut_chain():
    V = PolynomialPotential.quartic(g2=-1.25, rescale=True)
    eq = equilibrium_polynomial(V)
    assert len(eq.support) == 2
    x = run_chain(GibbsChain.initial(1000, V, 2.0, RngStream(15)), 10, 10)[-1].eigenvalues
    assert ks_distance(x, eq.cdf) <= 0.07
