import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betaforge.errors import (
    DuplicateAtoms,
    LengthMismatch,
    NonFinite,
    NonPositiveOffDiagonal,
    NotInUnitInterval,
    NotPositiveDefinite,
    SingularJacobian,
    ValidationError,
)
from betaforge.spectral import eig_with_weights
from betaforge.tridiag import (
    AtomicMeasure,
    CanonicalMoments,
    JacobiCoefficients,
    MomentVector,
    XiParams,
    ab_to_xi,
    build_jacobi,
    c_to_xi,
    canonical_jacobian_fd,
    favard_jacobian,
    favard_jacobian_fd,
    hankel_determinants,
    moments_from_atoms,
    monic_polynomials,
    stieltjes_from_atoms,
    vandermonde_squared,
    xi_jacobian_fd,
    xi_to_ab,
    xi_to_c,
)

from helpers import random_measure

# well-conditioned ranges: both inverse recursions subtract, so xi spanning
# many decades or c close to 1 amplify rounding beyond 1e-12
positive = st.floats(min_value=0.1, max_value=10.0)
unit = st.floats(min_value=0.01, max_value=0.99)


# -- build_jacobi -------------------------------------------------------------


def test_build_single():
    J = build_jacobi([0.0], [])
    assert J.n == 1 and J.b.size == 0


def test_build_valid_pair():
    J = build_jacobi([0.0, 0.0], [1.0])
    assert np.allclose(J.dense(), [[0, 1], [1, 0]])


def test_build_rejects_nonpositive():
    with pytest.raises(NonPositiveOffDiagonal):
        build_jacobi([0.0, 0.0], [-1.0])


def test_build_rejects_bad_shapes():
    with pytest.raises(LengthMismatch):
        build_jacobi([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(LengthMismatch):
        build_jacobi([], [])
    with pytest.raises(NonFinite):
        build_jacobi([np.nan], [])


def test_coefficients_are_read_only():
    J = build_jacobi([1.0, 2.0], [3.0])
    with pytest.raises(ValueError):
        J.a[0] = 5.0


# -- xi and canonical moments ---------------------------------------------------


def test_xi_to_ab_examples():
    J = xi_to_ab(XiParams([1, 2, 3]))
    assert np.array_equal(J.a, [1, 5]) and np.array_equal(J.b, [2])
    J = xi_to_ab(XiParams([7]))
    assert np.array_equal(J.a, [7]) and J.b.size == 0
    J = xi_to_ab(XiParams([1, 1, 1, 1, 1]))
    assert np.array_equal(J.a, [1, 2, 2]) and np.array_equal(J.b, [1, 1])


def test_ab_to_xi_examples():
    assert np.allclose(ab_to_xi(build_jacobi([1, 5], [2])).xi, [1, 2, 3])
    assert np.allclose(ab_to_xi(build_jacobi([7], [])).xi, [7])
    with pytest.raises(NotPositiveDefinite):
        ab_to_xi(build_jacobi([0, 0], [1]))


def test_c_to_xi_examples():
    assert np.allclose(c_to_xi(CanonicalMoments([0.5, 0.5, 0.5])).xi, [0.5, 0.25, 0.25])
    assert np.allclose(c_to_xi(CanonicalMoments([0.3])).xi, [0.3])
    assert np.allclose(c_to_xi(CanonicalMoments([1 / 3, 1 / 2, 1 / 4])).xi, [1 / 3, 1 / 3, 1 / 8])


def test_xi_to_c_examples():
    assert np.allclose(xi_to_c(XiParams([0.5, 0.25, 0.25])).c, [0.5, 0.5, 0.5])
    assert np.allclose(xi_to_c(XiParams([1 / 3, 1 / 3, 1 / 8])).c, [1 / 3, 1 / 2, 1 / 4])
    with pytest.raises(NotInUnitInterval):
        xi_to_c(XiParams([2.0]))


def test_parameter_validation():
    with pytest.raises(LengthMismatch):
        XiParams([1.0, 2.0])
    with pytest.raises(ValidationError):
        XiParams([1.0, -2.0, 1.0])
    with pytest.raises(NotInUnitInterval):
        CanonicalMoments([0.5, 1.0, 0.5])


@settings(max_examples=100, deadline=None)
@given(st.lists(positive, min_size=1, max_size=7).filter(lambda v: len(v) % 2 == 1))
def test_xi_ab_roundtrip(xi):
    back = ab_to_xi(xi_to_ab(XiParams(xi))).xi
    assert np.allclose(back, xi, rtol=1e-12, atol=0)


@settings(max_examples=100, deadline=None)
@given(st.lists(unit, min_size=1, max_size=7).filter(lambda v: len(v) % 2 == 1))
def test_c_xi_roundtrip(c):
    back = xi_to_c(c_to_xi(CanonicalMoments(c))).c
    assert np.allclose(back, c, rtol=1e-12, atol=0)


# -- atomic measures and the Stieltjes procedure --------------------------------


def test_atomic_measure_sorting_and_checks():
    mu = AtomicMeasure([-1.0, 2.0, 0.5], [0.2, 0.3, 0.5])
    assert np.array_equal(mu.atoms, [2.0, 0.5, -1.0])
    assert np.array_equal(mu.weights, [0.3, 0.5, 0.2])
    with pytest.raises(DuplicateAtoms):
        AtomicMeasure([1.0, 1.0], [0.5, 0.5])
    with pytest.raises(ValidationError):
        AtomicMeasure([1.0, 2.0], [0.5, 0.6])
    with pytest.raises(ValidationError):
        AtomicMeasure([1.0, 2.0], [1.5, -0.5])


def test_stieltjes_two_atoms():
    J = stieltjes_from_atoms(AtomicMeasure([1.0, -1.0], [0.5, 0.5]))
    assert np.allclose(J.a, [0, 0], atol=1e-15) and np.allclose(J.b, [1.0])


def test_stieltjes_three_atoms():
    J = stieltjes_from_atoms(AtomicMeasure([1.0, 0.0, -1.0], [1 / 3, 1 / 3, 1 / 3]))
    assert np.allclose(J.a, 0, atol=1e-15) and np.allclose(J.b, [2 / 3, 1 / 3])


def test_stieltjes_single_atom():
    J = stieltjes_from_atoms(AtomicMeasure([2.5], [1.0]))
    assert np.array_equal(J.a, [2.5]) and J.b.size == 0


def test_stieltjes_orthogonality(nprng):
    # the monic polynomials of the recovered coefficients are orthogonal under mu
    mu = random_measure(nprng, 6)
    J = stieltjes_from_atoms(mu)
    P = monic_polynomials(J, mu.atoms)[:-1]
    gram = (P * mu.weights) @ P.T
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) < 1e-12 * np.max(np.diag(gram))
    # norm identity: ||P_k||^2 = b_1 ... b_k
    expected = np.concatenate(([1.0], np.cumprod(J.b)))
    assert np.allclose(np.diag(gram), expected, rtol=1e-10)
    # P_N vanishes on the atoms
    PN = monic_polynomials(J, mu.atoms)[-1]
    assert np.max(np.abs(PN)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-5, 5), min_size=1, max_size=8),
    st.lists(st.floats(0.05, 5), min_size=7, max_size=7),
)
def test_favard_roundtrip_property(a, b):
    J = JacobiCoefficients(a, b[: len(a) - 1])
    s = eig_with_weights(J)
    back = stieltjes_from_atoms(AtomicMeasure(s.eigenvalues, s.weights))
    assert np.allclose(back.a, J.a, atol=1e-8)
    assert np.allclose(back.b, J.b, atol=1e-8)


# -- moments and Hankel determinants -------------------------------------------


def test_moment_examples():
    assert np.allclose(moments_from_atoms(AtomicMeasure([1, -1], [0.5, 0.5]), 3).m, [0, 1, 0])
    assert np.allclose(moments_from_atoms(AtomicMeasure([1.0], [1.0]), 2).m, [1, 1])
    assert np.allclose(moments_from_atoms(AtomicMeasure([2, 0], [0.25, 0.75]), 2).m, [0.5, 1])
    with pytest.raises(ValidationError):
        moments_from_atoms(AtomicMeasure([1.0], [1.0]), 0)


def test_hankel_two_atoms():
    mu = AtomicMeasure([-1.0, 1.0], [0.5, 0.5])
    even, _, _ = hankel_determinants(moments_from_atoms(mu, 3), 2)
    assert even == pytest.approx(1.0)
    assert vandermonde_squared(mu.atoms) * np.prod(mu.weights) == pytest.approx(1.0)


def test_hankel_single_atom():
    even, odd, bar = hankel_determinants(MomentVector([0.3]), 1)
    assert even == 1.0 and odd == pytest.approx(0.3) and bar == pytest.approx(0.7)


def test_hankel_needs_enough_moments():
    with pytest.raises(LengthMismatch):
        hankel_determinants(MomentVector([0.1, 0.2]), 2)


def test_hankel_unit_interval_identities(nprng):
    for _ in range(20):
        mu = random_measure(nprng, 3, 0.0, 1.0)
        even, odd, bar = hankel_determinants(moments_from_atoms(mu, 5), 3)
        assert odd == pytest.approx(even * np.prod(mu.atoms), rel=1e-6)
        assert bar == pytest.approx(even * np.prod(1.0 - mu.atoms), rel=1e-6)


def test_hankel_vandermonde_and_coefficients(nprng):
    for _ in range(20):
        n = int(nprng.integers(1, 7))
        mu = random_measure(nprng, n, -1.5, 1.5)
        even, _, _ = hankel_determinants(moments_from_atoms(mu, 2 * n - 1), n)
        lhs = vandermonde_squared(mu.atoms) * np.prod(mu.weights)
        J = stieltjes_from_atoms(mu)
        rhs = np.prod(J.b ** (n - np.arange(1, n)))
        assert even == pytest.approx(lhs, rel=1e-6)
        assert rhs == pytest.approx(lhs, rel=1e-6)


# -- positivity transport -------------------------------------------------------


def test_positivity_transport(nprng):
    for _ in range(20):
        pos = random_measure(nprng, 4, 0.05, 3.0)
        ab_to_xi(stieltjes_from_atoms(pos))
        mixed = AtomicMeasure(np.array([-0.5, 0.5, 1.0, 2.0]), np.full(4, 0.25))
        with pytest.raises(NotPositiveDefinite):
            ab_to_xi(stieltjes_from_atoms(mixed))
        inside = random_measure(nprng, 4, 0.02, 0.98)
        xi_to_c(ab_to_xi(stieltjes_from_atoms(inside)))
        outside = AtomicMeasure(np.array([0.2, 0.5, 1.5]), np.full(3, 1 / 3))
        with pytest.raises(NotInUnitInterval):
            xi_to_c(ab_to_xi(stieltjes_from_atoms(outside)))


# -- Jacobians -------------------------------------------------------------------


def test_favard_jacobian_single_atom():
    assert favard_jacobian_fd(AtomicMeasure([0.7], [1.0])) == pytest.approx(1.0, rel=1e-6)


def test_favard_jacobian_two_atoms():
    mu = AtomicMeasure([1.0, -1.0], [0.5, 0.5])
    assert favard_jacobian(mu) == pytest.approx(0.25)
    assert favard_jacobian_fd(mu) == pytest.approx(0.25, rel=1e-3)


def test_favard_jacobian_step_range():
    with pytest.raises(ValidationError):
        favard_jacobian_fd(AtomicMeasure([1.0, -1.0], [0.5, 0.5]), h=1e-2)


def test_favard_jacobian_random(nprng):
    for _ in range(10):
        n = int(nprng.integers(2, 5))
        mu = random_measure(nprng, n)
        assert favard_jacobian_fd(mu) == pytest.approx(favard_jacobian(mu), rel=1e-3)


def test_xi_and_canonical_jacobians(nprng):
    for _ in range(10):
        n = int(nprng.integers(1, 5))
        xi = nprng.uniform(0.2, 3.0, size=2 * n - 1)
        assert xi_jacobian_fd(XiParams(xi)) == pytest.approx(np.prod(xi[0 : 2 * n - 2 : 2]), rel=1e-3)
        c = nprng.uniform(0.05, 0.95, size=2 * n - 1)
        assert canonical_jacobian_fd(CanonicalMoments(c)) == pytest.approx(np.prod(1 - c[: 2 * n - 2]), rel=1e-3)


def test_singular_jacobian_detected():
    from betaforge.tridiag import fd_jacobian_det

    with pytest.raises(SingularJacobian):
        fd_jacobian_det(lambda z: np.array([z[0] + z[1], z[0] + z[1]]), [1.0, 2.0])
