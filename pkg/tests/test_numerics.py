import math

import mpmath
import numpy as np
import pytest

from lauricella.chains import bases, loop, path
from lauricella.cocycles import covariant_of_product, omega, phi0, simple_pole
from lauricella.connection import pfaffian_system
from lauricella.numerics import (QuadratureError, TwistedContext, adaptive_quad, continuation_matrix,
                                 continue_pfaffian, euler_check, euler_integral, fd_series,
                                 frame_periods, generator_loop, lhgs_residual, period,
                                 period_matrices, solution_vector, verify_tpr, wronskian)
from lauricella.parameters import (DomainError, PointConfiguration, aligned_configuration, classify,
                                   configuration, from_alpha, widest_spacing)
from strata import random_cls

FIXTURE = (0.3, [0.2, 0.5], 1.7, [0.1, 0.2])
X = configuration([0.3, 0.6])


def test_quadrature_polynomial_and_oscillatory():
    r = adaptive_quad(lambda s: s ** 5, 0.0, 2.0)
    assert abs(r.value - 64 / 6) < 1e-12
    r = adaptive_quad(lambda s: np.exp(40j * s), 0.0, 1.0)
    assert abs(r.value - (np.exp(40j) - 1) / 40j) < 1e-12


def test_quadrature_reversed_interval():
    f = lambda s: np.exp(40j * s)
    fwd = adaptive_quad(f, 0.0, 1.0)
    back = adaptive_quad(f, 1.0, 0.0)
    assert back.panels == fwd.panels
    assert abs(back.value + fwd.value) < 1e-13


def test_quadrature_gives_up():
    with pytest.raises(QuadratureError):
        adaptive_quad(lambda s: np.exp(1j / s ** 2), 1e-3, 1.0, max_panels=40)


def test_series_fixture_against_mpmath():
    a, b, c, x = FIXTURE
    ref = complex(mpmath.appellf1(a, b[0], b[1], c, x[0], x[1]))
    assert abs(fd_series(a, b, c, x) - ref) < 1e-14
    assert abs(fd_series(a, b, c, x) - 1.0229041327505373) < 1e-14


def test_series_one_variable_against_mpmath():
    for a, b, c, x in [(0.5, 0.25, 1.3, 0.7), (1.2, -0.4, 2.5, -0.6), (0.3 + 0.2j, 0.7, 1.1, 0.4j)]:
        ref = complex(mpmath.hyp2f1(a, b, c, x))
        assert abs(fd_series(a, [b], c, [x]) - ref) < 1e-12


def test_series_degenerate_arguments():
    assert fd_series(0.3, [0.2, 0.5], 1.7, [0, 0]) == 1
    assert fd_series(0.3, [0, 0], 1.7, [0.5, -0.4]) == 1


def test_series_symmetry_m1():
    assert abs(fd_series(0.3, [0.45], 1.7, [0.6]) - fd_series(0.45, [0.3], 1.7, [0.6])) < 1e-14


def test_euler_fixture_and_trivial_b():
    assert euler_check(*FIXTURE) <= 1e-8
    assert abs(euler_integral(0.3, [0, 0], 1.7, [0.1, 0.2]) - 1) <= 1e-10
    with pytest.raises(DomainError):
        euler_integral(1.9, [0.2], 1.7, [0.1])


def test_branch_consistency():
    # integrating omega around a small circle changes log u by 2 pi i alpha_i
    pv = from_alpha([0.15, 0.2, 0.3, 1.4, -2.05])
    w = omega(pv, X)
    for i, xi in enumerate(X.finite_sites):
        r = 0.05
        val = adaptive_quad(lambda th: w(xi + r * np.exp(1j * th)) * 1j * r * np.exp(1j * th),
                            0.0, 2 * math.pi).value
        assert abs(val - 2j * math.pi * pv.values[i]) < 1e-10


def test_context_rejects_complex_points():
    with pytest.raises(DomainError):
        TwistedContext(from_alpha([0.15, 0.2, 0.3, 1.4, -2.05]), configuration([0.3 + 0.1j, 0.6]))


def test_path_must_end_in_divisor():
    cls = classify(from_alpha([0.15, 0.2, 0.3, 1.4, -2.05]))
    with pytest.raises(DomainError):
        period(phi0(X), path(1), cls, X)


def test_homology_invariance():
    cls, x = random_cls(np.random.default_rng(3), 2, "generic", aligned=True)
    g = bases(cls).gamma[0]
    f = phi0(x)
    ref = period(f, g, cls, x, ctx=TwistedContext(cls.params, x, tol=1e-13)).value
    ctx_eps = TwistedContext(cls.params, x, eps=0.5 * 0.25 * x.min_gap(), tol=1e-13)
    ctx_base = TwistedContext(cls.params, x, base=complex(0.3, 2.5), tol=1e-13)
    for ctx in (ctx_eps, ctx_base):
        assert abs(period(f, g, cls, x, ctx=ctx).value - ref) <= 1e-9 * max(1.0, abs(ref))


def test_example_two_periods():
    x1, x2 = 0.3, 0.6
    pv = from_alpha([0, 0, 0, 1, -1])
    cls = classify(pv)
    phis = [phi0(X), covariant_of_product(pv, X, {3: 1}), covariant_of_product(pv, X, {3: 2})]
    psis = [simple_pole(X, i) for i in range(3)]
    g = (path(0) - path(3), path(1) - path(3), path(2) - path(3))
    d = (loop(0, True), loop(1, True), loop(2, True))
    pm = period_matrices(cls, X, phis, psis, g, d)
    Phi = np.array([[-1, x1 - 1, x2 - 1], [1, (x1 - 1) ** 2, (x2 - 1) ** 2], [-1, (x1 - 1) ** 3, (x2 - 1) ** 3]])
    Psi = 2j * np.pi * np.diag([-1, 1 / (x1 - 1), 1 / (x2 - 1)])
    assert np.max(np.abs(pm.Phi - Phi)) < 1e-8
    assert np.max(np.abs(pm.Psi - Psi)) < 1e-8


def test_tpr_small_sample():
    rng = np.random.default_rng(17)
    for stratum in ("generic", "partial", "integral"):
        cls, x = random_cls(rng, 2, stratum, aligned=True)
        assert verify_tpr(cls, x).residual <= 1e-6


def test_tpr_residual_tracks_round_off():
    # large alternating exponents: the products cancel by ten orders of magnitude,
    # so the absolute residual reflects double precision rather than the relation
    cls = classify(from_alpha([3, -3, 3, -3, -3, 3]))
    rep = verify_tpr(cls, aligned_configuration(cls, widest_spacing(cls)))
    assert np.abs(rep.periods.Phi).max() * np.abs(rep.periods.Psi).max() > 1e9
    assert rep.scaled_residual < 1e-13


def test_wronskian_and_differential_equations():
    rng = np.random.default_rng(23)
    for m in (1, 2):
        cls, x = random_cls(rng, m, "generic", aligned=True)
        assert abs(wronskian(cls, x)) > 1e-8
        assert lhgs_residual(cls, x) <= 1e-4


def test_constant_loop_is_identity():
    pv = from_alpha([0.15, 0.2, 0.3, 1.4, -2.05])
    N = continuation_matrix(pfaffian_system(pv), [X, X])
    np.testing.assert_array_equal(N, np.eye(3))


def test_trivial_stratum_continuation():
    cls = classify(from_alpha([1, 1, 1, 1, -4]))
    x = aligned_configuration(cls)
    sys_ = pfaffian_system(cls.params, "xi")
    for p, q in [(1, 2), (0, 1), (2, 3)]:
        N = continuation_matrix(sys_, generator_loop(p, q, x))
        assert np.max(np.abs(N - np.eye(3))) <= 1e-6


def test_periods_satisfy_r_system_along_a_leg():
    cls, x = random_cls(np.random.default_rng(31), 2, "generic", aligned=True)
    Y0 = frame_periods(cls, x)
    y = PointConfiguration(2, (x.x[0] + 0.01, x.x[1]))
    Y1 = continue_pfaffian(pfaffian_system(cls.params, "r"), [x, y], Y0)
    assert np.max(np.abs(Y1 - frame_periods(cls, y))) <= 1e-8 * np.max(np.abs(Y0))
    assert solution_vector(cls, x).shape == (3,)
