from fractions import Fraction

import numpy as np
import pytest

from lauricella.parameters import (DomainError, InputError, aligned_configuration, classify,
                                   configuration, from_abc, from_alpha, lambdas, parse_scalar,
                                   widest_spacing)


def test_abc_to_exponents():
    pv = from_abc(0.3, [0.2, 0.5], 1.7)
    np.testing.assert_allclose(pv.values, [-1, -0.2, -0.5, 1.4, 0.3], atol=1e-15)
    a, b, c = pv.abc()
    assert abs(a - 0.3) < 1e-15 and abs(c - 1.7) < 1e-15
    np.testing.assert_allclose(b, [0.2, 0.5])


def test_exact_abc_keeps_fractions():
    pv = from_abc("1/3", ["1/2"], "2")
    assert pv.alpha == (Fraction(-3, 2), Fraction(-1, 2), Fraction(5, 3), Fraction(1, 3))
    assert all(pv.exact)


def test_parse_scalar_forms():
    assert parse_scalar("3/4") == Fraction(3, 4)
    assert parse_scalar(2) == Fraction(2)
    assert parse_scalar(0.5) == 0.5 + 0j
    assert parse_scalar([1.0, -2.0]) == 1 - 2j
    for bad in ("x/y", True, float("nan"), [1, 2, 3]):
        with pytest.raises(InputError):
            parse_scalar(bad)


def test_sum_must_vanish():
    with pytest.raises(DomainError):
        from_alpha([1, 2, 3, 4])
    with pytest.raises(InputError):
        from_alpha([1, -1])


def test_lambdas_exact():
    lam = lambdas(from_alpha([3, "1/2", "-1/2", -3]))
    assert lam[0] == 1 and lam[1] == -1 and lam[3] == 1


def test_generic_classification_is_empty():
    cls = classify(from_alpha(["1/3", "1/5", "2/7", "-3/7", "-41/105"]))
    assert cls.iN0 == () and cls.iNeg == () and cls.r == cls.s == 0
    assert not cls.integral


def test_all_zero_classification():
    cls = classify(from_alpha([0, 0, 0, 0, 0]))
    assert cls.iN0 == (0, 1, 2)
    assert cls.iNeg == (3, 4)
    assert cls.r == 3 and cls.s == 2 and cls.integral


def test_integer_at_infinity_uses_shifted_order():
    # at infinity an exponent of 0 counts as a pole of the divisor side
    cls = classify(from_alpha(["1/3", 1, "-4/3", 0]))
    assert 3 in cls.iNeg and 1 in cls.iN0
    cls = classify(from_alpha(["1/3", -2, "2/3", 1]))
    assert 3 in cls.iN0 and cls.case == "B"


def test_near_integer_float_warns():
    cls = classify(from_alpha([1 + 1e-12, -1e-12, 0.5, -1.5]))
    assert cls.iZc == (0, 1, 2, 3)
    assert cls.warnings


def test_aligned_generic_spacing():
    cls = classify(from_alpha(["1/3", "1/5", "2/7", "-3/7", "-41/105"]))
    x = aligned_configuration(cls, spacing=0.3)
    np.testing.assert_allclose(np.real(x.x), [0.3, 0.6])
    assert x.aligned


def test_aligned_configuration_respects_linear_order():
    for alpha in ([0, 0, 0, 0, 0], [0, 0, 0, 1, -1], [-1, "1/3", 0, 1, "3/7", "-16/21"]):
        cls = classify(from_alpha(alpha))
        x = aligned_configuration(cls)
        pts = list(x.finite_sites.real)
        seq = [i for i in cls.linear_order() if i != cls.m + 2]
        assert all(pts[a] < pts[b] for a, b in zip(seq, seq[1:]))


def test_widest_spacing_fills_unit_interval():
    cls = classify(from_alpha([3, 3, -2, -3, 1, -2]))
    h = widest_spacing(cls)
    pts = sorted(aligned_configuration(cls, h).finite_sites.real)
    assert h == 0.5
    np.testing.assert_allclose(np.diff(pts), h)
    generic = classify(from_alpha(["1/3", "1/5", "2/7", "-3/7", "-41/105"]))
    assert widest_spacing(generic) == pytest.approx(1 / 3)


def test_unrealizable_order_raises():
    with pytest.raises(DomainError):
        aligned_configuration(classify(from_alpha([-1, "1/2", 2, "-3/2"])))


def test_coincident_points_rejected():
    with pytest.raises(DomainError):
        configuration([0.5, 0.5])
    with pytest.raises(DomainError):
        configuration([1.0])
