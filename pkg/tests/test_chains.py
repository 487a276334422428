import numpy as np
import pytest

from lauricella.chains import (bases, bilinear_matrix_h, generator_pairs,
                               intersection_matrix_h, loop, pairing_matrix, path,
                               vanishing_pair, vanishing_pair_coords)
from lauricella.parameters import classify, from_alpha
from strata import STRATA, random_cls


def test_chain_arithmetic():
    c = path(1) - 2 * path(0) + path(0) * 2
    assert c.sites() == {1}
    assert (c - c).is_zero()
    with pytest.raises(ValueError):
        path(1) + path(1, dual=True)


def test_generic_m1_basis_shape():
    cls = classify(from_alpha(["1/3", "1/5", "2/7", "-86/105"]))
    b = bases(cls)
    lam = cls.lam
    i0, i1 = cls.ordered[0], cls.ordered[1]
    expected = loop(i1) - ((1 - lam[i1]) / (1 - lam[i0])) * loop(i0)
    assert (b.gamma[0] - expected).is_zero(1e-14)
    assert len(b.gamma) == len(b.delta) == 2


@pytest.mark.parametrize("stratum", STRATA)
def test_closed_form_matches_bilinear(stratum):
    rng = np.random.default_rng(11)
    for m in range(1, 6):
        for _ in range(8):
            cls = random_cls(rng, m, stratum)
            H = intersection_matrix_h(cls)
            assert np.max(np.abs(H - bilinear_matrix_h(cls))) <= 1e-12
            assert np.linalg.matrix_rank(H) == m + 1


def test_integral_h_is_identity():
    cls = classify(from_alpha([0, 0, 0, 0, 0]))
    np.testing.assert_array_equal(intersection_matrix_h(cls), np.eye(3))


def test_worked_example_pairings():
    # bases of the two worked integral examples give -E
    cls = classify(from_alpha([0, 0, 0, 0, 0]))
    g = (loop(3), path(1) - path(0), path(2) - path(0))
    d = (path(4, True) - path(3, True), loop(1, True), loop(2, True))
    np.testing.assert_array_equal(pairing_matrix(d, g, cls), -np.eye(3))
    cls = classify(from_alpha([0, 0, 0, 1, -1]))
    g = (path(0) - path(3), path(1) - path(3), path(2) - path(3))
    d = (loop(0, True), loop(1, True), loop(2, True))
    np.testing.assert_array_equal(pairing_matrix(d, g, cls), -np.eye(3))


def test_pairing_matrix_rectangular():
    cls = classify(from_alpha([0, 0, 0, 0, 0]))
    b = bases(cls)
    assert pairing_matrix(b.delta[:2], b.gamma, cls).shape == (2, 3)


def test_generator_pairs_exclude_zero_one():
    pairs = generator_pairs(3)
    assert (0, 4) not in pairs
    assert len(pairs) == 9
    assert all(0 <= p < q <= 4 for p, q in pairs)


def test_vanishing_pair_between_divisor_points_has_no_dual():
    cls = classify(from_alpha([0, 0, 0, 0, 0]))
    g, d = vanishing_pair(0, 1, cls)
    assert d.is_zero() and not g.is_zero()
    vp = vanishing_pair_coords(0, 1, cls)
    assert np.allclose(vp.z, 0)


@pytest.mark.parametrize("stratum", STRATA)
def test_vanishing_pair_reflection_constant(stratum):
    # z H y = 1 - lambda_p lambda_q for every generator
    rng = np.random.default_rng(5)
    for m in (1, 2, 3):
        cls = random_cls(rng, m, stratum)
        H = intersection_matrix_h(cls)
        lam = cls.lam
        for p, q in generator_pairs(m):
            vp = vanishing_pair_coords(p, q, cls, H)
            assert abs(vp.z @ H @ vp.y - (1 - lam[p] * lam[q])) < 1e-12
