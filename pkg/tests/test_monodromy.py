import numpy as np
import pytest

from lauricella.chains import generator_pairs, intersection_matrix_h
from lauricella.monodromy import (all_circuit_matrices, check_generator, circuit_matrix,
                                  classify_representation, continuation_residuals,
                                  fixed_space_defect, parse_pairs, reflection_defect)
from lauricella.parameters import DomainError, classify, from_alpha
from strata import STRATA, random_cls
from tables import four_one_one_h, reducible_four_one_one, reducible_two_two, table_deviation


def _two_two(rng):
    a0 = rng.uniform(0.05, 0.95)
    return classify(from_alpha([a0, 1, 2, -1, -2, -a0]))


def _four_one_one(rng):
    a0, a3, a4 = rng.uniform(0.05, 0.95, 3)
    return classify(from_alpha([a0, 1, -2, a3, a4, -(a0 + 1 - 2 + a3 + a4)]))


def test_table_two_two():
    rng = np.random.default_rng(0)
    for _ in range(3):
        cls = _two_two(rng)
        np.testing.assert_array_equal(intersection_matrix_h(cls), np.eye(4))
        assert table_deviation(cls, reducible_two_two(cls.lam[0])) <= 1e-12


def test_table_four_one_one():
    rng = np.random.default_rng(1)
    for _ in range(3):
        cls = _four_one_one(rng)
        L = cls.lam
        assert np.max(np.abs(intersection_matrix_h(cls) - four_one_one_h(L[3], L[4]))) <= 1e-12
        assert table_deviation(cls, reducible_four_one_one(L[0], L[3], L[4])) <= 1e-12


@pytest.mark.parametrize("stratum", STRATA)
def test_circuit_invariants(stratum):
    rng = np.random.default_rng(2)
    for m in (1, 2, 3):
        cls = random_cls(rng, m, stratum)
        H = intersection_matrix_h(cls)
        lam = cls.lam
        for c in all_circuit_matrices(cls, H):
            mu = lam[c.p] * lam[c.q]
            assert abs(c.det - mu) <= 1e-10
            assert fixed_space_defect(c, H, rng) <= 1e-12
            if abs(1 - mu) > 1e-8:
                assert reflection_defect(c, cls) <= 1e-10


def test_degenerate_cell_gives_identity():
    cls = classify(from_alpha([0, 0, 0, 0, 0]))
    c = circuit_matrix(0, 1, cls)
    np.testing.assert_allclose(c.M, np.eye(3))


def test_generator_checks():
    cls = classify(from_alpha([0, 0, 0, 0, 0]))
    with pytest.raises(DomainError):
        check_generator(0, 3, cls)
    assert parse_pairs("all", 2) == generator_pairs(2)
    assert parse_pairs("1,2;0,1", 2) == [(1, 2), (0, 1)]


def test_all_zero_is_reducible_not_trivial():
    rep = classify_representation(classify(from_alpha([0, 0, 0, 0, 0])))
    assert rep.reducible and not rep.trivial
    assert rep.witnesses and max(w.defect for w in rep.witnesses) <= 1e-12


@pytest.mark.parametrize("alpha", [[1, 1, 1, 1, -4], [-1, -1, -1, -1, 4], [1, 1, 1, 1, 1, -5]])
def test_trivial_strata(alpha):
    cls = classify(from_alpha(alpha))
    rep = classify_representation(cls)
    assert rep.trivial and rep.max_identity_defect == 0


def test_generic_has_no_witness():
    rep = classify_representation(classify(from_alpha(["1/3", "1/5", "2/7", "-3/7", "-41/105"])))
    assert not rep.reducible and not rep.witnesses


def test_two_noninteger_sites_reducible_via_coordinate_lines():
    cls = classify(from_alpha([1, 0, "1/3", 2, "-10/3"]))
    rep = classify_representation(cls)
    assert rep.reducible
    assert rep.witnesses and all(w.kind == "coordinate-line" for w in rep.witnesses)
    assert max(w.defect for w in rep.witnesses) <= 1e-12


@pytest.mark.parametrize("stratum", STRATA)
def test_witnesses_are_invariant(stratum):
    rng = np.random.default_rng(3)
    for m in (1, 2, 3):
        for _ in range(4):
            cls = random_cls(rng, m, stratum)
            rep = classify_representation(cls)
            if stratum == "generic":
                continue
            assert rep.reducible and rep.witnesses
            for w in rep.witnesses:
                assert 0 < w.basis.shape[1] < m + 1
                assert w.defect <= 1e-12


def test_continuation_matches_circuit_matrix():
    cls = classify(from_alpha(["13/100", "21/100", "37/100", "-29/100", "-42/100"]))
    res = continuation_residuals(cls)
    assert len(res) == len(generator_pairs(2))
    assert max(r.residual for r in res) <= 1e-6
