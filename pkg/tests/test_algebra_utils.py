# tests/test_algebra_utils.py
import sys
import os
from fractions import Fraction

import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.algebra_utils import (
    BRANCHES,
    Matrix2,
    NotInvertibleError,
    QuotientRing,
    RepresentationError,
    build_representation,
    commutator,
    nonabelian_witness,
    quotient_ring,
    sigma_intertwiners,
    verify_representation,
)


@pytest.fixture
def sixth_roots():
    return QuotientRing(["l"], ["l**2 - l + 1"], name="Q(zeta6)")


def test_primitive_sixth_root_cubes_to_minus_one(sixth_roots):
    # Arrange
    l = sixth_roots.generator("l")

    # Act & Assert
    assert l ** 3 == -1
    assert l ** 6 == 1
    assert l ** 2 == l - 1


def test_inverse(sixth_roots):
    # Arrange
    l = sixth_roots.generator("l")
    x = l + 2

    # Act
    y = x.inverse()

    # Assert
    assert x * y == 1
    assert l.inverse() == -(l ** 2)
    assert l ** -1 == l ** 5


def test_zero_not_invertible(sixth_roots):
    with pytest.raises(NotInvertibleError):
        sixth_roots.zero().inverse()


def test_scalar_coercion(sixth_roots):
    # Arrange
    l = sixth_roots.generator("l")

    # Act & Assert
    assert 1 - l == -(l - 1)
    assert (l * 3) / 3 == l
    assert Fraction(1, 2) + l == l + Fraction(1, 2)
    assert sixth_roots.element("l**2 + 1") == l


def test_tower_ring_relations():
    # Arrange
    ring = quotient_ring("H_ii", "i")
    l, p = ring.generator("l"), ring.generator("p")

    # Act & Assert
    assert ring.dimension == 4
    assert l ** 3 == 1
    assert 3 * p ** 2 + 3 * p + 2 == 0


def test_tower_elements_stay_in_normal_form():
    # Arrange
    ring = quotient_ring("H_ii", "ii")
    l, p = ring.generator("l"), ring.generator("p")
    x = 1 + l + p + l * p

    # Act
    y = x.inverse()
    cube = x ** 3

    # Assert
    assert x * y == 1
    assert y * x == ring.one()
    assert all(e_p < 2 and e_l < 2 for e_p, e_l in cube.poly.monoms())
    assert ring.multiplication_matrix(x.poly).shape == (4, 4)
    assert ring.multiplication_matrix(ring.one().poly).is_Identity
    assert ring.element("l**3") == -1


def test_non_monic_rejected():
    with pytest.raises(ValueError):
        QuotientRing(["l"], ["2*l**2 + 1"])


def test_matrix_inverse_and_power(sixth_roots):
    # Arrange
    l = sixth_roots.generator("l")
    m = Matrix2(l, sixth_roots.one(), sixth_roots.zero(), l.inverse())

    # Act & Assert
    assert (m * m.inverse()).is_identity
    assert m.det() == 1
    assert (m ** 2) * (m ** -2) == Matrix2.identity(sixth_roots)


def test_b_ii_matrices():
    # Arrange
    rep = build_representation("B_ii", "i")
    ring = rep.ring
    l = ring.generator("l")

    # Act
    value = commutator(rep.matrices["a"], rep.matrices["b"])

    # Assert
    assert rep.matrices["b"] == Matrix2(l, ring.zero(), ring.zero(), l.inverse())
    assert value == Matrix2(ring.one(), l ** 2 * (1 - l ** 2), ring.zero(), ring.one())


@pytest.mark.parametrize(
    "type_name, branch",
    [(type_name, branch) for type_name, branches in BRANCHES.items() for branch in branches],
)
def test_representations_satisfy_relations(type_name, branch):
    # Act
    report = verify_representation(type_name, branch)

    # Assert
    assert report.holds, [check.relation for check in report.relations if not check.holds]
    assert report.determinants_nonzero
    assert report.relations


@pytest.mark.parametrize("type_name, branch", [("B_ii", "i"), ("B_vi", "i"), ("H_ii", "i"), ("H_ii", "ii"), ("H_iii", "i")])
def test_representations_nonabelian(type_name, branch):
    # Act
    witness = nonabelian_witness(type_name, branch)

    # Assert
    assert witness.nonabelian
    assert witness.pair is not None


def test_b_ii_first_noncommuting_pair_is_a_b():
    assert nonabelian_witness("B_ii", "i").pair == ("A", "B")


def test_degenerate_branch_is_abelian():
    # Act
    witness = nonabelian_witness("B_ii", "degenerate")

    # Assert
    assert not witness.nonabelian
    assert witness.commutator is None


@pytest.mark.parametrize("branch, trace", [("i", -1), ("ii", 1)])
def test_h_ii_trace_and_determinant(branch, trace):
    # Arrange
    rep = build_representation("H_ii", branch)

    # Act & Assert
    for name in ("b", "c"):
        assert rep.matrices[name].det() == 1
        assert rep.matrices[name].trace() == trace


def test_h_iii_fifth_powers_agree():
    # Arrange
    rep = build_representation("H_iii", "i")

    # Act
    powers = [rep.matrices[name] ** 5 for name in ("a", "b", "c")]

    # Assert
    assert powers[0] == powers[1] == powers[2]


def test_identity_intertwiners_are_scalars():
    # Act
    report = sigma_intertwiners("B_ii", "i")

    # Assert
    assert report.dimensions["a->a,b->b,c->c"] == 1
    assert len(report.dimensions) == 6


def test_unknown_type_or_branch():
    with pytest.raises(RepresentationError):
        build_representation("A_i", "i")
    with pytest.raises(RepresentationError):
        build_representation("B_ii", "iii")


@pytest.mark.parametrize("branch", ["i", "ii"])
def test_h_ii_recorded_relation_erratum(branch):
    # Arrange
    rep = build_representation("H_ii", branch)

    # Act
    report = verify_representation("H_ii", branch)
    flagged = [check for check in report.relations if check.corrected]

    # Assert
    assert report.errata == ["bccabb=accaaa"]
    assert [check.corrected for check in flagged] == ["bcbabb = accaaa"]
    assert flagged[0].erratum
    assert rep.evaluate(list("bccabb")) != rep.evaluate(list("accaaa"))
    assert rep.evaluate(list("bcbabb")) == rep.evaluate(list("accaaa"))


def test_types_without_errata_report_none():
    # Act
    report = verify_representation("B_ii", "i")

    # Assert
    assert report.errata == []
    assert all(check.corrected is None for check in report.relations)
