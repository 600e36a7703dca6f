# tests/test_presentation_utils.py
import sys
import os

import pytest
from pydantic import ValidationError

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.presentation_utils import (
    Presentation,
    PresentationError,
    Relation,
    normalize,
    parse_presentation,
)


def test_parse_presentation_basic():
    # Arrange
    text = "# demo\nletters: a b c\nrel: cbb = bba\nrel: bc = ab  # trailing comment\n"

    # Act
    p = parse_presentation(text, name="demo")

    # Assert
    assert p.name == "demo"
    assert p.alphabet == ("a", "b", "c")
    assert [(r.lhs, r.rhs) for r in p.relations] == [((2, 1, 1), (1, 1, 0)), ((1, 2), (0, 1))]
    assert p.identification == (0, 1, 2)


def test_parse_chain_gives_adjacent_pairs():
    # Act
    p = parse_presentation("letters: a b c\nrel: a^2 = b^2 = c^2\n")

    # Assert
    assert [(r.lhs, r.rhs) for r in p.relations] == [((0, 0), (1, 1)), ((1, 1), (2, 2))]


def test_inhomogeneous_relation_reports_line_and_column():
    # Act & Assert
    with pytest.raises(PresentationError) as excinfo:
        parse_presentation("letters: a b\nrel: ab = a\n")

    assert excinfo.value.line == 2
    assert excinfo.value.column > 0
    assert "inhomogeneous" in excinfo.value.message


def test_unknown_letter_is_a_presentation_error():
    with pytest.raises(PresentationError) as excinfo:
        parse_presentation("letters: a b\nrel: ab = bx\n")

    assert excinfo.value.line == 2


@pytest.mark.parametrize("text", [
    "rel: ab = ba\n",
    "letters: a b\nfoo: bar\n",
    "letters: a b\nletters: c\n",
    "letters: a a\n",
    "letters: a b\nrel: ab\n",
    "",
])
def test_malformed_presentations(text):
    with pytest.raises(PresentationError):
        parse_presentation(text)


def test_trivial_relation_is_dropped():
    # Act
    p = parse_presentation("letters: a b\nrel: ab = ab\nrel: ab = ba\n")

    # Assert
    assert len(p.relations) == 1


def test_relation_model_validation():
    with pytest.raises(ValidationError):
        Relation(lhs=(0, 1), rhs=(0,))
    with pytest.raises(ValidationError):
        Relation(lhs=(0,), rhs=(0,))


def test_presentation_rejects_out_of_range_letters():
    with pytest.raises(ValidationError):
        Presentation(alphabet=("a",), relations=(Relation(lhs=(0, 1), rhs=(1, 0)),))


def test_normalize_absorbs_length_one_relations():
    # Arrange
    p = parse_presentation("letters: a b c\nrel: aba = bab\nrel: b = c\nrel: aca = cac\n")

    # Act
    q = normalize(p)

    # Assert
    assert q.identification == (0, 1, 1)
    assert q.representatives == (0, 1)
    # aca = cac rewrites to aba = bab and is dropped as a duplicate
    assert [(r.lhs, r.rhs) for r in q.relations] == [((0, 1, 0), (1, 0, 1))]
    assert q.is_normalized
    assert not p.is_normalized


def test_normalize_collapses_chain_to_one_class():
    # Act
    q = normalize(parse_presentation("letters: a b c\nrel: a = b = c\n"))

    # Assert
    assert q.identification == (0, 0, 0)
    assert q.relations == ()


def test_read_word_maps_to_representatives():
    # Arrange
    q = normalize(parse_presentation("letters: a b c\nrel: b = c\n"))

    # Act & Assert
    assert q.read_word("acb") == (0, 1, 1)
    with pytest.raises(PresentationError):
        q.read_word("az")


def test_fingerprint_depends_on_relations():
    # Arrange
    p1 = parse_presentation("letters: a b\nrel: ab = ba\n")
    p2 = parse_presentation("letters: a b\nrel: aab = aba\n")

    # Assert
    assert p1.fingerprint != p2.fingerprint
    assert p1.fingerprint == parse_presentation("letters: a b\nrel: ab = ba\n").fingerprint
