# tests/test_word_utils.py
import sys
import os

import numpy as np
import pytest
from hypothesis import given, strategies as st

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils import word_utils
from utils.word_utils import WordSyntaxError

NAMES = ("a", "b", "c")


def test_pack_orders_like_words():
    # Arrange
    words = [(0, 1, 2), (0, 2, 0), (1, 0, 0), (2, 2, 2)]

    # Act
    codes = [word_utils.pack(w) for w in words]

    # Assert
    assert codes == sorted(codes)
    assert word_utils.pack((2, 1)) == 0b1001


@given(st.lists(st.integers(min_value=0, max_value=3), max_size=16).map(tuple))
def test_unpack_inverts_pack(word):
    assert word_utils.unpack(word_utils.pack(word), len(word)) == word


def test_pack_rejects_large_letter():
    with pytest.raises(ValueError):
        word_utils.pack((4,))


def test_parse_word_plain_and_exponents():
    # Act & Assert
    assert word_utils.parse_word("abc", NAMES) == (0, 1, 2)
    assert word_utils.parse_word("a^5", NAMES) == (0,) * 5
    assert word_utils.parse_word("(cba)^2", NAMES) == (2, 1, 0, 2, 1, 0)
    assert word_utils.parse_word("(ab)^3c", NAMES) == (0, 1, 0, 1, 0, 1, 2)
    assert word_utils.parse_word("", NAMES) == ()
    assert word_utils.parse_word("1", NAMES) == ()


def test_parse_word_long_names():
    # Arrange
    names = ("s1", "s2")

    # Act
    word = word_utils.parse_word("s1 s2^2 s1", names)

    # Assert
    assert word == (0, 1, 1, 0)
    assert word_utils.format_word(word, names) == "s1 s2 s2 s1"


def test_parse_word_unknown_letter_reports_column():
    # Act & Assert
    with pytest.raises(WordSyntaxError) as excinfo:
        word_utils.parse_word("abd", NAMES)

    assert excinfo.value.column == 3


def test_window_and_shift():
    # Arrange
    word = (0, 1, 2, 1)
    code = word_utils.pack(word)

    # Act
    shift = word_utils.letter_shift(4, 1, 2)
    window = (code >> shift) & word_utils.window_mask(2)

    # Assert
    assert window == word_utils.pack((1, 2))


def test_universe_codes_are_sorted_and_complete():
    # Act
    codes = word_utils.universe_codes((0, 1, 2), 3)

    # Assert
    assert len(codes) == 27
    assert np.all(codes[:-1] < codes[1:])
    assert word_utils.unpack(int(codes[5]), 3) == (0, 1, 2)


def test_ranks_round_trip_with_gapped_letters():
    # Arrange
    letters = (0, 2)
    dense = np.array([0, 0, 1], dtype=np.int64)
    codes = word_utils.universe_codes(letters, 4)

    # Act
    ranks = word_utils.codes_to_ranks(codes, 4, dense, 2)

    # Assert
    assert list(ranks) == list(range(16))
    assert np.array_equal(word_utils.ranks_to_codes(ranks, letters, 4), codes)


def test_fits_packed():
    assert word_utils.fits_packed(3, 16)
    assert not word_utils.fits_packed(5, 3)
    assert not word_utils.fits_packed(3, 17)
