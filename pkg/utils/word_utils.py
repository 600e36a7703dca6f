# utils/word_utils.py
"""
Words over a small indexed alphabet.

A word is a tuple of letter indices. For alphabets of at most four letters
and words of at most sixteen letters the word also has a packed code: two
bits per letter, first letter in the most significant position, so that
integer order on codes of one length is the index-lexicographic order on
words.
"""
import re
import logging
from typing import Iterable, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]

BITS_PER_LETTER = 2
PACKED_MAX_ALPHABET = 1 << BITS_PER_LETTER
PACKED_MAX_LENGTH = 16
LETTER_MASK = PACKED_MAX_ALPHABET - 1

EMPTY_WORD: Word = ()

_EXPONENT = re.compile(r"\^(\d+)")
_GROUP = re.compile(r"\(([^()]*)\)\^(\d+)")


class WordSyntaxError(ValueError):
    """Raised when a word cannot be read; column is 1-based within the word text."""

    def __init__(self, message: str, column: int):
        super().__init__(message)
        self.message = message
        self.column = column


def fits_packed(alphabet_size: int, length: int) -> bool:
    return alphabet_size <= PACKED_MAX_ALPHABET and length <= PACKED_MAX_LENGTH


def pack(word: Sequence[int]) -> int:
    code = 0
    for letter in word:
        if not 0 <= letter < PACKED_MAX_ALPHABET:
            raise ValueError(f"Letter index {letter} does not fit a packed code")
        code = (code << BITS_PER_LETTER) | letter
    return code


def unpack(code: int, length: int) -> Word:
    return tuple(
        (code >> (BITS_PER_LETTER * (length - 1 - i))) & LETTER_MASK
        for i in range(length)
    )


def window_mask(length: int) -> int:
    """Mask covering the packed code of a word of the given length."""
    return (1 << (BITS_PER_LETTER * length)) - 1


def letter_shift(word_length: int, position: int, window_length: int = 1) -> int:
    """Bit shift of the window starting at `position` inside a packed word."""
    return BITS_PER_LETTER * (word_length - position - window_length)


def power(word: Sequence[int], exponent: int) -> Word:
    return tuple(word) * exponent


def _uses_short_names(names: Sequence[str]) -> bool:
    return all(len(name) == 1 for name in names)


def parse_word(text: str, names: Sequence[str]) -> Word:
    """
    Read a word written with the given letter names.

    Single-character names may be written without separators ("abab");
    longer names must be separated by whitespace. A letter or a
    parenthesized group may carry an exponent ("a^5", "(cba)^3"). An empty
    string or "1" is the empty word.
    """
    text = _GROUP.sub(lambda m: " ".join([m.group(1)] * int(m.group(2))), text)
    stripped = text.strip()
    if stripped in ("", "1"):
        return EMPTY_WORD
    index = {name: i for i, name in enumerate(names)}
    letters = []

    if _uses_short_names(names):
        pos = 0
        while pos < len(text):
            char = text[pos]
            if char.isspace():
                pos += 1
                continue
            if char not in index:
                raise WordSyntaxError(f"Unknown letter '{char}'", pos + 1)
            pos += 1
            exponent = 1
            match = _EXPONENT.match(text, pos)
            if match:
                exponent = int(match.group(1))
                pos = match.end()
            letters.extend([index[char]] * exponent)
        return tuple(letters)

    for match in re.finditer(r"\S+", text):
        token = match.group(0)
        name, _, exp_text = token.partition("^")
        if name not in index:
            raise WordSyntaxError(f"Unknown letter '{name}'", match.start() + 1)
        if exp_text and not exp_text.isdigit():
            raise WordSyntaxError(f"Bad exponent '{exp_text}'", match.start() + len(name) + 2)
        letters.extend([index[name]] * (int(exp_text) if exp_text else 1))
    return tuple(letters)


def format_word(word: Iterable[int], names: Sequence[str]) -> str:
    separator = "" if _uses_short_names(names) else " "
    return separator.join(names[letter] for letter in word)


def universe_codes(letters: Sequence[int], length: int) -> np.ndarray:
    """
    Packed codes of every word of the given length over `letters`, ascending.

    The letters must be sorted; the result is then in index-lexicographic order.
    """
    return ranks_to_codes(np.arange(len(letters) ** length, dtype=np.int64), letters, length)


def ranks_to_codes(ranks: np.ndarray, letters: Sequence[int], length: int) -> np.ndarray:
    """Inverse of codes_to_ranks: base-k ranks to packed codes."""
    k = len(letters)
    lut = np.asarray(letters, dtype=np.uint64)
    codes = np.zeros(ranks.shape, dtype=np.uint64)
    for i in range(length):
        digit = (ranks // (k ** (length - 1 - i))) % k
        codes = (codes << np.uint64(BITS_PER_LETTER)) | lut[digit]
    return codes


def codes_to_ranks(codes: np.ndarray, length: int, dense: np.ndarray, k: int) -> np.ndarray:
    """
    Map packed codes to their position in `universe_codes`.

    `dense` sends a letter index to its position among the sorted letters.
    """
    ranks = np.zeros(codes.shape, dtype=np.int64)
    for i in range(length):
        shift = np.uint64(letter_shift(length, i))
        digit = ((codes >> shift) & np.uint64(LETTER_MASK)).astype(np.int64)
        ranks = ranks * k + dense[digit]
    return ranks
