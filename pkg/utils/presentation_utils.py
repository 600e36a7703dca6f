# utils/presentation_utils.py
import hashlib
import logging
from functools import cached_property
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from utils.word_utils import Word, WordSyntaxError, format_word, parse_word

logger = logging.getLogger(__name__)


class PresentationError(ValueError):
    """Syntax or validation error in presentation text, with 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}" if line else message)
        self.message = message
        self.line = line
        self.column = column


class Relation(BaseModel):
    model_config = ConfigDict(frozen=True)

    lhs: Word
    rhs: Word

    @model_validator(mode="after")
    def check_homogeneous(self):
        if len(self.lhs) != len(self.rhs):
            raise ValueError(f"inhomogeneous relation: lengths {len(self.lhs)} and {len(self.rhs)}")
        if not self.lhs:
            raise ValueError("relation sides must be non-empty")
        if self.lhs == self.rhs:
            raise ValueError("relation sides must differ")
        return self

    @property
    def length(self) -> int:
        return len(self.lhs)

    def key(self) -> Tuple[Word, Word]:
        """Orientation-free identity, used to drop duplicates."""
        return (self.lhs, self.rhs) if self.lhs <= self.rhs else (self.rhs, self.lhs)


class Presentation(BaseModel):
    """
    A positive homogeneous presentation <L | R> together with the quotient L/~.

    `identification[i]` is the representative letter of letter i. Parsed
    presentations carry the identity map; normalize() absorbs the length-1
    relations into it.
    """

    model_config = ConfigDict(frozen=True)

    name: str = "custom"
    alphabet: Tuple[str, ...]
    relations: Tuple[Relation, ...] = ()
    identification: Tuple[int, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def default_identification(cls, data):
        if isinstance(data, dict) and not data.get("identification"):
            data = {**data, "identification": tuple(range(len(data.get("alphabet", ()))))}
        return data

    @model_validator(mode="after")
    def check_letters(self):
        size = len(self.alphabet)
        if len(self.identification) != size:
            raise ValueError("identification must cover the alphabet")
        for rep in self.identification:
            if self.identification[rep] != rep:
                raise ValueError("identification must be idempotent")
        for relation in self.relations:
            for letter in relation.lhs + relation.rhs:
                if not 0 <= letter < size:
                    raise ValueError(f"letter index {letter} outside the alphabet")
        return self

    @cached_property
    def representatives(self) -> Tuple[int, ...]:
        return tuple(i for i, rep in enumerate(self.identification) if rep == i)

    @cached_property
    def fingerprint(self) -> str:
        text = "|".join([
            " ".join(self.alphabet),
            ",".join(str(rep) for rep in self.identification),
            ";".join(f"{r.lhs}={r.rhs}" for r in self.relations),
        ])
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    @property
    def is_normalized(self) -> bool:
        reps = set(self.representatives)
        return all(
            r.length > 1 and set(r.lhs + r.rhs) <= reps for r in self.relations
        )

    def to_representatives(self, word: Word) -> Word:
        return tuple(self.identification[letter] for letter in word)

    def read_word(self, text: str) -> Word:
        """Parse a word and replace every letter by its class representative."""
        try:
            return self.to_representatives(parse_word(text, self.alphabet))
        except WordSyntaxError as e:
            raise PresentationError(e.message, 0, e.column)

    def format(self, word: Word) -> str:
        return format_word(word, self.alphabet)

    def describe_relation(self, relation: Relation) -> str:
        return f"{self.format(relation.lhs)}={self.format(relation.rhs)}"


def _parse_letters(body: str, line_no: int, offset: int) -> List[str]:
    names = body.split()
    if not names:
        raise PresentationError("letters line declares no letters", line_no, offset + 1)
    seen = set()
    for name in names:
        if name in seen:
            raise PresentationError(f"letter '{name}' declared twice", line_no, offset + body.index(name) + 1)
        if "=" in name or "^" in name or "#" in name:
            raise PresentationError(f"invalid letter name '{name}'", line_no, offset + body.index(name) + 1)
        seen.add(name)
    return names


def _parse_relation_chain(body: str, names: List[str], line_no: int, offset: int) -> List[Relation]:
    parts = body.split("=")
    if len(parts) < 2:
        raise PresentationError("relation needs '='", line_no, offset + 1)

    words = []
    column = offset
    for part in parts:
        if not part.strip():
            raise PresentationError("empty relation side", line_no, column + 1)
        try:
            words.append((parse_word(part, names), column))
        except WordSyntaxError as e:
            raise PresentationError(e.message, line_no, column + e.column)
        column += len(part) + 1

    relations = []
    for (lhs, _), (rhs, rhs_column) in zip(words, words[1:]):
        if len(lhs) != len(rhs):
            raise PresentationError(
                f"inhomogeneous relation: lengths {len(lhs)} and {len(rhs)}", line_no, rhs_column + 1
            )
        if lhs == rhs:
            logger.warning(f"Line {line_no}: dropping trivial relation {format_word(lhs, names)}")
            continue
        relations.append(Relation(lhs=lhs, rhs=rhs))
    return relations


def parse_presentation(text: str, name: str = "custom") -> Presentation:
    """
    Parse presentation-file text.

    Format: one `letters: <name> <name> ...` line, then any number of
    `rel: <word> = <word> [= <word> ...]` lines; `#` starts a comment.
    """
    names = None
    relations: List[Relation] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        keyword, colon, body = line.partition(":")
        keyword = keyword.strip()
        offset = len(keyword) + len(line) - len(line.lstrip()) + 1
        if not colon:
            raise PresentationError("expected 'letters:' or 'rel:'", line_no, 1)
        if keyword == "letters":
            if names is not None:
                raise PresentationError("letters declared twice", line_no, 1)
            names = _parse_letters(body, line_no, offset)
        elif keyword == "rel":
            if names is None:
                raise PresentationError("relation before the letters line", line_no, 1)
            relations.extend(_parse_relation_chain(body, names, line_no, offset))
        else:
            raise PresentationError(f"unknown keyword '{keyword}'", line_no, 1)

    if names is None:
        raise PresentationError("missing letters line", 1, 1)

    presentation = Presentation(name=name, alphabet=tuple(names), relations=tuple(relations))
    logger.info(f"Parsed presentation {name}: {len(names)} letters, {len(relations)} relations")
    return presentation


def _find(parent: List[int], letter: int) -> int:
    while parent[letter] != letter:
        parent[letter] = parent[parent[letter]]
        letter = parent[letter]
    return letter


def normalize(p: Presentation) -> Presentation:
    """
    Absorb length-1 relations into the identification map and rewrite the
    remaining relations over representative letters (the smallest index of
    each class). Duplicate and self-equal relations are dropped.
    """
    parent = list(p.identification)
    for relation in p.relations:
        if relation.length == 1:
            x, y = _find(parent, relation.lhs[0]), _find(parent, relation.rhs[0])
            if x != y:
                parent[max(x, y)] = min(x, y)
    identification = tuple(_find(parent, letter) for letter in range(len(p.alphabet)))

    relations = []
    seen = set()
    for relation in p.relations:
        if relation.length == 1:
            continue
        lhs = tuple(identification[x] for x in relation.lhs)
        rhs = tuple(identification[x] for x in relation.rhs)
        if lhs == rhs:
            continue
        rewritten = Relation(lhs=lhs, rhs=rhs)
        if rewritten.key() in seen:
            continue
        seen.add(rewritten.key())
        relations.append(rewritten)

    dropped = len(p.relations) - len(relations)
    if dropped:
        logger.debug(f"normalize({p.name}): {dropped} relations absorbed or dropped")
    return Presentation(
        name=p.name, alphabet=p.alphabet, relations=tuple(relations), identification=identification
    )
