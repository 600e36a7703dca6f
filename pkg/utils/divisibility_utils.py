# utils/divisibility_utils.py
"""
Left and right division, quotients, common multiples and bounded lcm certificates.

Division is always decided on the class of the multiple: u divides w from the
left iff some member of class(w) has a prefix of length l(u) in class(u).
"""
import logging
from typing import List, Literal, Optional, Set, Tuple

import numpy as np
from pydantic import BaseModel

from utils.presentation_utils import Presentation
from utils.rewrite_utils import (
    BudgetExceeded,
    Decision,
    EquivClass,
    SearchBudget,
    Verdict,
    WordPartition,
    ensure_normalized,
    equivalence_class,
    word_partition,
)
from utils.word_utils import BITS_PER_LETTER, Word, unpack, window_mask

logger = logging.getLogger(__name__)

Side = Literal["left", "right"]


class MultipleSet(BaseModel):
    side: Side
    factors: Tuple[Word, Word]
    length: int
    multiples: List[Word] = []


class LcmCertificate(BaseModel):
    """
    Outcome of a bounded lcm search, valid in the monoid itself.

    kind is "lcm_found", "no_lcm_up_to", "no_common_multiple_up_to" or
    "inconclusive"; only an exhausted budget is inconclusive.
    """

    kind: Literal["lcm_found", "no_lcm_up_to", "no_common_multiple_up_to", "inconclusive"]
    side: Side
    factors: Tuple[Word, Word]
    max_length: int
    length: Optional[int] = None
    lcm: Optional[Word] = None
    witness: Optional[Tuple[Word, Word]] = None
    nodes_visited: Optional[int] = None
    scope: str = "in M"


def _split(word: Word, k: int, side: Side) -> Tuple[Word, Word]:
    """(factor part, quotient part) of a word for a factor of length k."""
    if side == "left":
        return word[:k], word[k:]
    return word[len(word) - k:], word[:len(word) - k]


def _factor_codes(cls: EquivClass, k: int, side: Side) -> np.ndarray:
    if side == "left":
        return cls.codes >> np.uint64(BITS_PER_LETTER * (cls.length - k))
    return cls.codes & np.uint64(window_mask(k))


def _divisible_members(cls_w: EquivClass, cls_u: EquivClass, side: Side) -> List[Word]:
    """Members of class(w) whose prefix (suffix) of length l(u) lies in class(u)."""
    k = cls_u.length
    if cls_w.packed and cls_u.packed:
        hit = np.isin(_factor_codes(cls_w, k, side), cls_u.codes)
        return [unpack(int(code), cls_w.length) for code in cls_w.codes[hit]]
    return [member for member in cls_w if _split(member, k, side)[0] in cls_u]


def divides(p: Presentation, u: Word, w: Word, side: Side = "left", budget: SearchBudget = None) -> Decision:
    """
    Decide whether u divides w on the given side.

    A Yes carries the witness (member of class(w), quotient word).
    """
    p = ensure_normalized(p)
    u, w = p.to_representatives(tuple(u)), p.to_representatives(tuple(w))
    if len(u) > len(w):
        return Decision(verdict=Verdict.NO)
    factor, quotient = _split(w, len(u), side)
    if factor == u:
        return Decision(verdict=Verdict.YES, witness=(w, quotient))

    try:
        cls_w = equivalence_class(p, w, budget)
        cls_u = equivalence_class(p, u, budget)
    except BudgetExceeded as e:
        logger.warning(f"divides({p.format(u)}, {p.format(w)}, {side}) inconclusive: {e}")
        return Decision.inconclusive(e)

    if cls_w.packed and cls_u.packed:
        hit = np.nonzero(np.isin(_factor_codes(cls_w, len(u), side), cls_u.codes))[0]
        if hit.size:
            member = unpack(int(cls_w.codes[hit[0]]), len(w))
            return Decision(verdict=Verdict.YES, witness=(member, _split(member, len(u), side)[1]))
        return Decision(verdict=Verdict.NO)

    for member in cls_w:
        head, rest = _split(member, len(u), side)
        if head in cls_u:
            return Decision(verdict=Verdict.YES, witness=(member, rest))
    return Decision(verdict=Verdict.NO)


def quotients(p: Presentation, u: Word, w: Word, side: Side = "left", budget: SearchBudget = None) -> List[Word]:
    """
    Canonical words of every class X with u·X ≃ w (left) or X·u ≃ w (right),
    ascending. Empty iff u does not divide w. Raises BudgetExceeded.
    """
    p = ensure_normalized(p)
    u, w = p.to_representatives(tuple(u)), p.to_representatives(tuple(w))
    if len(u) > len(w):
        return []
    cls_w = equivalence_class(p, w, budget)
    cls_u = equivalence_class(p, u, budget)

    rests: Set[Word] = {_split(member, len(u), side)[1] for member in _divisible_members(cls_w, cls_u, side)}
    found: List[EquivClass] = []
    for rest in sorted(rests):
        if any(rest in cls for cls in found):
            continue
        found.append(equivalence_class(p, rest, budget))
    return sorted(cls.canonical for cls in found)


def _divisible_labels(partition: WordPartition, cls_u: EquivClass, side: Side) -> np.ndarray:
    """Canonical codes of the classes in a partition divisible by class(u)."""
    k = cls_u.length
    if side == "left":
        heads = partition.codes >> np.uint64(BITS_PER_LETTER * (partition.length - k))
    else:
        heads = partition.codes & np.uint64(window_mask(k))
    return np.unique(partition.labels[np.isin(heads, cls_u.codes)])


def common_multiples(
    p: Presentation, u: Word, v: Word, side: Side = "left", length: int = None, budget: SearchBudget = None
) -> MultipleSet:
    """
    Every class of the given length divisible by both u and v on one side,
    found by filtering the partition of all words of that length.
    """
    p = ensure_normalized(p)
    u, v = p.to_representatives(tuple(u)), p.to_representatives(tuple(v))
    if length is None:
        length = max(len(u), len(v))
    if length < max(len(u), len(v)):
        raise ValueError(f"length {length} is shorter than a factor")

    partition = word_partition(p, length, budget)
    both = np.intersect1d(
        _divisible_labels(partition, equivalence_class(p, u, budget), side),
        _divisible_labels(partition, equivalence_class(p, v, budget), side),
    )
    multiples = [unpack(int(code), length) for code in both]
    logger.debug(f"{len(multiples)} common {side} multiples of length {length} in {p.name}")
    return MultipleSet(side=side, factors=(u, v), length=length, multiples=multiples)


def lcm_certificate(
    p: Presentation, u: Word, v: Word, side: Side = "left", max_length: int = 6, budget: SearchBudget = None
) -> LcmCertificate:
    """
    Look for a least common multiple of u and v up to max_length.

    The shortest common multiple class is the only candidate. Two of them at
    the same length, or a longer common multiple the candidate does not
    divide, refute an lcm up to that length.
    """
    p = ensure_normalized(p)
    u, v = p.to_representatives(tuple(u)), p.to_representatives(tuple(v))
    base = dict(side=side, factors=(u, v), max_length=max_length)

    try:
        candidate: Optional[EquivClass] = None
        for n in range(max(len(u), len(v)), max_length + 1):
            multiples = common_multiples(p, u, v, side, n, budget).multiples
            if candidate is None:
                if not multiples:
                    continue
                if len(multiples) > 1:
                    return LcmCertificate(kind="no_lcm_up_to", length=n, witness=(multiples[0], multiples[1]), **base)
                candidate = equivalence_class(p, multiples[0], budget)
                continue

            divided = set(
                unpack(int(code), n)
                for code in _divisible_labels(word_partition(p, n, budget), candidate, side)
            )
            for multiple in multiples:
                if multiple not in divided:
                    logger.info(f"lcm refuted in {p.name}: {p.format(candidate.canonical)} does not divide {p.format(multiple)}")
                    return LcmCertificate(
                        kind="no_lcm_up_to", length=n, witness=(candidate.canonical, multiple), **base
                    )
    except BudgetExceeded as e:
        return LcmCertificate(kind="inconclusive", nodes_visited=e.nodes_visited, **base)

    if candidate is None:
        logger.info(f"No common {side} multiple of {p.format(u)} and {p.format(v)} up to length {max_length} in {p.name}")
        return LcmCertificate(kind="no_common_multiple_up_to", **base)
    return LcmCertificate(kind="lcm_found", length=candidate.length, lcm=candidate.canonical, **base)
