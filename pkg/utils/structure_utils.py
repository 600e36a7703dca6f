# utils/structure_utils.py
"""
Quasi-central and fundamental elements, cancellation scans and morphism checks.

Most checks reduce to class membership: a·Δ ≃ Δ·b is decided by looking Δ·b
up in class(a·Δ), and a shared witness Δ_a exists exactly when some suffix
of a member of class(Δ) starting with a is also a prefix of a member ending
with σ(a).
"""
import logging
from itertools import permutations, product
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from utils import catalog_utils, config_utils
from utils.presentation_utils import Presentation, Relation
from utils.rewrite_utils import (
    BudgetExceeded,
    EquivClass,
    SearchBudget,
    Verdict,
    are_equivalent,
    ensure_normalized,
    equivalence_class,
    word_partition,
)
from utils.word_utils import BITS_PER_LETTER, Word, power, unpack, window_mask

logger = logging.getLogger(__name__)


class PermutationSigma(BaseModel):
    """A bijection on representative letters."""

    mapping: Dict[int, int]

    @classmethod
    def identity(cls, letters) -> "PermutationSigma":
        return cls(mapping={a: a for a in letters})

    @classmethod
    def from_names(cls, p: Presentation, names: Dict[str, str]) -> "PermutationSigma":
        mapping = {}
        for source, target in names.items():
            a = p.identification[p.alphabet.index(source)]
            mapping[a] = p.identification[p.alphabet.index(target)]
        return cls(mapping=mapping)

    @property
    def is_identity(self) -> bool:
        return all(a == b for a, b in self.mapping.items())

    def __call__(self, letter: int) -> int:
        return self.mapping[letter]

    def then(self, other: "PermutationSigma") -> "PermutationSigma":
        """The composite x -> other(self(x))."""
        return PermutationSigma(mapping={a: other(b) for a, b in self.mapping.items()})

    def key(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(sorted(self.mapping.items()))

    def names(self, p: Presentation) -> Dict[str, str]:
        return {p.alphabet[a]: p.alphabet[b] for a, b in sorted(self.mapping.items())}


class FundamentalWitness(BaseModel):
    delta: Word
    sigma: PermutationSigma
    per_generator: Dict[int, Word]
    # False for the independent-witness variant, which is not the standard notion
    standard: bool = True


class CancellationViolation(BaseModel):
    letter: int
    side: Literal["left", "right"]
    product_class: Word
    x: Word
    y: Word


class CancellationReport(BaseModel):
    presentation: str
    max_length: int
    violations: List[CancellationViolation] = []


class MorphismReport(BaseModel):
    verdict: Verdict
    checked: int = 0
    failing_relation: Optional[Relation] = None
    nodes_visited: Optional[int] = None


class QuasiCentralEntry(BaseModel):
    word: Word
    sigmas: List[PermutationSigma]


class FundamentalTableRow(BaseModel):
    label: str
    word: Word
    printed_sigma: PermutationSigma
    found_sigma: Optional[PermutationSigma] = None
    corrected_sigma: Optional[PermutationSigma] = None
    erratum: Optional[str] = None
    equivalents_verified: bool = True
    witness: Optional[FundamentalWitness] = None
    verdict: Verdict


class DenominatorReport(BaseModel):
    delta: Word
    checked_lengths: List[int] = []
    skipped_lengths: List[int] = []
    failures: List[Tuple[Word, str]] = []
    verdict: Verdict


class CoxeterReport(BaseModel):
    max_k: int
    k: Optional[int] = None
    sigma: Optional[PermutationSigma] = None
    verdict: Verdict
    nodes_visited: Optional[int] = None


class DivisorSymmetryReport(BaseModel):
    delta: Word
    left_divisors: List[Word]
    right_divisors: List[Word]
    equal: bool


class ProductCheckReport(BaseModel):
    delta: Word
    quasi_central: Word
    left_product_fundamental: bool
    right_product_fundamental: bool
    reverse_inclusion: str = "unverified"


def _require_word(delta: Word):
    if not delta:
        raise ValueError("the empty word is excluded from quasi-central and fundamental searches")


def _bijections(letters: Tuple[int, ...], admissible: Dict[Tuple[int, int], bool]) -> List[PermutationSigma]:
    found = []
    for image in permutations(letters):
        if all(admissible[(a, b)] for a, b in zip(letters, image)):
            found.append(PermutationSigma(mapping=dict(zip(letters, image))))
    return found


def is_quasi_central(p: Presentation, delta: Word, budget: SearchBudget = None) -> List[PermutationSigma]:
    """
    Every σ with a·Δ ≃ Δ·σ(a) for all generators a; empty when Δ is not
    quasi-central. Raises BudgetExceeded.
    """
    p = ensure_normalized(p)
    delta = p.to_representatives(tuple(delta))
    _require_word(delta)
    letters = p.representatives
    admissible = {}
    for a in letters:
        cls = equivalence_class(p, (a,) + delta, budget)
        for b in letters:
            admissible[(a, b)] = (delta + (b,)) in cls
    return _bijections(letters, admissible)


def _heads_and_tails(cls: EquivClass):
    """For a packed class: first letters, last letters, tails (drop first), heads (drop last)."""
    n = cls.length
    codes = cls.codes
    first = (codes >> np.uint64(BITS_PER_LETTER * (n - 1))).astype(np.int64)
    last = (codes & np.uint64(window_mask(1))).astype(np.int64)
    tails = codes & np.uint64(window_mask(n - 1))
    heads = codes >> np.uint64(BITS_PER_LETTER)
    return first, last, tails, heads


def is_fundamental(
    p: Presentation,
    delta: Word,
    budget: SearchBudget = None,
    prefer: PermutationSigma = None,
    independent_witnesses: bool = False,
) -> Optional[FundamentalWitness]:
    """
    Search a witness Δ = a·Δ_a = Δ_a·σ(a) for every generator a.

    Args:
        prefer: permutation to report when it is admissible; otherwise the
            first admissible permutation in letter order (identity first).
        independent_witnesses: accept different words for the two equations.
            This is a weaker, non-standard notion.

    Returns None when no permutation admits witnesses. Raises BudgetExceeded.
    """
    p = ensure_normalized(p)
    delta = p.to_representatives(tuple(delta))
    _require_word(delta)
    letters = p.representatives
    cls = equivalence_class(p, delta, budget)
    n = len(delta)

    shared: Dict[Tuple[int, int], Optional[Word]] = {}
    if cls.packed:
        first, last, tails, heads = _heads_and_tails(cls)
        for a in letters:
            starts = np.unique(tails[first == a])
            for b in letters:
                ends = np.unique(heads[last == b])
                if independent_witnesses:
                    shared[(a, b)] = unpack(int(starts[0]), n - 1) if starts.size and ends.size else None
                    continue
                common = np.intersect1d(starts, ends, assume_unique=True)
                shared[(a, b)] = unpack(int(common[0]), n - 1) if common.size else None
    else:
        for a in letters:
            starts = {m[1:] for m in cls if m[0] == a}
            for b in letters:
                ends = {m[:-1] for m in cls if m[-1] == b}
                common = sorted(starts & ends) if not independent_witnesses else (sorted(starts) if ends else [])
                shared[(a, b)] = common[0] if common else None

    candidates = _bijections(letters, {key: value is not None for key, value in shared.items()})
    if not candidates:
        logger.debug(f"{p.format(delta)} is not fundamental in {p.name}")
        return None
    sigma = candidates[0]
    if prefer is not None and any(c.key() == prefer.key() for c in candidates):
        sigma = prefer
    return FundamentalWitness(
        delta=delta,
        sigma=sigma,
        per_generator={a: shared[(a, sigma(a))] for a in letters},
        standard=not independent_witnesses,
    )


def replay_witness(p: Presentation, witness: FundamentalWitness, budget: SearchBudget = None) -> bool:
    """Re-verify both equations of every Δ_a through the rewrite engine."""
    p = ensure_normalized(p)
    for a, delta_a in witness.per_generator.items():
        left = are_equivalent(p, (a,) + delta_a, witness.delta, budget)
        right = are_equivalent(p, delta_a + (witness.sigma(a),), witness.delta, budget)
        if left.verdict != Verdict.YES or right.verdict != Verdict.YES:
            return False
    return True


def verify_theorem3(
    type_name: str, budget: SearchBudget = None, labels: Optional[Sequence[str]] = None
) -> List[FundamentalTableRow]:
    """Check listed fundamental elements of a type (all, or the given labels) against their permutations."""
    p = catalog_utils.normalized(type_name)
    rows = []
    for entry in catalog_utils.fundamental_elements(type_name):
        if labels is not None and entry.label not in labels:
            continue
        word = p.read_word(entry.word)
        printed = PermutationSigma.from_names(p, entry.sigma)
        corrected = PermutationSigma.from_names(p, entry.sigma_corrected) if entry.sigma_corrected else None
        try:
            equivalents_ok = all(
                are_equivalent(p, word, p.read_word(other), budget).verdict == Verdict.YES
                for other in entry.equivalent
            )
            witness = is_fundamental(p, word, budget, prefer=corrected or printed)
        except BudgetExceeded as e:
            logger.warning(f"{entry.label}: {e}")
            rows.append(FundamentalTableRow(
                label=entry.label, word=word, printed_sigma=printed, verdict=Verdict.INCONCLUSIVE
            ))
            continue

        found = witness.sigma if witness else None
        expected = corrected or printed
        ok = witness is not None and found.key() == expected.key() and equivalents_ok
        if ok and corrected is not None:
            logger.warning(f"{entry.label}: verified against the corrected permutation; {entry.note}")
        logger.info(f"{entry.label} = {entry.word}: {'verified' if ok else 'NOT verified'}")
        rows.append(FundamentalTableRow(
            label=entry.label,
            word=word,
            printed_sigma=printed,
            found_sigma=found,
            corrected_sigma=corrected,
            erratum=entry.note,
            equivalents_verified=equivalents_ok,
            witness=witness,
            verdict=Verdict.YES if ok else Verdict.NO,
        ))
    return rows


def quasi_center_scan(p: Presentation, max_length: int, budget: SearchBudget = None) -> List[QuasiCentralEntry]:
    """
    Every quasi-central class of length 1..max_length with its σ set,
    ordered by length then canonical word.
    """
    p = ensure_normalized(p)
    letters = p.representatives
    found = []
    longer = word_partition(p, 1, budget)
    for n in range(1, max_length + 1):
        current, longer = longer, word_partition(p, n + 1, budget)
        deltas = current.classes()
        admissible = {}
        for a in letters:
            left = longer.label_of((np.uint64(a) << np.uint64(BITS_PER_LETTER * n)) | deltas)
            for b in letters:
                right = longer.label_of((deltas << np.uint64(BITS_PER_LETTER)) | np.uint64(b))
                admissible[(a, b)] = left == right
        maybe = np.logical_and.reduce([
            np.logical_or.reduce([admissible[(a, b)] for b in letters]) for a in letters
        ])
        for i in np.nonzero(maybe)[0]:
            sigmas = _bijections(letters, {key: bool(value[i]) for key, value in admissible.items()})
            if sigmas:
                found.append(QuasiCentralEntry(word=unpack(int(deltas[i]), n), sigmas=sigmas))
    logger.info(f"quasi_center_scan({p.name}, {max_length}): {len(found)} classes")
    return found


def cancellation_scan(p: Presentation, max_length: int, budget: SearchBudget = None) -> CancellationReport:
    """
    Check uX ≃ uY ⇒ X ≃ Y (and Xu ≃ Yu ⇒ X ≃ Y) for every letter u and all
    X, Y of length 1..max_length. Bounded evidence only.
    """
    p = ensure_normalized(p)
    report = CancellationReport(presentation=p.name, max_length=max_length)
    longer = word_partition(p, 1, budget)
    for n in range(1, max_length + 1):
        current, longer = longer, word_partition(p, n + 1, budget)
        words = current.codes
        for u in p.representatives:
            for side in ("left", "right"):
                if side == "left":
                    products = (np.uint64(u) << np.uint64(BITS_PER_LETTER * n)) | words
                else:
                    products = (words << np.uint64(BITS_PER_LETTER)) | np.uint64(u)
                pairs = np.unique(np.stack([longer.label_of(products), current.labels]), axis=1)
                product_labels, counts = np.unique(pairs[0], return_counts=True)
                for label in product_labels[counts > 1]:
                    x, y = pairs[1][pairs[0] == label][:2]
                    violation = CancellationViolation(
                        letter=u, side=side, product_class=unpack(int(label), n + 1),
                        x=unpack(int(x), n), y=unpack(int(y), n),
                    )
                    ux = _attach(violation.x, u, side)
                    uy = _attach(violation.y, u, side)
                    if are_equivalent(p, ux, uy, budget).verdict == Verdict.YES:
                        report.violations.append(violation)
    logger.info(f"cancellation_scan({p.name}, {max_length}): {len(report.violations)} violations")
    return report


def _attach(word: Word, letter: int, side: str) -> Word:
    return (letter,) + word if side == "left" else word + (letter,)


def _image(word: Word, letter_map: Dict[int, Word], source: Presentation) -> Word:
    result = []
    for letter in word:
        image = letter_map.get(letter)
        if image is None:
            image = letter_map[source.identification[letter]]
        result.extend(image)
    return tuple(result)


def _check_relations(
    source: Presentation, target: Presentation, letter_map: Dict[int, Word], reverse: bool, budget: SearchBudget
) -> MorphismReport:
    target = ensure_normalized(target)
    checked = 0
    pending = None
    for relation in source.relations:
        lhs, rhs = (relation.lhs[::-1], relation.rhs[::-1]) if reverse else (relation.lhs, relation.rhs)
        decision = are_equivalent(target, _image(lhs, letter_map, source), _image(rhs, letter_map, source), budget)
        checked += 1
        if decision.verdict == Verdict.NO:
            logger.info(f"Relation {source.describe_relation(relation)} does not map into {target.name}")
            return MorphismReport(verdict=Verdict.NO, checked=checked, failing_relation=relation)
        if decision.verdict == Verdict.INCONCLUSIVE and pending is None:
            pending = MorphismReport(
                verdict=Verdict.INCONCLUSIVE, failing_relation=relation, nodes_visited=decision.nodes_visited
            )
    if pending is not None:
        pending.checked = checked
        return pending
    return MorphismReport(verdict=Verdict.YES, checked=checked)


def check_morphism(
    p1: Presentation, p2: Presentation, letter_map: Dict[int, Word], budget: SearchBudget = None
) -> MorphismReport:
    """
    Check that a letter map sends every relation of p1, length-1 relations
    included, to an equivalence of p2. Unmapped letters follow their
    representative.
    """
    return _check_relations(p1, p2, letter_map, reverse=False, budget=budget)


def check_anti_morphism(p: Presentation, letter_map: Dict[int, Word], budget: SearchBudget = None) -> MorphismReport:
    """Same as check_morphism into p itself, with every relation read backwards."""
    return _check_relations(p, p, letter_map, reverse=True, budget=budget)


def sigma_relation_check(p: Presentation, sigma: PermutationSigma, budget: SearchBudget = None) -> MorphismReport:
    """Letterwise σ(lhs) ≃ σ(rhs) for every relation."""
    p = ensure_normalized(p)
    letter_map = {a: (b,) for a, b in sigma.mapping.items()}
    return check_morphism(p, p, letter_map, budget)


def universal_denominator_check(
    p: Presentation, delta: Word, max_u_length: int, budget: SearchBudget = None, length_cap: int = None
) -> DenominatorReport:
    """
    Check that every word U with l(U) <= max_u_length divides Δ^l(U) on both sides.

    Powers longer than length_cap are skipped and listed.
    """
    p = ensure_normalized(p)
    delta = p.to_representatives(tuple(delta))
    cap = length_cap if length_cap is not None else config_utils.DENOMINATOR_LENGTH_CAP
    report = DenominatorReport(delta=delta, verdict=Verdict.YES)
    if is_fundamental(p, delta, budget) is None:
        raise ValueError(f"{p.format(delta)} is not fundamental in {p.name}")

    letters = p.representatives
    for k in range(1, max_u_length + 1):
        if k * len(delta) > cap:
            report.skipped_lengths.append(k)
            continue
        cls = equivalence_class(p, power(delta, k), budget)
        for side in ("left", "right"):
            factors = cls.prefix_words(k) if side == "left" else cls.suffix_words(k)
            if len(factors) < len(letters) ** k:
                missing = _missing_words(letters, k, factors)
                report.failures.extend((word, side) for word in missing)
                report.verdict = Verdict.NO
        report.checked_lengths.append(k)
    return report


def _missing_words(letters, k: int, present) -> List[Word]:
    return [word for word in product(letters, repeat=k) if word not in present]


def coxeter_power_search(p: Presentation, max_k: int, budget: SearchBudget = None) -> CoxeterReport:
    """Smallest k <= max_k with (cba)^k fundamental."""
    if not {"a", "b", "c"} <= set(p.alphabet):
        raise ValueError("coxeter_power_search needs letters a, b and c")
    p = ensure_normalized(p)
    coxeter = p.to_representatives(tuple(p.alphabet.index(name) for name in "cba"))
    for k in range(1, max_k + 1):
        try:
            witness = is_fundamental(p, power(coxeter, k), budget)
        except BudgetExceeded as e:
            return CoxeterReport(max_k=max_k, verdict=Verdict.INCONCLUSIVE, nodes_visited=e.nodes_visited)
        if witness is not None:
            logger.info(f"(cba)^{k} is fundamental in {p.name}")
            return CoxeterReport(max_k=max_k, k=k, sigma=witness.sigma, verdict=Verdict.YES)
    return CoxeterReport(max_k=max_k, verdict=Verdict.NO)


def _divisor_classes(p: Presentation, cls: EquivClass, side: str, budget: SearchBudget) -> List[Word]:
    canonicals = set()
    for k in range(cls.length + 1):
        factors = cls.prefix_words(k) if side == "left" else cls.suffix_words(k)
        seen = []
        for word in sorted(factors):
            if any(word in other for other in seen):
                continue
            seen.append(equivalence_class(p, word, budget))
        canonicals.update(other.canonical for other in seen)
    return sorted(canonicals, key=lambda w: (len(w), w))


def divisor_symmetry(p: Presentation, delta: Word, budget: SearchBudget = None) -> DivisorSymmetryReport:
    """Compare the left-divisor and right-divisor classes of Δ, empty word included."""
    p = ensure_normalized(p)
    delta = p.to_representatives(tuple(delta))
    cls = equivalence_class(p, delta, budget)
    left = _divisor_classes(p, cls, "left", budget)
    right = _divisor_classes(p, cls, "right", budget)
    return DivisorSymmetryReport(delta=delta, left_divisors=left, right_divisors=right, equal=left == right)


def fundamental_product_check(
    p: Presentation, delta: Word, quasi_central: Word, budget: SearchBudget = None
) -> ProductCheckReport:
    """Check that Δ·Δ' and Δ'·Δ are fundamental for fundamental Δ and quasi-central Δ'."""
    p = ensure_normalized(p)
    delta = p.to_representatives(tuple(delta))
    other = p.to_representatives(tuple(quasi_central))
    if not is_quasi_central(p, other, budget):
        raise ValueError(f"{p.format(other)} is not quasi-central in {p.name}")
    return ProductCheckReport(
        delta=delta,
        quasi_central=other,
        left_product_fundamental=is_fundamental(p, delta + other, budget) is not None,
        right_product_fundamental=is_fundamental(p, other + delta, budget) is not None,
    )
