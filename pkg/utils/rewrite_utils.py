# utils/rewrite_utils.py
"""
Equivalence classes of words under length-preserving relation application.

Every other module goes through this one. Classes are finite because the
relations are homogeneous; they are enumerated breadth-first over packed
word codes, one word at a time while the frontier is small and with numpy
over the whole frontier once it grows.
"""
import logging
import threading
from enum import Enum
from typing import Dict, Iterator, List, Literal, NamedTuple, Optional, Set, Tuple

import numpy as np
from pydantic import BaseModel, Field

from utils import config_utils
from utils.presentation_utils import Presentation, normalize
from utils.word_utils import (
    BITS_PER_LETTER,
    Word,
    codes_to_ranks,
    fits_packed,
    letter_shift,
    pack,
    ranks_to_codes,
    unpack,
    universe_codes,
    window_mask,
)

logger = logging.getLogger(__name__)

Direction = Literal["forward", "backward"]


class Verdict(str, Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"


class BudgetExceeded(RuntimeError):
    def __init__(self, nodes_visited: int, max_nodes: Optional[int]):
        super().__init__(f"Search budget of {max_nodes} nodes exceeded after {nodes_visited} nodes")
        self.nodes_visited = nodes_visited
        self.max_nodes = max_nodes


class SearchBudget(BaseModel):
    max_nodes: Optional[int] = Field(default=None, ge=1)

    @classmethod
    def default(cls) -> "SearchBudget":
        return cls(max_nodes=config_utils.DEFAULT_BUDGET_NODES)

    @classmethod
    def unlimited(cls) -> "SearchBudget":
        return cls(max_nodes=None)

    def allows(self, nodes: int) -> bool:
        return self.max_nodes is None or nodes <= self.max_nodes

    def check(self, nodes: int):
        if self.max_nodes is not None and nodes > self.max_nodes:
            raise BudgetExceeded(nodes, self.max_nodes)


class Decision(BaseModel):
    """A Yes/No/Inconclusive answer; Inconclusive carries the nodes consumed."""

    verdict: Verdict
    nodes_visited: Optional[int] = None
    witness: Tuple[Word, ...] = ()

    @classmethod
    def inconclusive(cls, error: BudgetExceeded) -> "Decision":
        return cls(verdict=Verdict.INCONCLUSIVE, nodes_visited=error.nodes_visited)


class DerivationStep(BaseModel):
    word: Word
    position: int
    relation_id: int
    direction: Direction


class Derivation(BaseModel):
    source: Word
    target: Word
    steps: List[DerivationStep] = []


class Rule(NamedTuple):
    relation_id: int
    direction: Direction
    source: Word
    target: Word


def ensure_normalized(p: Presentation) -> Presentation:
    return p if p.is_normalized else normalize(p)


class RuleTable:
    """
    Relation applications of one presentation, indexed for fast matching.

    For each side length k the sides are kept as sorted packed codes with the
    xor deltas that turn a side into each of its partners.
    """

    def __init__(self, p: Presentation):
        self.presentation = p
        self.letters = p.representatives
        self.packed = len(self.letters) > 0 and max(self.letters) < (1 << BITS_PER_LETTER)
        self.rules: List[Rule] = []
        for rid, relation in enumerate(p.relations):
            self.rules.append(Rule(rid, "forward", relation.lhs, relation.rhs))
            self.rules.append(Rule(rid, "backward", relation.rhs, relation.lhs))

        self.lengths = sorted({len(rule.source) for rule in self.rules})
        self.by_length: Dict[int, Dict[int, List[Tuple[int, int, Direction]]]] = {}
        self.arrays: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        if self.packed:
            self._index_packed()

    def _index_packed(self):
        for rule in self.rules:
            k = len(rule.source)
            if k > 32:
                self.packed = False
                return
            side, other = pack(rule.source), pack(rule.target)
            self.by_length.setdefault(k, {}).setdefault(side, []).append(
                (side ^ other, rule.relation_id, rule.direction)
            )
        for k, lookup in self.by_length.items():
            sides = np.array(sorted(lookup), dtype=np.uint64)
            degree = max(len(v) for v in lookup.values())
            deltas = np.zeros((len(sides), degree), dtype=np.uint64)
            for row, side in enumerate(sorted(lookup)):
                for col, (delta, _, _) in enumerate(lookup[side]):
                    deltas[row, col] = delta
            self.arrays[k] = (sides, deltas)

    def expand_code(self, code: int, n: int) -> Iterator[Tuple[int, int, int, Direction]]:
        """Yield (new code, position, relation id, direction) for one packed word."""
        for k, lookup in self.by_length.items():
            if k > n:
                continue
            mask = window_mask(k)
            for pos in range(n - k + 1):
                shift = letter_shift(n, pos, k)
                hits = lookup.get((code >> shift) & mask)
                if hits:
                    for delta, rid, direction in hits:
                        yield code ^ (delta << shift), pos, rid, direction

    def expand_word(self, word: Word) -> Iterator[Tuple[Word, int, int, Direction]]:
        n = len(word)
        for rule in self.rules:
            k = len(rule.source)
            for pos in range(n - k + 1):
                if word[pos:pos + k] == rule.source:
                    yield word[:pos] + rule.target + word[pos + k:], pos, rule.relation_id, rule.direction

    def _windows(self, codes: np.ndarray, n: int):
        for k, (sides, deltas) in self.arrays.items():
            if k > n:
                continue
            mask = np.uint64(window_mask(k))
            for pos in range(n - k + 1):
                shift = np.uint64(letter_shift(n, pos, k))
                windows = (codes >> shift) & mask
                idx = np.searchsorted(sides, windows)
                idx[idx >= len(sides)] = 0
                hit = np.nonzero(sides[idx] == windows)[0]
                if hit.size:
                    yield hit, deltas[idx[hit]], shift

    def expand_frontier(self, frontier: np.ndarray, n: int) -> np.ndarray:
        """All single applications to every code of the frontier, deduplicated."""
        found = []
        for hit, deltas, shift in self._windows(frontier, n):
            for col in range(deltas.shape[1]):
                delta = deltas[:, col]
                live = delta != 0
                if live.any():
                    found.append(frontier[hit[live]] ^ (delta[live] << shift))
        if not found:
            return np.empty(0, dtype=np.uint64)
        return np.unique(np.concatenate(found))

    def edges(self, codes: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """(source index, target code) for every application inside a sorted code universe."""
        sources, targets = [], []
        for hit, deltas, shift in self._windows(codes, n):
            for col in range(deltas.shape[1]):
                delta = deltas[:, col]
                live = delta != 0
                if live.any():
                    sources.append(hit[live])
                    targets.append(codes[hit[live]] ^ (delta[live] << shift))
        if not sources:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.uint64)
        return np.concatenate(sources), np.concatenate(targets)


_tables: Dict[str, RuleTable] = {}
_tables_lock = threading.Lock()


def rule_table(p: Presentation) -> RuleTable:
    with _tables_lock:
        table = _tables.get(p.fingerprint)
        if table is None:
            table = RuleTable(p)
            _tables[p.fingerprint] = table
        return table


class EquivClass:
    """
    The complete set of words equivalent to a seed.

    Members are stored as sorted packed codes when the word fits a packed
    code, otherwise as a sorted tuple of words. Iteration is in canonical
    (index-lexicographic) order either way.
    """

    __slots__ = ("length", "seed", "_codes", "_words", "_lookup")

    def __init__(self, length: int, seed: Word, codes: np.ndarray = None, words: Tuple[Word, ...] = None):
        self.length = length
        self.seed = seed
        self._codes = codes
        self._words = words
        self._lookup = frozenset(words) if words is not None else None

    @property
    def packed(self) -> bool:
        return self._codes is not None

    @property
    def codes(self) -> np.ndarray:
        return self._codes

    @property
    def canonical(self) -> Word:
        if self.packed:
            return unpack(int(self._codes[0]), self.length)
        return self._words[0]

    def __len__(self) -> int:
        return len(self._codes) if self.packed else len(self._words)

    @property
    def size(self) -> int:
        return len(self)

    def contains_code(self, code: int) -> bool:
        idx = np.searchsorted(self._codes, np.uint64(code))
        return bool(idx < len(self._codes) and self._codes[idx] == np.uint64(code))

    def __contains__(self, word: Word) -> bool:
        if len(word) != self.length:
            return False
        if self.packed:
            return self.contains_code(pack(word))
        return tuple(word) in self._lookup

    def __iter__(self) -> Iterator[Word]:
        if self.packed:
            for code in self._codes:
                yield unpack(int(code), self.length)
        else:
            yield from self._words

    def words(self) -> List[Word]:
        return list(self)

    def prefix_codes(self, k: int) -> np.ndarray:
        """Distinct packed prefixes of length k over all members."""
        return np.unique(self._codes >> np.uint64(BITS_PER_LETTER * (self.length - k)))

    def suffix_codes(self, k: int) -> np.ndarray:
        return np.unique(self._codes & np.uint64(window_mask(k)))

    def prefix_words(self, k: int) -> Set[Word]:
        if self.packed:
            return {unpack(int(c), k) for c in self.prefix_codes(k)}
        return {w[:k] for w in self._words}

    def suffix_words(self, k: int) -> Set[Word]:
        if self.packed:
            return {unpack(int(c), k) for c in self.suffix_codes(k)}
        return {w[self.length - k:] for w in self._words}


class _Visited:
    """Visited set over one word universe: a dense bitmap when it fits, a hash set otherwise."""

    def __init__(self, letters: Tuple[int, ...], n: int, initial: Set[int]):
        self.letters = letters
        self.n = n
        self.k = len(letters)
        universe = self.k ** n
        self.bitmap = None
        self.codes_set = None
        if universe <= config_utils.BITMAP_LIMIT:
            self.dense = np.zeros(max(letters) + 1, dtype=np.int64)
            for i, letter in enumerate(letters):
                self.dense[letter] = i
            self.bitmap = np.zeros(universe, dtype=bool)
            self.bitmap[self._ranks(np.fromiter(initial, dtype=np.uint64))] = True
        else:
            self.codes_set = set(initial)

    def _ranks(self, codes: np.ndarray) -> np.ndarray:
        return codes_to_ranks(codes, self.n, self.dense, self.k)

    def add_new(self, candidates: np.ndarray) -> np.ndarray:
        if self.bitmap is not None:
            ranks = self._ranks(candidates)
            fresh = ~self.bitmap[ranks]
            self.bitmap[ranks[fresh]] = True
            return candidates[fresh]
        fresh = [int(c) for c in candidates if int(c) not in self.codes_set]
        self.codes_set.update(fresh)
        return np.array(fresh, dtype=np.uint64)

    def members(self) -> np.ndarray:
        if self.bitmap is not None:
            ranks = np.nonzero(self.bitmap)[0]
            return ranks_to_codes(ranks, self.letters, self.n)
        return np.array(sorted(self.codes_set), dtype=np.uint64)


class _Found(Exception):
    pass


def _closure_packed(table: RuleTable, seed: int, n: int, budget: SearchBudget, stop_at: int = None) -> np.ndarray:
    seen = {seed}
    frontier = [seed]
    while frontier and len(frontier) < config_utils.VECTOR_THRESHOLD:
        following = []
        for code in frontier:
            for new, _, _, _ in table.expand_code(code, n):
                if new not in seen:
                    if new == stop_at:
                        raise _Found()
                    seen.add(new)
                    following.append(new)
        budget.check(len(seen))
        frontier = following
    if not frontier:
        return np.array(sorted(seen), dtype=np.uint64)

    logger.debug(f"Switching to vectorized expansion at {len(seen)} words (length {n})")
    visited = _Visited(table.letters, n, seen)
    count = len(seen)
    front = np.array(frontier, dtype=np.uint64)
    while front.size:
        fresh = visited.add_new(table.expand_frontier(front, n))
        if stop_at is not None and np.any(fresh == np.uint64(stop_at)):
            raise _Found()
        count += fresh.size
        budget.check(count)
        front = fresh
    return visited.members()


def _closure_words(table: RuleTable, seed: Word, budget: SearchBudget, stop_at: Word = None) -> Tuple[Word, ...]:
    seen = {seed}
    frontier = [seed]
    while frontier:
        following = []
        for word in frontier:
            for new, _, _, _ in table.expand_word(word):
                if new not in seen:
                    if new == stop_at:
                        raise _Found()
                    seen.add(new)
                    following.append(new)
        budget.check(len(seen))
        frontier = following
    return tuple(sorted(seen))


class _ClassCache:
    """Classes keyed by (fingerprint, canonical word); members point back to their canonical."""

    def __init__(self):
        self._lock = threading.Lock()
        self._classes: Dict[Tuple[str, Word], EquivClass] = {}
        self._index: Dict[Tuple[str, Word], Word] = {}

    def get(self, fingerprint: str, word: Word, budget: SearchBudget = None) -> Optional[EquivClass]:
        """
        The cached class of word, or None. A class larger than the budget is
        not served, so the caller searches again and fails the same way.
        """
        with self._lock:
            canonical = self._index.get((fingerprint, word))
            if canonical is None:
                return None
            cls = self._classes.get((fingerprint, canonical))
        if cls is None or (budget is not None and not budget.allows(len(cls))):
            return None
        return cls

    def put(self, fingerprint: str, cls: EquivClass):
        if len(cls) > config_utils.CLASS_CACHE_MAX_MEMBERS:
            return
        with self._lock:
            if len(self._index) + len(cls) > 4 * config_utils.CLASS_CACHE_MAX_MEMBERS:
                self._classes.clear()
                self._index.clear()
            canonical = cls.canonical
            self._classes[(fingerprint, canonical)] = cls
            for word in cls:
                self._index[(fingerprint, word)] = canonical

    def clear(self):
        with self._lock:
            self._classes.clear()
            self._index.clear()


class_cache = _ClassCache()


def _budget(budget: Optional[SearchBudget]) -> SearchBudget:
    return budget if budget is not None else SearchBudget.default()


def neighbors(p: Presentation, w: Word) -> Set[Word]:
    """Words reachable from w by exactly one relation application."""
    p = ensure_normalized(p)
    w = p.to_representatives(w)
    return {new for new, _, _, _ in rule_table(p).expand_word(w)}


def equivalence_class(p: Presentation, w: Word, budget: SearchBudget = None) -> EquivClass:
    """
    The complete class of w; raises BudgetExceeded when the class is larger
    than the budget allows.
    """
    p = ensure_normalized(p)
    w = p.to_representatives(tuple(w))
    budget = _budget(budget)
    cached = class_cache.get(p.fingerprint, w, budget)
    if cached is not None:
        return EquivClass(cached.length, w, cached._codes, cached._words)

    table = rule_table(p)
    n = len(w)
    if table.packed and fits_packed(len(p.alphabet), n):
        cls = EquivClass(n, w, codes=_closure_packed(table, pack(w), n, budget))
    else:
        cls = EquivClass(n, w, words=_closure_words(table, w, budget))
    if len(cls) > 10000:
        logger.info(f"Class of {p.format(w)} in {p.name}: {len(cls)} members")
    class_cache.put(p.fingerprint, cls)
    return cls


def are_equivalent(p: Presentation, u: Word, v: Word, budget: SearchBudget = None) -> Decision:
    p = ensure_normalized(p)
    u, v = p.to_representatives(tuple(u)), p.to_representatives(tuple(v))
    if len(u) != len(v):
        return Decision(verdict=Verdict.NO)
    if u == v:
        return Decision(verdict=Verdict.YES)

    budget = _budget(budget)
    cached = class_cache.get(p.fingerprint, u, budget)
    if cached is not None:
        return Decision(verdict=Verdict.YES if v in cached else Verdict.NO)

    table = rule_table(p)
    try:
        if table.packed and fits_packed(len(p.alphabet), len(u)):
            codes = _closure_packed(table, pack(u), len(u), budget, stop_at=pack(v))
            class_cache.put(p.fingerprint, EquivClass(len(u), u, codes=codes))
        else:
            words = _closure_words(table, u, budget, stop_at=v)
            class_cache.put(p.fingerprint, EquivClass(len(u), u, words=words))
    except _Found:
        return Decision(verdict=Verdict.YES)
    except BudgetExceeded as e:
        logger.warning(f"are_equivalent({p.format(u)}, {p.format(v)}) inconclusive: {e}")
        return Decision.inconclusive(e)
    return Decision(verdict=Verdict.NO)


def derivation(p: Presentation, u: Word, v: Word, budget: SearchBudget = None) -> Optional[Derivation]:
    """
    A shortest rewriting chain from u to v, or None when the class of u is
    exhausted without meeting v. Raises BudgetExceeded.
    """
    p = ensure_normalized(p)
    u, v = p.to_representatives(tuple(u)), p.to_representatives(tuple(v))
    if u == v:
        return Derivation(source=u, target=v, steps=[])
    if len(u) != len(v):
        return None

    table = rule_table(p)
    budget = _budget(budget)
    parents: Dict[Word, Optional[DerivationStep]] = {u: None}
    frontier = [u]
    while frontier:
        following = []
        for word in frontier:
            for new, pos, rid, direction in table.expand_word(word):
                if new in parents:
                    continue
                parents[new] = DerivationStep(word=word, position=pos, relation_id=rid, direction=direction)
                if new == v:
                    steps = []
                    current = v
                    while parents[current] is not None:
                        steps.append(parents[current])
                        current = parents[current].word
                    return Derivation(source=u, target=v, steps=list(reversed(steps)))
                following.append(new)
        budget.check(len(parents))
        frontier = following
    return None


def apply_step(p: Presentation, step: DerivationStep) -> Word:
    relation = p.relations[step.relation_id]
    source, target = (relation.lhs, relation.rhs) if step.direction == "forward" else (relation.rhs, relation.lhs)
    window = step.word[step.position:step.position + len(source)]
    if window != source:
        raise ValueError(f"step does not match at position {step.position}")
    return step.word[:step.position] + target + step.word[step.position + len(source):]


def replay_derivation(p: Presentation, d: Derivation) -> bool:
    """Re-check every step of a derivation against the relations."""
    p = ensure_normalized(p)
    current = d.source
    for step in d.steps:
        if step.word != current:
            return False
        try:
            following = apply_step(p, step)
        except (ValueError, IndexError):
            return False
        if following not in neighbors(p, current):
            return False
        current = following
    return current == d.target


class WordPartition:
    """
    The partition of all words of one length over the representative letters.

    `codes` is the sorted universe; `labels[i]` is the canonical code of the
    class of `codes[i]`.
    """

    def __init__(self, length: int, letters: Tuple[int, ...], codes: np.ndarray, labels: np.ndarray):
        self.length = length
        self.letters = letters
        self.codes = codes
        self.labels = labels
        self.dense = np.zeros(max(letters) + 1, dtype=np.int64)
        for i, letter in enumerate(letters):
            self.dense[letter] = i

    def ranks(self, codes: np.ndarray) -> np.ndarray:
        return codes_to_ranks(codes, self.length, self.dense, len(self.letters))

    def label_of(self, codes: np.ndarray) -> np.ndarray:
        return self.labels[self.ranks(codes)]

    def classes(self) -> np.ndarray:
        """Canonical codes of every class, ascending."""
        return np.unique(self.labels)

    def members(self, canonical: int) -> np.ndarray:
        return self.codes[self.labels == np.uint64(canonical)]

    def as_class(self, canonical: int, seed: Word = None) -> EquivClass:
        members = self.members(canonical)
        return EquivClass(self.length, seed or unpack(int(canonical), self.length), codes=members)


_partitions: Dict[Tuple[str, int], WordPartition] = {}
_partitions_lock = threading.Lock()


def word_partition(p: Presentation, n: int, budget: SearchBudget = None) -> WordPartition:
    """
    Partition every word of length n into classes at once, by vectorized
    union-find over the relation applications. Needs packed codes.
    """
    p = ensure_normalized(p)
    table = rule_table(p)
    letters = p.representatives
    if not (table.packed and fits_packed(len(p.alphabet), n)):
        raise ValueError(f"word_partition needs packed words; length {n} over {len(p.alphabet)} letters does not fit")
    # charged on cache hits too
    _budget(budget).check(len(letters) ** n)

    key = (p.fingerprint, n)
    with _partitions_lock:
        if key in _partitions:
            return _partitions[key]

    codes = universe_codes(letters, n)
    parent = np.arange(len(codes), dtype=np.int64)
    sources, targets = table.edges(codes, n)
    if sources.size:
        targets = np.searchsorted(codes, targets)
        while True:
            ru, rv = parent[sources], parent[targets]
            split = ru != rv
            if not split.any():
                break
            np.minimum.at(parent, np.maximum(ru[split], rv[split]), np.minimum(ru[split], rv[split]))
            while True:
                jumped = parent[parent]
                if np.array_equal(jumped, parent):
                    break
                parent = jumped

    partition = WordPartition(n, letters, codes, codes[parent])
    logger.debug(f"Partitioned {len(codes)} words of length {n} in {p.name} into {len(partition.classes())} classes")
    with _partitions_lock:
        _partitions[key] = partition
    return partition
