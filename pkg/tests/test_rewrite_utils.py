# tests/test_rewrite_utils.py
import sys
import os
from itertools import product

import numpy as np
import pytest
from unittest.mock import patch
from hypothesis import HealthCheck, given, settings, strategies as st

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils import catalog_utils, rewrite_utils
from utils.presentation_utils import parse_presentation
from utils.word_utils import pack
from utils.rewrite_utils import (
    BudgetExceeded,
    Derivation,
    DerivationStep,
    SearchBudget,
    Verdict,
    are_equivalent,
    derivation,
    equivalence_class,
    neighbors,
    replay_derivation,
    word_partition,
)

B_II = catalog_utils.normalized("B_ii")
words_b_ii = st.lists(st.sampled_from([0, 1, 2]), min_size=1, max_size=6).map(tuple)


def w(text, p=B_II):
    return p.read_word(text)


def names(words, p=B_II):
    return {p.format(x) for x in words}


@pytest.fixture(autouse=True)
def fresh_cache():
    rewrite_utils.class_cache.clear()
    yield
    rewrite_utils.class_cache.clear()


def test_neighbors_examples():
    # Act & Assert
    assert names(neighbors(B_II, w("bba"))) == {"cbb"}
    assert neighbors(B_II, w("aaa")) == set()
    assert names(neighbors(B_II, w("abc"))) == {"bcc", "aab"}


def test_class_of_bba():
    # Act
    cls = equivalence_class(B_II, w("bba"))

    # Assert
    assert names(cls) == {"bba", "cbb"}
    assert B_II.format(cls.canonical) == "bba"
    assert cls.seed == w("bba")
    assert len(cls) == 2


def test_class_of_bcba():
    # Act
    cls = equivalence_class(B_II, w("bcba"))

    # Assert
    assert names(cls) == {"abba", "acbb", "bcba", "cabb", "cbcb"}
    assert B_II.format(cls.canonical) == "abba"
    assert w("cabb") in cls


def test_single_letter_class():
    assert equivalence_class(B_II, w("a")).words() == [w("a")]


def test_are_equivalent_examples():
    # Act & Assert
    assert are_equivalent(B_II, w("bcba"), w("cabb")).verdict == Verdict.YES
    assert are_equivalent(B_II, w("ab"), w("ab")).verdict == Verdict.YES
    assert are_equivalent(B_II, w("ab"), w("ba")).verdict == Verdict.NO
    assert are_equivalent(B_II, w("ab"), w("abc")).verdict == Verdict.NO


def test_budget_exhaustion():
    # Act & Assert
    with pytest.raises(BudgetExceeded) as excinfo:
        equivalence_class(B_II, w("bcba"), SearchBudget(max_nodes=2))
    assert excinfo.value.nodes_visited > 2

    decision = are_equivalent(B_II, w("bcba"), w("cabb"), SearchBudget(max_nodes=2))
    assert decision.verdict == Verdict.INCONCLUSIVE
    assert decision.nodes_visited > 2


def test_warm_cache_does_not_bypass_budget():
    # Arrange
    with pytest.raises(BudgetExceeded) as cold:
        equivalence_class(B_II, w("bcba"), SearchBudget(max_nodes=2))
    full = equivalence_class(B_II, w("bcba"), SearchBudget.unlimited())

    # Act
    with pytest.raises(BudgetExceeded) as warm:
        equivalence_class(B_II, w("cabb"), SearchBudget(max_nodes=2))
    decision = are_equivalent(B_II, w("bcba"), w("cabb"), SearchBudget(max_nodes=2))
    served = equivalence_class(B_II, w("cabb"), SearchBudget(max_nodes=len(full)))

    # Assert
    assert warm.value.nodes_visited == cold.value.nodes_visited
    assert decision.verdict == Verdict.INCONCLUSIVE
    assert decision.nodes_visited == cold.value.nodes_visited
    assert set(served) == set(full)


def test_cached_partition_still_charges_budget():
    # Arrange
    word_partition(B_II, 3)

    # Act & Assert
    with pytest.raises(BudgetExceeded) as excinfo:
        word_partition(B_II, 3, SearchBudget(max_nodes=5))
    assert excinfo.value.nodes_visited == 27


def test_search_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(max_nodes=0)
    assert SearchBudget.unlimited().max_nodes is None


@patch("utils.config_utils.DEFAULT_BUDGET_NODES", 123)
def test_default_budget_reads_config():
    assert SearchBudget.default().max_nodes == 123


def test_derivation_h_ii_chain():
    # Arrange
    h_ii = catalog_utils.normalized("H_ii")

    # Act
    chain = derivation(h_ii, w("acaca", h_ii), w("cacac", h_ii))

    # Assert
    assert len(chain.steps) == 2
    assert chain.steps[0].word == w("acaca", h_ii)
    assert replay_derivation(h_ii, chain)


def test_derivation_trivial_and_impossible():
    # Act
    same = derivation(B_II, w("abc"), w("abc"))
    none = derivation(B_II, w("ab"), w("ba"))

    # Assert
    assert same.steps == []
    assert none is None


def test_replay_rejects_tampered_chain():
    # Arrange
    chain = derivation(B_II, w("bcba"), w("cabb"))
    bad = Derivation(
        source=chain.source,
        target=chain.target,
        steps=[DerivationStep(word=chain.source, position=3, relation_id=0, direction="forward")],
    )

    # Act & Assert
    assert replay_derivation(B_II, chain)
    assert not replay_derivation(B_II, bad)
    assert not replay_derivation(B_II, Derivation(source=chain.source, target=w("bbbb"), steps=chain.steps))


def test_vectorized_and_set_paths_agree():
    # Arrange
    seed = w("ababab")
    expected = equivalence_class(B_II, seed).words()
    rewrite_utils.class_cache.clear()

    # Act
    with patch("utils.config_utils.VECTOR_THRESHOLD", 1):
        vectorized = equivalence_class(B_II, seed).words()
    rewrite_utils.class_cache.clear()
    with patch("utils.config_utils.VECTOR_THRESHOLD", 1), patch("utils.config_utils.BITMAP_LIMIT", 0):
        hashed = equivalence_class(B_II, seed).words()

    # Assert
    assert vectorized == expected
    assert hashed == expected


def test_unpacked_fallback_matches_packed():
    # Arrange
    five = parse_presentation("letters: a b c d e\nrel: cbb = bba\nrel: bc = ab\nrel: ac = ca\n")

    # Act
    cls = equivalence_class(five, five.read_word("bcba"))

    # Assert
    assert not cls.packed
    assert names(cls, five) == {"abba", "acbb", "bcba", "cabb", "cbcb"}
    assert five.format(cls.canonical) == "abba"


def test_determinism():
    # Act
    first = equivalence_class(B_II, w("abababa")).words()
    rewrite_utils.class_cache.clear()
    second = equivalence_class(B_II, w("abababa")).words()

    # Assert
    assert first == second
    assert first == sorted(first)


@pytest.mark.parametrize("n", range(1, 8))
def test_partition_covers_every_word_once(n):
    # Act
    partition = word_partition(B_II, n)

    # Assert
    assert len(partition.codes) == 3 ** n
    for canonical in partition.classes():
        members = partition.members(int(canonical))
        assert int(members[0]) == int(canonical)
    assert sum(len(partition.members(int(c))) for c in partition.classes()) == 3 ** n


@pytest.mark.parametrize("n", range(1, 6))
def test_partition_matches_class_enumeration(n):
    # Arrange
    partition = word_partition(B_II, n)

    # Act & Assert
    for word in product(range(3), repeat=n):
        label = int(partition.label_of(np.array([pack(word)], dtype=np.uint64))[0])
        assert partition.as_class(label).words() == equivalence_class(B_II, word).words()


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(words_b_ii, st.data())
def test_equivalence_relation_laws(u, data):
    # Arrange
    cu = equivalence_class(B_II, u)
    v = data.draw(st.sampled_from(cu.words()))
    cv = equivalence_class(B_II, v)
    x = data.draw(st.sampled_from(cv.words()))

    # Assert
    assert u in cu
    assert u in cv
    assert x in cu
    assert are_equivalent(B_II, v, u).verdict == Verdict.YES


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(st.sampled_from([0, 1, 2]), min_size=1, max_size=5).map(tuple), st.sampled_from([0, 1, 2]))
def test_congruence(u, letter):
    # Act
    cls = equivalence_class(B_II, u)

    # Assert
    for v in cls:
        assert (letter,) + v in equivalence_class(B_II, (letter,) + u)
        assert v + (letter,) in equivalence_class(B_II, u + (letter,))


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(words_b_ii)
def test_neighbors_symmetry(u):
    for v in neighbors(B_II, u):
        assert u in neighbors(B_II, v)
        assert v != u
