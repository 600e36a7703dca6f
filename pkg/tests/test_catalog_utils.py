# tests/test_catalog_utils.py
import sys
import os

import pytest
from unittest.mock import patch

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils import catalog_utils
from utils.catalog_utils import CatalogError


@pytest.mark.parametrize("type_name", catalog_utils.TYPE_LABELS + catalog_utils.EXTRA_LABELS)
def test_every_type_loads_homogeneous(type_name):
    # Act
    p = catalog_utils.catalog_lookup(type_name)

    # Assert
    assert p.name == type_name
    assert p.alphabet == ("a", "b", "c")
    assert all(len(r.lhs) == len(r.rhs) for r in p.relations)


def test_h_ii_ships_printed_relation_list():
    # Act
    p = catalog_utils.catalog_lookup("H_ii")

    # Assert
    assert len(p.relations) == 79


def test_b_ii_presentation():
    # Act
    p = catalog_utils.catalog_lookup("B_ii")

    # Assert
    assert [p.describe_relation(r) for r in p.relations] == ["cbb=bba", "bc=ab", "ac=ca"]


@pytest.mark.parametrize("type_name, classes", [
    ("A_i", 3), ("A_ii", 2), ("B_ii", 3), ("B_iii", 2), ("B_v", 1), ("H_viii", 1), ("B_vi", 3),
])
def test_generator_classes_after_normalization(type_name, classes):
    assert len(catalog_utils.normalized(type_name).representatives) == classes


def test_unknown_type():
    with pytest.raises(CatalogError):
        catalog_utils.catalog_lookup("Z_ix")


def test_audit_failure_aborts_loading(tmp_path):
    # Arrange
    folder = tmp_path / "presentations"
    folder.mkdir()
    (folder / "B_ii.txt").write_text("letters: a b c\nrel: cbb = bb\n")
    catalog_utils.catalog_lookup.cache_clear()

    # Act & Assert
    try:
        with patch("utils.config_utils.DATA_DIR", str(tmp_path)):
            with pytest.raises(CatalogError) as excinfo:
                catalog_utils.catalog_lookup("B_ii")
        assert "audit" in str(excinfo.value)
    finally:
        catalog_utils.catalog_lookup.cache_clear()


def test_list_catalog_covers_all_types():
    # Act
    entries = catalog_utils.list_catalog()

    # Assert
    assert [e.type_name for e in entries] == list(catalog_utils.TYPE_LABELS + catalog_utils.EXTRA_LABELS)
    h_ii = next(e for e in entries if e.type_name == "H_ii")
    assert h_ii.relations == 79
    assert h_ii.letters == 3


def test_fundamental_table():
    # Act
    b_ii = catalog_utils.fundamental_elements("B_ii")

    # Assert
    assert [e.word for e in b_ii] == ["(ab)^3", "(bcc)^3"]
    assert b_ii[1].equivalent == ["(cba)^3"]
    assert all(len(catalog_utils.fundamental_elements(t)) >= 1 for t in catalog_utils.TYPE_LABELS)


def test_relation_errata_match_printed_relation():
    # Arrange
    p = catalog_utils.catalog_lookup("H_ii")
    erratum = catalog_utils.relation_errata("H_ii")[0]

    # Act
    matched = [r for r in p.relations if erratum.matches(p, r)]

    # Assert
    assert [p.describe_relation(r) for r in matched] == ["bccabb=accaaa"]
    assert erratum.corrected_words(p) == ((1, 2, 1, 0, 1, 1), (0, 2, 2, 0, 0, 0))
    assert catalog_utils.relation_errata("B_ii") == []
