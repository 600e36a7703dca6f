# utils/catalog_utils.py
import json
import logging
import os
from functools import lru_cache
from typing import Dict, List, Optional

from pydantic import BaseModel

from utils import config_utils
from utils.presentation_utils import Presentation, PresentationError, Relation, normalize, parse_presentation
from utils.word_utils import parse_word

logger = logging.getLogger(__name__)

TYPE_LABELS = (
    "A_i", "A_ii",
    "B_i", "B_ii", "B_iii", "B_iv", "B_v", "B_vi", "B_vii",
    "H_i", "H_ii", "H_iii", "H_iv", "H_v", "H_vi", "H_vii", "H_viii",
)
EXTRA_LABELS = ("B_ii_alt",)

# Types whose monoid is free abelian or free cyclic after identification
FREE_ABELIAN_TYPES = ("B_iii", "B_v", "B_vii", "H_iv", "H_v", "H_vi", "H_vii", "H_viii")


class CatalogError(KeyError):
    """Unknown type label, or a catalog file that fails the load-time audit."""


class RelationErratum(BaseModel):
    printed: str
    corrected: str
    note: str

    def matches(self, p: Presentation, relation: Relation) -> bool:
        lhs, rhs = (parse_word(side, p.alphabet) for side in self.printed.split("="))
        return (relation.lhs, relation.rhs) in ((lhs, rhs), (rhs, lhs))

    def corrected_words(self, p: Presentation):
        lhs, rhs = (parse_word(side, p.alphabet) for side in self.corrected.split("="))
        return lhs, rhs


class FundamentalEntry(BaseModel):
    label: str
    word: str
    equivalent: List[str] = []
    sigma: Dict[str, str]
    # reviewed correction of a printed permutation
    sigma_corrected: Optional[Dict[str, str]] = None
    note: Optional[str] = None


class CatalogEntry(BaseModel):
    type_name: str
    letters: int
    relations: int
    generator_classes: int
    normalized_relations: int
    fingerprint: str


def _presentation_file(type_name: str) -> str:
    return config_utils.data_path("presentations", f"{type_name}.txt")


@lru_cache(maxsize=None)
def catalog_lookup(type_name: str) -> Presentation:
    """
    Return the catalog presentation of a type, exactly as printed.

    Loading audits every relation for homogeneity; a file that fails
    the audit aborts loading with CatalogError.
    """
    if type_name not in TYPE_LABELS + EXTRA_LABELS:
        raise CatalogError(f"Unknown type '{type_name}'. Valid types: {', '.join(TYPE_LABELS + EXTRA_LABELS)}")

    path = _presentation_file(type_name)
    if not os.path.exists(path):
        raise CatalogError(f"Catalog file missing for {type_name}: {path}")

    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        presentation = parse_presentation(text, name=type_name)
    except PresentationError as e:
        logger.error(f"Catalog audit failed for {type_name}: {e}")
        raise CatalogError(f"Catalog audit failed for {type_name}: {e}")

    logger.info(f"Loaded {type_name}: {len(presentation.relations)} relations")
    return presentation


@lru_cache(maxsize=None)
def normalized(type_name: str) -> Presentation:
    return normalize(catalog_lookup(type_name))


def list_catalog() -> List[CatalogEntry]:
    entries = []
    for type_name in TYPE_LABELS + EXTRA_LABELS:
        p = catalog_lookup(type_name)
        q = normalized(type_name)
        entries.append(CatalogEntry(
            type_name=type_name,
            letters=len(p.alphabet),
            relations=len(p.relations),
            generator_classes=len(q.representatives),
            normalized_relations=len(q.relations),
            fingerprint=p.fingerprint,
        ))
    return entries


@lru_cache(maxsize=1)
def _fundamental_table() -> Dict[str, List[FundamentalEntry]]:
    with open(config_utils.data_path("fundamental_elements.json"), encoding="utf-8") as f:
        raw = json.load(f)
    return {name: [FundamentalEntry(**item) for item in items] for name, items in raw.items()}


def fundamental_elements(type_name: str) -> List[FundamentalEntry]:
    """Listed fundamental elements of a type with their printed permutations."""
    if type_name not in TYPE_LABELS:
        raise CatalogError(f"No fundamental-element table for '{type_name}'")
    return _fundamental_table()[type_name]


@lru_cache(maxsize=1)
def _relation_errata() -> Dict[str, List[RelationErratum]]:
    with open(config_utils.data_path("relation_errata.json"), encoding="utf-8") as f:
        raw = json.load(f)
    return {name: [RelationErratum(**item) for item in items] for name, items in raw.items()}


def relation_errata(type_name: str) -> List[RelationErratum]:
    """
    Reviewed readings of printed relations that fail a downstream check.
    The catalog itself stays verbatim; consumers decide how to report these.
    """
    return _relation_errata().get(type_name, [])
