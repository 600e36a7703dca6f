# utils/algebra_utils.py
"""
Exact arithmetic in finite extensions of the rationals and 2x2 matrix
representations of the catalog monoids.

A QuotientRing is Q[g1, ..., gk] modulo a tower of monic defining
polynomials (the i-th involves only g1..gi and is monic in gi). Elements
are sparse sympy polynomials over QQ kept in normal form modulo the tower.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from typing import Dict, List, Optional, Sequence, Tuple, Union

import sympy
from pydantic import BaseModel
from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, ring as poly_ring

from utils import catalog_utils
from utils.word_utils import Word

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction, sympy.Rational]


class NotInvertibleError(ArithmeticError):
    def __init__(self, element: "FieldElement"):
        super().__init__(f"{element} is not invertible in {element.ring.name}")
        self.element = element


class RepresentationError(ValueError):
    """Unknown type or branch for a matrix representation."""


class QuotientRing:
    def __init__(self, generators: Sequence[str], defining_polynomials: Sequence[str], name: str = ""):
        self.name = name or "Q[" + ",".join(generators) + "]"
        self.generators = tuple(generators)
        self.symbols = sympy.symbols(self.generators)
        if not isinstance(self.symbols, tuple):
            self.symbols = (self.symbols,)
        names = dict(zip(self.generators, self.symbols))
        self.defining = [sympy.sympify(text, locals=names) for text in defining_polynomials]

        self.degrees = []
        for symbol, poly in zip(self.symbols, self.defining):
            as_poly = sympy.Poly(poly, symbol)
            if as_poly.LC() != 1:
                raise ValueError(f"{poly} must be monic in {symbol}")
            self.degrees.append(as_poly.degree())

        # lex order with the last adjoined generator largest: the tower is a Groebner basis
        self.polys, *_ = poly_ring(tuple(reversed(self.symbols)), QQ, lex)
        self._tower = [self.polys.from_expr(sympy.expand(poly)) for poly in self.defining]
        self.basis: List[Tuple[int, ...]] = list(product(*[range(d) for d in reversed(self.degrees)]))
        logger.debug(f"Built {self.name}: basis of {len(self.basis)} monomials")

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def reduce(self, poly: PolyElement) -> PolyElement:
        return poly.rem(self._tower)

    def element(self, expr) -> "FieldElement":
        """Reduce a polynomial expression (text or sympy) over the generators."""
        if isinstance(expr, str):
            expr = sympy.sympify(expr, locals=dict(zip(self.generators, self.symbols)))
        return FieldElement(self, self.reduce(self.polys.from_expr(sympy.expand(expr))))

    def scalar(self, value: Scalar) -> "FieldElement":
        return FieldElement(self, self.polys.ground_new(QQ.from_sympy(sympy.Rational(value))))

    def zero(self) -> "FieldElement":
        return self.scalar(0)

    def one(self) -> "FieldElement":
        return self.scalar(1)

    def generator(self, name: str) -> "FieldElement":
        return self.element(name)

    def multiplication_matrix(self, poly: PolyElement) -> sympy.Matrix:
        """Matrix of y -> poly * y on the monomial basis."""
        columns = [self.reduce(poly * self.polys.from_dict({exponents: QQ.one})) for exponents in self.basis]
        return sympy.Matrix(
            len(self.basis),
            len(self.basis),
            lambda i, j: QQ.to_sympy(columns[j].get(self.basis[i], QQ.zero)),
        )

    def from_coordinates(self, values: Sequence) -> PolyElement:
        return self.polys.from_dict(
            {exponents: QQ.from_sympy(sympy.Rational(v)) for exponents, v in zip(self.basis, values) if v != 0}
        )


@dataclass(frozen=True)
class FieldElement:
    ring: QuotientRing
    poly: PolyElement

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.ring is not self.ring:
                raise ValueError("elements of different rings")
            return other
        return self.ring.scalar(other)

    def __add__(self, other):
        other = self._coerce(other)
        return FieldElement(self.ring, self.poly + other.poly)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.ring, -self.poly)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return FieldElement(self.ring, self.ring.reduce(self.poly * other.poly))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, exponent: int):
        base = self if exponent >= 0 else self.inverse()
        result = self.ring.one()
        for _ in range(abs(exponent)):
            result = result * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, sympy.Rational)):
            other = self.ring.scalar(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.ring is other.ring and self.poly == other.poly

    def __hash__(self):
        return hash(self.poly)

    @property
    def is_zero(self) -> bool:
        return not self.poly

    def inverse(self) -> "FieldElement":
        """Solve x * y = 1 through the multiplication matrix of x."""
        if self.is_zero:
            raise NotInvertibleError(self)
        if self.poly.is_ground:
            return FieldElement(self.ring, self.ring.polys.ground_new(QQ.quo(QQ.one, self.poly.LC)))
        matrix = self.ring.multiplication_matrix(self.poly)
        if matrix.det() == 0:
            raise NotInvertibleError(self)
        solution = matrix.LUsolve(sympy.Matrix([1] + [0] * (self.ring.dimension - 1)))
        return FieldElement(self.ring, self.ring.from_coordinates(list(solution)))

    def to_expr(self):
        return self.poly.as_expr()

    def __str__(self):
        return str(self.to_expr())

    __repr__ = __str__


@dataclass(frozen=True)
class Matrix2:
    a: FieldElement
    b: FieldElement
    c: FieldElement
    d: FieldElement

    @classmethod
    def identity(cls, ring: QuotientRing) -> "Matrix2":
        return cls(ring.one(), ring.zero(), ring.zero(), ring.one())

    @property
    def ring(self) -> QuotientRing:
        return self.a.ring

    def __mul__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def det(self) -> FieldElement:
        return self.a * self.d - self.b * self.c

    def trace(self) -> FieldElement:
        return self.a + self.d

    def inverse(self) -> "Matrix2":
        det = self.det()
        if det.is_zero:
            raise NotInvertibleError(det)
        inv = det.inverse()
        return Matrix2(self.d * inv, -self.b * inv, -self.c * inv, self.a * inv)

    def __pow__(self, exponent: int) -> "Matrix2":
        base = self if exponent >= 0 else self.inverse()
        result = Matrix2.identity(self.ring)
        for _ in range(abs(exponent)):
            result = result * base
        return result

    @property
    def is_identity(self) -> bool:
        return self == Matrix2.identity(self.ring)

    def entries(self) -> List[List[str]]:
        return [[str(self.a), str(self.b)], [str(self.c), str(self.d)]]


class RelationCheck(BaseModel):
    relation: str
    holds: bool
    lhs: Optional[List[List[str]]] = None
    rhs: Optional[List[List[str]]] = None
    corrected: Optional[str] = None
    erratum: Optional[str] = None


class RepresentationReport(BaseModel):
    type_name: str
    branch: str
    ring: str
    relations: List[RelationCheck] = []
    holds: bool = True
    determinants_nonzero: bool = True
    errata: List[str] = []


class CommutatorWitness(BaseModel):
    type_name: str
    branch: str
    pair: Optional[Tuple[str, str]] = None
    commutator: Optional[List[List[str]]] = None
    nonabelian: bool


class IntertwinerReport(BaseModel):
    type_name: str
    branch: str
    dimensions: Dict[str, int]


# Root choice per type and branch: (generators, defining polynomials)
BRANCHES: Dict[str, Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]]] = {
    "B_ii": {
        "i": (("l",), ("l**2 - l + 1",)),
        "degenerate": (("l",), ("l + 1",)),
    },
    "B_vi": {"i": (("l",), ("l**4 - l**3 + l**2 - l + 1",))},
    "H_iii": {"i": (("l",), ("l**4 - l**3 + l**2 - l + 1",))},
    "H_ii": {
        "i": (("l", "p"), ("l**2 + l + 1", "p**2 + p + 2/3")),
        "ii": (("l", "p"), ("l**2 - l + 1", "p**2 - p + 2/3")),
    },
}


@dataclass(frozen=True)
class Representation:
    type_name: str
    branch: str
    ring: QuotientRing
    matrices: Dict[str, Matrix2]

    def evaluate(self, word: Sequence[str]) -> Matrix2:
        result = Matrix2.identity(self.ring)
        for name in word:
            result = result * self.matrices[name]
        return result


@lru_cache(maxsize=None)
def quotient_ring(type_name: str, branch: str) -> QuotientRing:
    if type_name not in BRANCHES:
        raise RepresentationError(f"No representation for type '{type_name}'. Valid: {', '.join(BRANCHES)}")
    if branch not in BRANCHES[type_name]:
        raise RepresentationError(
            f"Invalid branch '{branch}' for {type_name}. Valid: {', '.join(BRANCHES[type_name])}"
        )
    generators, polynomials = BRANCHES[type_name][branch]
    return QuotientRing(generators, polynomials, name=f"{type_name}/{branch}")


def _diagonal(ring: QuotientRing, l: FieldElement) -> Matrix2:
    return Matrix2(l, ring.zero(), ring.zero(), l.inverse())


@lru_cache(maxsize=None)
def build_representation(type_name: str, branch: str = "i") -> Representation:
    """
    Instantiate A, B, C for a type with u = v = 1 and b = 1, so c is the
    printed product bc.
    """
    ring = quotient_ring(type_name, branch)
    l = ring.generator("l")
    one, zero = ring.one(), ring.zero()

    if type_name == "B_ii":
        matrices = {
            "a": Matrix2(one, l ** 2, zero, one),
            "b": _diagonal(ring, l),
            "c": Matrix2(one, one, zero, one),
        }
        return Representation(type_name, branch, ring, matrices)

    A = _diagonal(ring, l)
    b = one
    if type_name in ("B_vi", "H_iii"):
        a = -1 / (l * (l ** 2 - 1))
        # (1-l^2)^2 and (l^2-1)^2 are the same denominator
        c = (-(l ** 4) + l ** 2 - 1) / (l ** 2 - 1) ** 2
        d = l ** 3 / (l ** 2 - 1)
        if type_name == "B_vi":
            C = Matrix2(-(l ** 4) * a, -b / l ** 4, -(l ** 4) * c, -d / l ** 4)
        else:
            C = Matrix2(a, b / l ** 4, l ** 4 * c, d)
    else:
        p = ring.generator("p")
        c = ring.scalar(Fraction(-2, 3))
        if branch == "i":
            a, d = (l - 1) / 3, (-l - 2) / 3
            C = Matrix2(p, -b * (l + 2) / (3 * p), p * (1 - l) / (3 * b), 2 / (3 * p))
        else:
            a, d = (l + 1) / 3, (-l + 2) / 3
            C = Matrix2(p, b * (-l + 2) / (3 * p), -p * (l + 1) / (3 * b), 2 / (3 * p))
    B = Matrix2(a, b, c, d)
    return Representation(type_name, branch, ring, {"a": A, "b": B, "c": C})


def _names(word: Word, alphabet: Sequence[str]) -> List[str]:
    return [alphabet[letter] for letter in word]


def verify_representation(type_name: str, branch: str = "i") -> RepresentationReport:
    """Evaluate both sides of every catalog relation of the type exactly."""
    rep = build_representation(type_name, branch)
    p = catalog_utils.catalog_lookup(type_name)
    report = RepresentationReport(type_name=type_name, branch=branch, ring=rep.ring.name)
    report.determinants_nonzero = all(not m.det().is_zero for m in rep.matrices.values())

    errata = catalog_utils.relation_errata(type_name)
    for relation in p.relations:
        lhs = rep.evaluate(_names(relation.lhs, p.alphabet))
        rhs = rep.evaluate(_names(relation.rhs, p.alphabet))
        check = RelationCheck(relation=p.describe_relation(relation), holds=lhs == rhs)
        erratum = next((e for e in errata if e.matches(p, relation)), None)
        if not check.holds and erratum is not None:
            fixed_lhs, fixed_rhs = erratum.corrected_words(p)
            if rep.evaluate(_names(fixed_lhs, p.alphabet)) == rep.evaluate(_names(fixed_rhs, p.alphabet)):
                check.holds = True
                check.corrected = erratum.corrected
                check.erratum = erratum.note
                report.errata.append(check.relation)
                logger.warning(f"{type_name}/{branch}: relation {check.relation} holds only as {erratum.corrected}")
        if not check.holds:
            check.lhs, check.rhs = lhs.entries(), rhs.entries()
            report.holds = False
            logger.warning(f"{type_name}/{branch}: relation {check.relation} fails")
        report.relations.append(check)
    logger.info(f"{type_name}/{branch}: {len(report.relations)} relations checked, holds={report.holds}")
    return report


def commutator(x: Matrix2, y: Matrix2) -> Matrix2:
    return x * y * x.inverse() * y.inverse()


def nonabelian_witness(type_name: str, branch: str = "i") -> CommutatorWitness:
    """First pair among (A,B), (A,C), (B,C) with a nontrivial commutator."""
    rep = build_representation(type_name, branch)
    for x, y in (("a", "b"), ("a", "c"), ("b", "c")):
        value = commutator(rep.matrices[x], rep.matrices[y])
        if not value.is_identity:
            return CommutatorWitness(
                type_name=type_name, branch=branch, pair=(x.upper(), y.upper()),
                commutator=value.entries(), nonabelian=True,
            )
    return CommutatorWitness(type_name=type_name, branch=branch, nonabelian=False)


def _rank(rows: List[List[FieldElement]]) -> int:
    """Row rank over the field by Gaussian elimination."""
    rows = [list(row) for row in rows]
    rank = 0
    width = len(rows[0]) if rows else 0
    for col in range(width):
        pivot = next((i for i in range(rank, len(rows)) if not rows[i][col].is_zero), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = rows[rank][col].inverse()
        rows[rank] = [x * inv for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and not rows[i][col].is_zero:
                factor = rows[i][col]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def _intertwiner_rows(m: Matrix2, n: Matrix2) -> List[List[FieldElement]]:
    """Rows of X -> M X - X N acting on X = [[x0, x1], [x2, x3]]."""
    mm = [[m.a, m.b], [m.c, m.d]]
    nn = [[n.a, n.b], [n.c, n.d]]
    ring = m.ring
    rows = []
    for i in range(2):
        for j in range(2):
            row = []
            for k in range(2):
                for col in range(2):
                    value = ring.zero()
                    if col == j:
                        value = value + mm[i][k]
                    if k == i:
                        value = value - nn[col][j]
                    row.append(value)
            rows.append(row)
    return rows


def sigma_intertwiners(type_name: str, branch: str = "i") -> IntertwinerReport:
    """
    For every permutation σ of the generators, the dimension of the space of
    X with M_g X = X M_σ(g) for all generators g.
    """
    rep = build_representation(type_name, branch)
    names = sorted(rep.matrices)
    dimensions = {}
    for image in permutations(names):
        rows = []
        for source, target in zip(names, image):
            rows.extend(_intertwiner_rows(rep.matrices[source], rep.matrices[target]))
        key = ",".join(f"{s}->{t}" for s, t in zip(names, image))
        dimensions[key] = 4 - _rank(rows)
    return IntertwinerReport(type_name=type_name, branch=branch, dimensions=dimensions)
