# utils/discriminant_utils.py
"""
Bifurcation polynomials of the Sekiguchi cubics.

ω_X is the resultant of Δ_X and ∂Δ_X/∂z, computed exactly as the
determinant of the Sylvester matrix and compared, up to a nonzero
constant, with the tabulated factored form.
"""
import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import sympy
from pydantic import BaseModel

from utils import config_utils
from utils.catalog_utils import TYPE_LABELS, CatalogError

logger = logging.getLogger(__name__)

x, y, z = sympy.symbols("x y z")
_SYMBOLS = {"x": x, "y": y, "z": z}


@dataclass(frozen=True)
class UniPoly:
    """A polynomial in one variable; coefficients lowest degree first, trailing zeros stripped."""

    coefficients: Tuple[sympy.Expr, ...]
    variable: str = "z"

    @classmethod
    def from_expr(cls, expr, variable: str = "z") -> "UniPoly":
        symbol = sympy.Symbol(variable)
        poly = sympy.Poly(sympy.expand(expr), symbol)
        return cls(tuple(reversed(poly.all_coeffs())), variable).trimmed()

    def trimmed(self) -> "UniPoly":
        coeffs = list(self.coefficients)
        while coeffs and sympy.expand(coeffs[-1]) == 0:
            coeffs.pop()
        return UniPoly(tuple(coeffs), self.variable)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def derivative(self) -> "UniPoly":
        return UniPoly(tuple(i * c for i, c in enumerate(self.coefficients) if i), self.variable).trimmed()

    def to_expr(self):
        symbol = sympy.Symbol(self.variable)
        return sum((c * symbol ** i for i, c in enumerate(self.coefficients)), sympy.Integer(0))


class FactoredForm(BaseModel):
    sign: int = 1
    factors: List[Tuple[str, int]]
    note: Optional[str] = None

    def to_expr(self):
        expr = sympy.Integer(self.sign)
        for factor, multiplicity in self.factors:
            expr *= sympy.sympify(factor, locals=_SYMBOLS) ** multiplicity
        return expr

    def degree(self) -> int:
        return sympy.Poly(self.to_expr(), y).degree()


def sylvester_matrix(f: UniPoly, g: UniPoly) -> sympy.Matrix:
    """deg(g) shifted rows of f, then deg(f) shifted rows of g, highest coefficient first."""
    m, n = f.degree, g.degree
    size = m + n
    rows = []
    for shift in range(n):
        row = [sympy.Integer(0)] * size
        for i, c in enumerate(reversed(f.coefficients)):
            row[shift + i] = c
        rows.append(row)
    for shift in range(m):
        row = [sympy.Integer(0)] * size
        for i, c in enumerate(reversed(g.coefficients)):
            row[shift + i] = c
        rows.append(row)
    return sympy.Matrix(rows)


def resultant(f: UniPoly, g: UniPoly):
    """Determinant of the Sylvester matrix (fraction-free Bareiss elimination)."""
    if f.is_zero and g.is_zero:
        raise ValueError("resultant of two zero polynomials")
    if f.is_zero or g.is_zero:
        return sympy.Integer(0)
    if f.degree == 0 and g.degree == 0:
        return sympy.Integer(1)
    return sympy.expand(sylvester_matrix(f, g).det(method="bareiss"))


class WeightAudit(BaseModel):
    weights: Dict[str, int]
    degree: int
    offending_terms: List[str] = []

    @property
    def passed(self) -> bool:
        return not self.offending_terms


class OmegaReport(BaseModel):
    type_name: str
    epsilon: int
    verdict: Literal["holds", "holds_with_erratum", "fails"]
    omega: str
    omega_coefficients: List[str]
    printed: str
    corrected: Optional[str] = None
    polynomial_corrected: Optional[str] = None
    erratum_note: Optional[str] = None
    constant: Optional[str] = None
    residual: Optional[str] = None
    degree_matches: bool
    weight_audit: WeightAudit
    corrected_weight_audit: Optional[WeightAudit] = None


@lru_cache(maxsize=1)
def sekiguchi_data() -> dict:
    with open(config_utils.data_path("sekiguchi.json"), encoding="utf-8") as f:
        return json.load(f)


def family(type_name: str) -> str:
    return type_name.split("_", 1)[0]


def polynomial(type_name: str, corrected: bool = False):
    if type_name not in TYPE_LABELS:
        raise CatalogError(f"Unknown type '{type_name}'")
    entry = sekiguchi_data()["types"][type_name]
    text = entry.get("polynomial_corrected", entry["polynomial"]) if corrected else entry["polynomial"]
    return sympy.sympify(text, locals=_SYMBOLS)


def weight_audit(type_name: str, corrected: bool = False) -> WeightAudit:
    """Check every monomial of Δ_X against the weighted degree of its family."""
    spec = sekiguchi_data()["families"][family(type_name)]
    weights = spec["weights"]
    audit = WeightAudit(weights=weights, degree=spec["degree"])
    poly = sympy.Poly(sympy.expand(polynomial(type_name, corrected)), x, y, z)
    for (ex, ey, ez), coeff in poly.terms():
        weight = ex * weights["x"] + ey * weights["y"] + ez * weights["z"]
        if weight != spec["degree"]:
            term = coeff * x ** ex * y ** ey * z ** ez
            audit.offending_terms.append(f"{term} (weight {weight})")
    if audit.offending_terms:
        logger.warning(f"{type_name}: weight audit failed for {', '.join(audit.offending_terms)}")
    return audit


def bifurcation_polynomial(type_name: str, epsilon: int, corrected: bool = False):
    """ω = resultant(Δ_X(ε, y, z), ∂_z Δ_X(ε, y, z)) as an expression in y."""
    f = UniPoly.from_expr(polynomial(type_name, corrected).subs(x, epsilon), "z")
    return sympy.expand(resultant(f, f.derivative()))


def _compare(omega, form: FactoredForm) -> Tuple[bool, Optional[str], Optional[str]]:
    """(proportional, constant, residual) for ω against one factored form."""
    quotient, remainder = sympy.div(sympy.Poly(omega, y), sympy.Poly(form.to_expr(), y))
    if remainder.is_zero and quotient.degree() == 0 and not quotient.is_zero:
        return True, str(quotient.as_expr()), None
    residual = remainder.as_expr() if not remainder.is_zero else quotient.as_expr()
    return False, None, str(residual)


def specialize_and_check(type_name: str, epsilon: int = None) -> OmegaReport:
    """
    Compare ω_X(ε, y) with the tabulated factored form. Rows with a recorded
    correction (of the polynomial, of the factored form, or both) are retried
    against it and reported as holds_with_erratum.
    """
    entry = sekiguchi_data()["types"].get(type_name)
    if entry is None:
        raise CatalogError(f"Unknown type '{type_name}'")
    if epsilon is None:
        epsilon = sekiguchi_data()["families"][family(type_name)]["epsilon"]

    printed = FactoredForm(**entry["omega_printed"])
    corrected = FactoredForm(**entry["omega_corrected"]) if "omega_corrected" in entry else None
    polynomial_fixed = "polynomial_corrected" in entry

    attempts = [(False, printed)]
    if corrected is not None:
        attempts.append((False, corrected))
    if polynomial_fixed:
        attempts.append((True, printed))
        if corrected is not None:
            attempts.append((True, corrected))

    omegas = {}
    verdict, residual = "fails", None
    for use_corrected_poly, form in attempts:
        if use_corrected_poly not in omegas:
            omegas[use_corrected_poly] = bifurcation_polynomial(type_name, epsilon, use_corrected_poly)
        omega = omegas[use_corrected_poly]
        holds, constant, found_residual = _compare(omega, form)
        if residual is None:
            residual = found_residual
        if holds:
            verdict = "holds" if (use_corrected_poly, form) == (False, printed) else "holds_with_erratum"
            break

    if verdict == "fails":
        use_corrected_poly, form, omega, constant = False, printed, omegas[False], None
        logger.error(f"{type_name}: ω does not match the tabulated form, residual {residual}")
    else:
        residual = None
        if verdict == "holds_with_erratum":
            logger.warning(f"{type_name}: printed data does not verify; using recorded correction")

    notes = []
    if use_corrected_poly:
        notes.append(entry.get("polynomial_note", "polynomial corrected"))
    if form is corrected and corrected is not None:
        notes.append(corrected.note or "factored form corrected")

    coefficients = sympy.Poly(omega, y).all_coeffs() if omega != 0 else [0]
    return OmegaReport(
        type_name=type_name,
        epsilon=epsilon,
        verdict=verdict,
        omega=str(sympy.factor(omega)),
        omega_coefficients=[str(c) for c in reversed(coefficients)],
        printed=str(printed.to_expr()),
        corrected=str(corrected.to_expr()) if corrected else None,
        polynomial_corrected=entry.get("polynomial_corrected") if use_corrected_poly else None,
        erratum_note="; ".join(notes) or None,
        constant=constant,
        residual=residual,
        degree_matches=sympy.Poly(omega, y).degree() == form.degree(),
        weight_audit=weight_audit(type_name),
        corrected_weight_audit=weight_audit(type_name, corrected=True) if use_corrected_poly else None,
    )


def check_all(types: Sequence[str] = TYPE_LABELS) -> List[OmegaReport]:
    return [specialize_and_check(type_name) for type_name in types]
