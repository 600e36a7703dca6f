# app/services.py
"""
Dispatch layer shared by the command line and the HTTP API.

dispatch() resolves the presentation, runs one operation and wraps the
outcome in a Report whose exit code follows the verdict: 0 for success or
a holding verdict, 1 for a definite negative, 2 for an exhausted budget.
"""
import logging
from typing import Any, Callable, Dict, List, Optional, Tuple

from app.models import CommandRequest, OutputFormat, Report
from utils import (
    algebra_utils,
    catalog_utils,
    config_utils,
    discriminant_utils,
    divisibility_utils,
    rewrite_utils,
    structure_utils,
)
from utils.presentation_utils import Presentation, PresentationError, parse_presentation
from utils.rewrite_utils import BudgetExceeded, SearchBudget, Verdict
from utils.word_utils import Word

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64

VERDICT_EXIT_CODES = {
    "yes": EXIT_OK,
    "holds": EXIT_OK,
    "holds_with_erratum": EXIT_OK,
    "lcm_found": EXIT_OK,
    "no": EXIT_NEGATIVE,
    "fails": EXIT_NEGATIVE,
    "no_lcm_up_to": EXIT_NEGATIVE,
    "no_common_multiple_up_to": EXIT_NEGATIVE,
    "inconclusive": EXIT_INCONCLUSIVE,
}


class UsageError(ValueError):
    """Missing or malformed command parameters."""


def load_presentation(request: CommandRequest) -> Optional[Presentation]:
    if request.type_name:
        return catalog_utils.catalog_lookup(request.type_name)
    if request.presentation_file:
        try:
            with open(request.presentation_file, encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise UsageError(f"Cannot read presentation file: {e}")
        return parse_presentation(text, name=request.presentation_file)
    if request.presentation_text:
        return parse_presentation(request.presentation_text)
    return None


def _require(request: CommandRequest, *names: str):
    missing = [name for name in names if getattr(request, name) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise UsageError(f"'{request.subcommand}' needs {flags}")


def _verdict(value: Verdict) -> str:
    return value.value


class _Context:
    """Presentation, budget and word formatting for one request."""

    def __init__(self, request: CommandRequest, presentation: Optional[Presentation]):
        self.request = request
        self.raw = presentation
        self.p = rewrite_utils.ensure_normalized(presentation) if presentation is not None else None
        self.budget = SearchBudget(
            max_nodes=request.budget_nodes if request.budget_nodes is not None else config_utils.DEFAULT_BUDGET_NODES
        )

    def word(self, text: str) -> Word:
        return self.p.read_word(text)

    def fmt(self, word: Word) -> str:
        return self.p.format(word) if word else "1"

    def sigma(self, sigma: structure_utils.PermutationSigma) -> Dict[str, str]:
        return sigma.names(self.p)

    def letter_map(self, text: str, source: Presentation, target: Presentation) -> Dict[int, Word]:
        mapping = {}
        for item in text.split(","):
            name, eq, image = item.partition("=")
            name = name.strip()
            if not eq or name not in source.alphabet:
                raise UsageError(f"Bad map entry '{item}'; expected <letter>=<word>")
            mapping[source.alphabet.index(name)] = target.read_word(image)
        return mapping


Outcome = Tuple[str, Dict[str, Any]]


def _class(ctx: _Context) -> Outcome:
    _require(ctx.request, "word")
    cls = rewrite_utils.equivalence_class(ctx.p, ctx.word(ctx.request.word), ctx.budget)
    result: Dict[str, Any] = {"seed": ctx.fmt(cls.seed), "canonical": ctx.fmt(cls.canonical), "size": len(cls)}
    if ctx.request.full or len(cls) <= config_utils.FULL_MEMBERS_THRESHOLD:
        result["members"] = [ctx.fmt(m) for m in cls]
    else:
        result["members_elided"] = True
    return "yes", result


def _decision_result(ctx: _Context, decision: rewrite_utils.Decision) -> Outcome:
    result: Dict[str, Any] = {}
    if decision.witness:
        result["witness"] = [ctx.fmt(w) for w in decision.witness]
    return _verdict(decision.verdict), result


def _equiv(ctx: _Context) -> Outcome:
    _require(ctx.request, "u", "v")
    decision = rewrite_utils.are_equivalent(ctx.p, ctx.word(ctx.request.u), ctx.word(ctx.request.v), ctx.budget)
    if decision.verdict == Verdict.INCONCLUSIVE:
        raise BudgetExceeded(decision.nodes_visited, ctx.budget.max_nodes)
    return _decision_result(ctx, decision)


def _derive(ctx: _Context) -> Outcome:
    _require(ctx.request, "u", "v")
    u, v = ctx.word(ctx.request.u), ctx.word(ctx.request.v)
    chain = rewrite_utils.derivation(ctx.p, u, v, ctx.budget)
    if chain is None:
        return "no", {"source": ctx.fmt(u), "target": ctx.fmt(v)}
    steps = [
        {
            "word": ctx.fmt(step.word),
            "position": step.position,
            "relation_id": step.relation_id,
            "relation": ctx.p.describe_relation(ctx.p.relations[step.relation_id]),
            "direction": step.direction,
        }
        for step in chain.steps
    ]
    return "yes", {
        "source": ctx.fmt(u),
        "target": ctx.fmt(v),
        "steps": steps,
        "replayed": rewrite_utils.replay_derivation(ctx.p, chain),
    }


def _divides(ctx: _Context) -> Outcome:
    _require(ctx.request, "u", "w")
    decision = divisibility_utils.divides(
        ctx.p, ctx.word(ctx.request.u), ctx.word(ctx.request.w), ctx.request.side, ctx.budget
    )
    if decision.verdict == Verdict.INCONCLUSIVE:
        raise BudgetExceeded(decision.nodes_visited, ctx.budget.max_nodes)
    verdict, result = _decision_result(ctx, decision)
    result["side"] = ctx.request.side
    return verdict, result


def _quotients(ctx: _Context) -> Outcome:
    _require(ctx.request, "u", "w")
    found = divisibility_utils.quotients(
        ctx.p, ctx.word(ctx.request.u), ctx.word(ctx.request.w), ctx.request.side, ctx.budget
    )
    return ("yes" if found else "no"), {"side": ctx.request.side, "quotients": [ctx.fmt(q) for q in found]}


def _common_multiples(ctx: _Context) -> Outcome:
    _require(ctx.request, "u", "v", "length")
    multiples = divisibility_utils.common_multiples(
        ctx.p, ctx.word(ctx.request.u), ctx.word(ctx.request.v), ctx.request.side, ctx.request.length, ctx.budget
    )
    return "yes", {
        "side": multiples.side,
        "length": multiples.length,
        "multiples": [ctx.fmt(m) for m in multiples.multiples],
    }


def _lcm(ctx: _Context) -> Outcome:
    _require(ctx.request, "u", "v")
    max_length = ctx.request.max_length if ctx.request.max_length is not None else 6
    certificate = divisibility_utils.lcm_certificate(
        ctx.p, ctx.word(ctx.request.u), ctx.word(ctx.request.v), ctx.request.side, max_length, ctx.budget
    )
    if certificate.kind == "inconclusive":
        raise BudgetExceeded(certificate.nodes_visited, ctx.budget.max_nodes)
    result = {
        "kind": certificate.kind,
        "side": certificate.side,
        "max_length": certificate.max_length,
        "length": certificate.length,
        "scope": certificate.scope,
    }
    if certificate.lcm is not None:
        result["lcm"] = ctx.fmt(certificate.lcm)
    if certificate.witness is not None:
        result["witness"] = [ctx.fmt(w) for w in certificate.witness]
    return certificate.kind, result


def _witness_result(ctx: _Context, witness: structure_utils.FundamentalWitness) -> Dict[str, Any]:
    return {
        "delta": ctx.fmt(witness.delta),
        "sigma": ctx.sigma(witness.sigma),
        "per_generator": {ctx.p.alphabet[a]: ctx.fmt(w) for a, w in sorted(witness.per_generator.items())},
        "standard": witness.standard,
        "replayed": structure_utils.replay_witness(ctx.p, witness, ctx.budget),
    }


def _fundamental(ctx: _Context) -> Outcome:
    _require(ctx.request, "word")
    word = ctx.word(ctx.request.word)
    witness = structure_utils.is_fundamental(ctx.p, word, ctx.budget, independent_witnesses=ctx.request.independent)
    if witness is None:
        return "no", {"delta": ctx.fmt(word)}
    return "yes", _witness_result(ctx, witness)


def _quasi_central(ctx: _Context) -> Outcome:
    if ctx.request.word is None:
        _require(ctx.request, "max_length")
        entries = structure_utils.quasi_center_scan(ctx.p, ctx.request.max_length, ctx.budget)
        return ("yes" if entries else "no"), {
            "max_length": ctx.request.max_length,
            "elements": [
                {"word": ctx.fmt(e.word), "sigmas": [ctx.sigma(s) for s in e.sigmas]} for e in entries
            ],
        }
    word = ctx.word(ctx.request.word)
    sigmas = structure_utils.is_quasi_central(ctx.p, word, ctx.budget)
    return ("yes" if sigmas else "no"), {"delta": ctx.fmt(word), "sigmas": [ctx.sigma(s) for s in sigmas]}


def _theorem3(ctx: _Context) -> Outcome:
    _require(ctx.request, "type_name")
    rows = structure_utils.verify_theorem3(ctx.request.type_name, ctx.budget)
    rendered = []
    for row in rows:
        rendered.append({
            "label": row.label,
            "word": ctx.fmt(row.word),
            "printed_sigma": ctx.sigma(row.printed_sigma),
            "found_sigma": ctx.sigma(row.found_sigma) if row.found_sigma else None,
            "corrected_sigma": ctx.sigma(row.corrected_sigma) if row.corrected_sigma else None,
            "erratum": row.erratum,
            "equivalents_verified": row.equivalents_verified,
            "per_generator": (
                {ctx.p.alphabet[a]: ctx.fmt(w) for a, w in sorted(row.witness.per_generator.items())}
                if row.witness else None
            ),
            "verdict": _verdict(row.verdict),
        })
    verdicts = {row.verdict for row in rows}
    if Verdict.NO in verdicts:
        verdict = "no"
    elif Verdict.INCONCLUSIVE in verdicts:
        verdict = "inconclusive"
    else:
        verdict = "yes"
    return verdict, {"elements": rendered}


def _cancel_scan(ctx: _Context) -> Outcome:
    _require(ctx.request, "max_length")
    report = structure_utils.cancellation_scan(ctx.p, ctx.request.max_length, ctx.budget)
    violations = [
        {
            "letter": ctx.p.alphabet[v.letter],
            "side": v.side,
            "product_class": ctx.fmt(v.product_class),
            "x": ctx.fmt(v.x),
            "y": ctx.fmt(v.y),
        }
        for v in report.violations
    ]
    return ("no" if violations else "yes"), {"max_length": report.max_length, "violations": violations}


def _morphism_result(report: structure_utils.MorphismReport, source: Presentation, budget: SearchBudget) -> Outcome:
    if report.verdict == Verdict.INCONCLUSIVE:
        raise BudgetExceeded(report.nodes_visited or 0, budget.max_nodes)
    result: Dict[str, Any] = {"valid": report.verdict == Verdict.YES, "checked": report.checked}
    if report.failing_relation is not None:
        result["failing_relation"] = source.describe_relation(report.failing_relation)
    return _verdict(report.verdict), result


def _morphism(ctx: _Context) -> Outcome:
    _require(ctx.request, "from_type", "to_type", "map")
    source = catalog_utils.catalog_lookup(ctx.request.from_type)
    target = catalog_utils.catalog_lookup(ctx.request.to_type)
    letter_map = ctx.letter_map(ctx.request.map, source, target)
    report = structure_utils.check_morphism(source, target, letter_map, ctx.budget)
    verdict, result = _morphism_result(report, source, ctx.budget)
    result.update({"from": source.name, "to": target.name})
    return verdict, result


def _anti_morphism(ctx: _Context) -> Outcome:
    _require(ctx.request, "map")
    letter_map = ctx.letter_map(ctx.request.map, ctx.raw, ctx.raw)
    return _morphism_result(structure_utils.check_anti_morphism(ctx.raw, letter_map, ctx.budget), ctx.raw, ctx.budget)


def _sigma_check(ctx: _Context) -> Outcome:
    _require(ctx.request, "map")
    names = dict(item.split("=", 1) for item in ctx.request.map.split(","))
    sigma = structure_utils.PermutationSigma.from_names(ctx.p, {k.strip(): v.strip() for k, v in names.items()})
    return _morphism_result(structure_utils.sigma_relation_check(ctx.p, sigma, ctx.budget), ctx.p, ctx.budget)


def _coxeter(ctx: _Context) -> Outcome:
    max_k = ctx.request.max_k or 5
    report = structure_utils.coxeter_power_search(ctx.p, max_k, ctx.budget)
    if report.verdict == Verdict.INCONCLUSIVE:
        raise BudgetExceeded(report.nodes_visited or 0, ctx.budget.max_nodes)
    return _verdict(report.verdict), {
        "max_k": max_k,
        "k": report.k,
        "sigma": ctx.sigma(report.sigma) if report.sigma else None,
    }


def _denominator(ctx: _Context) -> Outcome:
    _require(ctx.request, "word")
    max_u_length = ctx.request.max_length if ctx.request.max_length is not None else 2
    report = structure_utils.universal_denominator_check(ctx.p, ctx.word(ctx.request.word), max_u_length, ctx.budget)
    return _verdict(report.verdict), {
        "delta": ctx.fmt(report.delta),
        "checked_lengths": report.checked_lengths,
        "skipped_lengths": report.skipped_lengths,
        "failures": [[ctx.fmt(word), side] for word, side in report.failures],
    }


def _divisor_symmetry(ctx: _Context) -> Outcome:
    _require(ctx.request, "word")
    report = structure_utils.divisor_symmetry(ctx.p, ctx.word(ctx.request.word), ctx.budget)
    return ("yes" if report.equal else "no"), {
        "delta": ctx.fmt(report.delta),
        "left_divisors": [ctx.fmt(w) for w in report.left_divisors],
        "right_divisors": [ctx.fmt(w) for w in report.right_divisors],
    }


def _product_check(ctx: _Context) -> Outcome:
    _require(ctx.request, "u", "v")
    report = structure_utils.fundamental_product_check(ctx.p, ctx.word(ctx.request.u), ctx.word(ctx.request.v), ctx.budget)
    ok = report.left_product_fundamental and report.right_product_fundamental
    return ("yes" if ok else "no"), {
        "delta": ctx.fmt(report.delta),
        "quasi_central": ctx.fmt(report.quasi_central),
        "left_product_fundamental": report.left_product_fundamental,
        "right_product_fundamental": report.right_product_fundamental,
        "reverse_inclusion": report.reverse_inclusion,
    }


def _rep_verify(ctx: _Context) -> Outcome:
    _require(ctx.request, "type_name")
    report = algebra_utils.verify_representation(ctx.request.type_name, ctx.request.branch)
    witness = algebra_utils.nonabelian_witness(ctx.request.type_name, ctx.request.branch)
    result = report.model_dump()
    result["nonabelian"] = witness.model_dump()
    if not (report.holds and report.determinants_nonzero):
        return "fails", result
    return ("holds_with_erratum" if report.errata else "holds"), result


def _intertwiners(ctx: _Context) -> Outcome:
    _require(ctx.request, "type_name")
    report = algebra_utils.sigma_intertwiners(ctx.request.type_name, ctx.request.branch)
    return "yes", report.model_dump()


def _omega_check(ctx: _Context) -> Outcome:
    types = [ctx.request.type_name] if ctx.request.type_name and not ctx.request.all else catalog_utils.TYPE_LABELS
    reports = discriminant_utils.check_all(types)
    rows = [r.model_dump() for r in reports]
    ok = all(r.verdict != "fails" for r in reports)
    return ("holds" if ok else "fails"), {"rows": rows}


def _catalog(ctx: _Context) -> Outcome:
    return "yes", {"types": [entry.model_dump() for entry in catalog_utils.list_catalog()]}


HANDLERS: Dict[str, Callable[[_Context], Outcome]] = {
    "class": _class,
    "equiv": _equiv,
    "derive": _derive,
    "divides": _divides,
    "quotients": _quotients,
    "common-multiples": _common_multiples,
    "lcm": _lcm,
    "fundamental": _fundamental,
    "quasi-central": _quasi_central,
    "theorem3": _theorem3,
    "cancel-scan": _cancel_scan,
    "morphism": _morphism,
    "anti-morphism": _anti_morphism,
    "sigma-check": _sigma_check,
    "coxeter": _coxeter,
    "denominator": _denominator,
    "divisor-symmetry": _divisor_symmetry,
    "product-check": _product_check,
    "rep-verify": _rep_verify,
    "intertwiners": _intertwiners,
    "omega-check": _omega_check,
    "catalog": _catalog,
}


def dispatch(request: CommandRequest) -> Report:
    """
    Run one command. Raises PresentationError, CatalogError or UsageError
    for bad input; every other outcome is a Report.
    """
    presentation = load_presentation(request)
    ctx = _Context(request, presentation)
    logger.info(f"Running {request.subcommand} on {presentation.name if presentation else '-'}")
    try:
        verdict, result = HANDLERS[request.subcommand](ctx)
        nodes = None
    except BudgetExceeded as e:
        logger.warning(f"{request.subcommand}: {e}")
        verdict, result, nodes = "inconclusive", {"message": str(e)}, e.nodes_visited
    except (ValueError, IndexError) as e:
        if isinstance(e, PresentationError):
            raise
        raise UsageError(str(e))

    return Report(
        subcommand=request.subcommand,
        presentation=presentation.name if presentation else None,
        verdict=verdict,
        exit_code=VERDICT_EXIT_CODES[verdict],
        budget_nodes=ctx.budget.max_nodes,
        nodes_visited=nodes,
        result=result,
    )


def render(report: Report, output_format: OutputFormat) -> str:
    if output_format == OutputFormat.JSON:
        return report.model_dump_json(indent=2)
    lines = [f"{report.subcommand}: {report.verdict} (exit {report.exit_code})"]
    if report.presentation:
        lines.append(f"presentation: {report.presentation}")
    if report.nodes_visited is not None:
        lines.append(f"nodes visited: {report.nodes_visited} of {report.budget_nodes}")
    lines.extend(_text_lines(report.result, 0))
    return "\n".join(lines)


def _text_lines(value: Any, depth: int) -> List[str]:
    pad = "  " * depth
    lines = []
    if isinstance(value, dict):
        for key, item in value.items():
            if isinstance(item, (dict, list)) and item:
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(item, depth + 1))
            else:
                lines.append(f"{pad}{key}: {item}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_text_lines(item, depth + 1))
            else:
                lines.append(f"{pad}- {item}")
    return lines
