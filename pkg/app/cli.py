# app/cli.py
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app import services
from app.models import SUBCOMMANDS, CommandRequest, OutputFormat
from utils import config_utils
from utils.catalog_utils import CatalogError
from utils.presentation_utils import PresentationError

logger = logging.getLogger(__name__)

HELP = {
    "class": "enumerate the equivalence class of --word",
    "equiv": "decide --u ≃ --v",
    "derive": "shortest rewriting chain from --u to --v",
    "divides": "does --u divide --w on --side",
    "quotients": "classes X with u·X ≃ w (left) or X·u ≃ w (right)",
    "common-multiples": "common multiples of --u and --v of --length",
    "lcm": "bounded least-common-multiple certificate up to --max-length",
    "fundamental": "fundamental-element witness for --word",
    "quasi-central": "σ set of --word, or scan all classes up to --max-length",
    "theorem3": "verify the listed fundamental elements of --type",
    "cancel-scan": "bounded cancellation check up to --max-length",
    "morphism": "check a letter map --from X --to Y --map a=b,...",
    "anti-morphism": "check a letter map against every relation read backwards",
    "sigma-check": "check letterwise σ(lhs) ≃ σ(rhs) for --map",
    "coxeter": "smallest k <= --max-k with (cba)^k fundamental",
    "denominator": "every U of length <= --max-length divides Δ^l(U)",
    "divisor-symmetry": "compare left and right divisors of --word",
    "product-check": "Δ·Δ' and Δ'·Δ fundamental for Δ = --u, Δ' = --v",
    "rep-verify": "verify the 2x2 representation of --type on --branch",
    "intertwiners": "intertwiner dimensions for every permutation of the generators",
    "omega-check": "check bifurcation polynomials (--type X or --all)",
    "catalog": "list the catalog types",
}


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.stderr.write(f"valid subcommands: {', '.join(SUBCOMMANDS)}\n")
        sys.exit(services.EXIT_USAGE)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--type", dest="type_name", help="catalog type label, e.g. B_ii")
    parser.add_argument("--presentation-file", help="presentation file (letters:/rel: lines)")
    parser.add_argument("--budget-nodes", type=int, help="visited-word budget per search")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default="json")
    parser.add_argument("--full", action="store_true", help="never elide class members")


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(prog="app.py", description="Exact engine for positive homogeneous monoid presentations")
    subparsers = parser.add_subparsers(dest="subcommand", parser_class=UsageParser)
    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(name, help=HELP[name])
        _add_common(sub)
        sub.add_argument("--word")
        sub.add_argument("--u")
        sub.add_argument("--v")
        sub.add_argument("--w")
        sub.add_argument("--side", choices=["left", "right"], default="left")
        sub.add_argument("--length", type=int)
        sub.add_argument("--max-length", type=int)
        sub.add_argument("--max-k", type=int)
        sub.add_argument("--from", dest="from_type")
        sub.add_argument("--to", dest="to_type")
        sub.add_argument("--map")
        sub.add_argument("--branch", default="i")
        sub.add_argument("--independent", action="store_true", help="non-standard independent witnesses")
        sub.add_argument("--all", action="store_true")
    return parser


def _usage_exit(message: str) -> int:
    logger.error(message)
    sys.stderr.write(f"error: {message}\n")
    return services.EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> int:
    config_utils.configure_logging()
    args = build_parser().parse_args(argv)
    if not args.subcommand:
        return _usage_exit(f"missing subcommand; valid subcommands: {', '.join(SUBCOMMANDS)}")

    fields = {key: value for key, value in vars(args).items() if value is not None}
    fields["type"] = fields.pop("type_name", None)
    try:
        request = CommandRequest(**fields)
        report = services.dispatch(request)
    except ValidationError as e:
        return _usage_exit("; ".join(err["msg"] for err in e.errors()))
    except (PresentationError, services.UsageError) as e:
        return _usage_exit(str(e))
    except CatalogError as e:
        return _usage_exit(e.args[0] if e.args else str(e))

    sys.stdout.write(services.render(report, request.format) + "\n")
    return report.exit_code
