# app/models.py
from enum import Enum
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

SUBCOMMANDS = (
    "class", "equiv", "derive", "divides", "quotients", "common-multiples", "lcm",
    "fundamental", "quasi-central", "theorem3", "cancel-scan", "morphism", "anti-morphism",
    "sigma-check", "coxeter", "denominator", "divisor-symmetry", "product-check",
    "rep-verify", "intertwiners", "omega-check", "catalog",
)

# Subcommands that do not run against a single presentation
PRESENTATION_FREE = ("morphism", "rep-verify", "intertwiners", "omega-check", "catalog")


class OutputFormat(str, Enum):
    JSON = "json"
    TEXT = "text"


# Model for every CLI invocation and HTTP request body
class CommandRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    subcommand: Literal[SUBCOMMANDS]
    type_name: Optional[str] = Field(default=None, alias="type")
    presentation_file: Optional[str] = None
    presentation_text: Optional[str] = None
    budget_nodes: Optional[int] = Field(default=None, ge=1)
    format: OutputFormat = OutputFormat.JSON
    full: bool = False

    word: Optional[str] = None
    u: Optional[str] = None
    v: Optional[str] = None
    w: Optional[str] = None
    side: Literal["left", "right"] = "left"
    length: Optional[int] = Field(default=None, ge=0)
    max_length: Optional[int] = Field(default=None, ge=0)
    max_k: Optional[int] = Field(default=None, ge=1)
    from_type: Optional[str] = None
    to_type: Optional[str] = None
    map: Optional[str] = None
    branch: str = "i"
    independent: bool = False
    all: bool = False

    @model_validator(mode="after")
    def check_presentation_source(self):
        sources = [s for s in (self.type_name, self.presentation_file, self.presentation_text) if s]
        if len(sources) > 1:
            raise ValueError("give exactly one of --type, --presentation-file or presentation text")
        if not sources and self.subcommand not in PRESENTATION_FREE:
            raise ValueError(f"'{self.subcommand}' needs --type or --presentation-file")
        return self


class Report(BaseModel):
    """Single JSON document written for every command."""

    subcommand: str
    presentation: Optional[str] = None
    verdict: str
    exit_code: int
    budget_nodes: Optional[int] = None
    nodes_visited: Optional[int] = None
    result: Dict[str, Any] = {}
