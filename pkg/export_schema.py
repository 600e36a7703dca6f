"""Regenerate data/report.schema.json from the pydantic models."""
import json
import logging

from app.models import CommandRequest, Report
from utils import config_utils

logger = logging.getLogger(__name__)

SCHEMA_FILE = config_utils.data_path("report.schema.json")


def build_schema() -> dict:
    return {
        "report": Report.model_json_schema(),
        "request": CommandRequest.model_json_schema(by_alias=True),
    }


def write_schema(path: str = SCHEMA_FILE):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(build_schema(), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Schema written to {path}")


if __name__ == "__main__":
    config_utils.configure_logging()
    write_schema()
