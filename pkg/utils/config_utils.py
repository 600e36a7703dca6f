# utils/config_utils.py
import os
import logging
from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# Search limits
DEFAULT_BUDGET_NODES = int(os.getenv("MONOID_BUDGET_NODES", "50000000"))
CLASS_CACHE_MAX_MEMBERS = int(os.getenv("MONOID_CLASS_CACHE_MAX_MEMBERS", "200000"))
BITMAP_LIMIT = int(os.getenv("MONOID_BITMAP_LIMIT", str(1 << 26)))
VECTOR_THRESHOLD = int(os.getenv("MONOID_VECTOR_THRESHOLD", "2048"))
DENOMINATOR_LENGTH_CAP = int(os.getenv("MONOID_DENOMINATOR_LENGTH_CAP", "12"))

# Output
FULL_MEMBERS_THRESHOLD = int(os.getenv("MONOID_FULL_MEMBERS_THRESHOLD", "1000"))
LOG_LEVEL = os.getenv("MONOID_LOG_LEVEL", "INFO")

DATA_DIR = os.getenv("MONOID_DATA_DIR", os.path.join(REPO_ROOT, "data"))


def data_path(*parts: str) -> str:
    """Absolute path of a file shipped under the data directory."""
    return os.path.join(DATA_DIR, *parts)


def configure_logging(level: str = None):
    """
    Send log records to stderr so stdout stays a single report document.
    """
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger.debug(f"Logging configured at {level or LOG_LEVEL}")
