# app/main.py
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from app import services
from app.models import SUBCOMMANDS, CommandRequest, Report
from utils import catalog_utils, config_utils
from utils.catalog_utils import CatalogError
from utils.presentation_utils import PresentationError

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    config_utils.configure_logging()
    logger.info(f"Application starting; data directory {config_utils.DATA_DIR}")
    yield
    logger.info("Application shutting down")


app = FastAPI(
    title="Monoid Presentation API",
    description="Exact word, divisibility and structure checks",
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.get("/health")
async def health():
    try:
        types = len(catalog_utils.list_catalog())
        return {"status": "healthy", "catalog_types": types}
    except CatalogError as e:
        logger.error(f"Health check error: {e}")
        return {"status": "error", "message": f"Health check failed: {e}"}


@app.get("/catalog")
async def catalog():
    return [entry.model_dump() for entry in catalog_utils.list_catalog()]


def run_command(request: CommandRequest) -> Report:
    try:
        return services.dispatch(request)
    except CatalogError as e:
        logger.error(f"Unknown type: {e}")
        raise HTTPException(status_code=404, detail=e.args[0] if e.args else str(e))
    except (PresentationError, services.UsageError) as e:
        logger.error(f"Bad request: {e}")
        raise HTTPException(status_code=400, detail=str(e))


@app.post("/{subcommand}", response_model=Report)
def command(subcommand: str, body: dict):
    if subcommand not in SUBCOMMANDS:
        raise HTTPException(status_code=404, detail=f"Unknown subcommand. Valid: {', '.join(SUBCOMMANDS)}")
    try:
        request = CommandRequest(**{**body, "subcommand": subcommand})
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return run_command(request)
