# app/main.py

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from app.core.config import settings
from app.core.errors import ConfigError, ConjugacyError, HypothesisError, PrecisionError
from app.models.api_models import ConfigRequest, DegeneracyRequest, EvalRequest, VerifyRequest
from app.models.data_models import CosineConfig
from app.services import bounds_service, extremum_service, spectrum_service, structure_service
from app.services.config_service import config_to_dict, load_config
from app.utils.logging_config import setup_logging
from app.utils.serialization import to_jsonable

setup_logging()
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info(f"Application startup (precision {settings.precision_bits} bits)...")
    yield
    logger.info("Application shutdown complete.")


app = FastAPI(
    title="Onesided",
    description="One-sided bounds for conjugate-closed power sums and cosine sums.",
    version="1.0.0",
    lifespan=lifespan
)


@app.exception_handler(ConfigError)
@app.exception_handler(HypothesisError)
@app.exception_handler(PrecisionError)
@app.exception_handler(ConjugacyError)
async def onesided_error_handler(request: Request, exc: Exception):
    logger.warning(f"{request.url.path}: {type(exc).__name__}: {exc}")
    body = {"detail": str(exc), "error": type(exc).__name__}
    if isinstance(exc, ConfigError) and exc.field:
        body["field"] = exc.field
    return JSONResponse(status_code=422, content=body)


@app.get("/", tags=["Status"])
async def read_root():
    """Root endpoint providing basic service info."""
    return {"message": "Onesided bound service is running."}


@app.get("/health", tags=["Status"])
async def health_check():
    return {"status": "ok"}


# Compute endpoints are plain `def` so FastAPI runs them in its threadpool.

@app.post("/eval", tags=["Evaluation"])
def evaluate(request: EvalRequest):
    cfg = load_config(request.config)
    rows = []
    for k in range(request.k_start, request.k_end + 1):
        if isinstance(cfg, CosineConfig):
            rows.append({"k": k, "value": spectrum_service.eval_cosine_sum(cfg, k)})
        else:
            rows.append({"k": k, "value": spectrum_service.eval_power_sum(cfg, k)})
    return to_jsonable(rows)


@app.post("/bounds", tags=["Bounds"])
def bounds(request: ConfigRequest):
    cfg = load_config(request.config)
    return to_jsonable(bounds_service.applicable_bounds(cfg))


@app.post("/verify", tags=["Verification"])
def verify(request: VerifyRequest):
    cfg = load_config(request.config)
    logger.info(f"Verification requested: {request.theorem.value}, budget={request.budget}")
    record = extremum_service.verify_theorem(cfg, request.theorem, budget=request.budget,
                                             restrict=request.restrict)
    return to_jsonable(record)


@app.post("/degeneracy", tags=["Structure"])
def degeneracy(request: DegeneracyRequest):
    cfg = load_config(request.config)
    if isinstance(cfg, CosineConfig):
        cfg = spectrum_service.to_spectrum(cfg)
    return to_jsonable(structure_service.detect_degeneracy(cfg, allow_minus_one=request.allow_minus_one))


@app.post("/decompose", tags=["Structure"])
def decompose(request: ConfigRequest):
    cfg = load_config(request.config)
    if isinstance(cfg, CosineConfig):
        cfg = spectrum_service.to_spectrum(cfg)
    g = structure_service.group_decompose(cfg)
    try:
        projection = structure_service.choose_projection(g)
    except HypothesisError:
        projection = None
    return to_jsonable({"decomposition": g, "projection": projection})


@app.get("/extremal/{n}", tags=["Evaluation"])
def extremal(n: int):
    return config_to_dict(spectrum_service.extremal_example(n))


if __name__ == "__main__":
    import uvicorn
    uvicorn.run("app.main:app", host="0.0.0.0", port=8001, reload=True)
