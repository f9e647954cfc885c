from datetime import datetime

import time
import uvicorn
from fastapi import FastAPI, HTTPException, status, Request, Depends
from fastapi.middleware.cors import CORSMiddleware
from fastapi.encoders import jsonable_encoder
from fastapi.responses import JSONResponse
from fastapi.openapi.docs import get_swagger_ui_html

from app.config import (
    API_TITLE,
    API_DESCRIPTION,
    API_VERSION,
    API_HOST,
    API_PORT,
    API_DEBUG,
    CORS_ORIGINS,
    CORS_METHODS,
    CORS_HEADERS,
    CHECKPOINT_PATH,
    get_all_config
)
from app.logging_setup import setup_logging
from app.errors import BaseError
from app.serving.service import PredictionService
from app.serving.views import (
    ExtractResponse,
    InjectRequest,
    InjectResponse,
    PredictRequest,
    PredictResponse,
    SourceRequest,
)

logger = setup_logging()

app = FastAPI(
    title=API_TITLE,
    description=API_DESCRIPTION,
    version=API_VERSION,
    docs_url=None,  # Disable default docs to use custom Swagger UI
    redoc_url="/redoc",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=CORS_METHODS,
    allow_headers=CORS_HEADERS,
)

# Exception handler for custom errors
@app.exception_handler(BaseError)
async def baseerror_exception_handler(request: Request, exc: BaseError):
    return JSONResponse(
        status_code=exc.status_code,
        content=jsonable_encoder({
            "error_code": exc.error_code,
            "message": exc.detail,
            "context": exc.context if exc.context else None
        }),
    )

# Initialize services
logger.info("Initializing services with configuration: %s", get_all_config())
start_time = time.perf_counter_ns()
prediction_service = PredictionService(CHECKPOINT_PATH)
logger.info("Service initialization complete in %.2f ms", (time.perf_counter_ns() - start_time) / 1_000_000)


async def log_request(request: Request):
    logger.debug("Request received: %s %s", request.method, request.url.path)


def _internal_error(e: Exception) -> HTTPException:
    logger.error("Unexpected error: %s", str(e), exc_info=True)
    return HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=str(e))


@app.get("/docs", include_in_schema=False)
async def custom_swagger_ui_html():
    return get_swagger_ui_html(
        openapi_url=app.openapi_url,
        title=f"{app.title} - API Documentation",
        swagger_ui_parameters={"defaultModelsExpandDepth": -1}
    )


@app.post(
    "/extract",
    response_model=ExtractResponse,
    summary="List the loop nests of a C source",
    description="Parses the source and returns one entry per outermost loop nest, in source order.",
    dependencies=[Depends(log_request)]
)
def extract(request: SourceRequest):
    try:
        return ExtractResponse(nests=prediction_service.extract(request.source, request.file))
    except BaseError as e:
        raise e.to_http_exception()
    except Exception as e:
        raise _internal_error(e)


@app.post(
    "/predict",
    response_model=PredictResponse,
    response_model_by_alias=True,
    summary="Predict vectorization and interleave factors",
    description="""
    Returns the greedy (VF, IF) choice of the loaded agent for every loop nest
    of the source. With `rewrite` set, the response also carries the source
    with one `#pragma clang loop` line injected above each innermost loop.
    """,
    dependencies=[Depends(log_request)]
)
def predict(request: PredictRequest):
    try:
        query_start_time = time.perf_counter_ns()
        predictions, rewritten = prediction_service.predict(request.source, request.file, request.rewrite)
        execution_time = (time.perf_counter_ns() - query_start_time) / 1_000_000
        logger.info("Predicted %d nests of %s in %.2f ms", len(predictions), request.file, execution_time)
        return PredictResponse(
            predictions=predictions,
            source=rewritten,
            execution_time_ms=execution_time,
            timestamp=datetime.now(),
        )
    except BaseError as e:
        raise e.to_http_exception()
    except Exception as e:
        raise _internal_error(e)


@app.post(
    "/inject",
    response_model=InjectResponse,
    summary="Inject a given pragma",
    description="Injects vectorize_width(vf) interleave_count(if) above the selected nest, or every nest.",
    dependencies=[Depends(log_request)]
)
def inject(request: InjectRequest):
    try:
        source, nest_ids = prediction_service.inject(
            request.source, request.file, request.vf, request.if_, request.nest
        )
        return InjectResponse(source=source, nests=nest_ids)
    except BaseError as e:
        raise e.to_http_exception()
    except Exception as e:
        raise _internal_error(e)


@app.get(
    "/ready",
    summary="Health check endpoint",
    description="Returns status 200 if a checkpoint is loaded, 423 otherwise",
    dependencies=[Depends(log_request)]
)
def ready():
    if prediction_service.is_ready():
        return JSONResponse(
            status_code=status.HTTP_200_OK,
            content=jsonable_encoder({
                "status": "ok",
                "message": "Service is ready",
                "timestamp": datetime.now().isoformat()
            }),
        )
    logger.warning("Health check failed - no checkpoint loaded from %r", prediction_service.checkpoint_path)
    return JSONResponse(
        status_code=status.HTTP_423_LOCKED,
        content=jsonable_encoder({
            "status": "not_ready",
            "message": "No checkpoint loaded",
            "timestamp": datetime.now().isoformat()
        }),
    )


@app.get(
    "/",
    summary="Root endpoint",
    description="Redirects to API documentation",
)
def root():
    return JSONResponse(
        status_code=status.HTTP_200_OK,
        content=jsonable_encoder({
            "service": API_TITLE,
            "version": API_VERSION,
            "docs_url": "/docs",
            "redoc_url": "/redoc"
        }),
    )


if __name__ == "__main__":
    uvicorn.run(
        "app.server:app",
        host=API_HOST,
        port=API_PORT,
        reload=API_DEBUG,
    )
