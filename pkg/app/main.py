import logging

import uvicorn
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.api.endpoints import router
from app.core.config import settings
from app.core.constants import VERSION, HttpStatus
from app.models.schemas import ErrorCode, ErrorResponse

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper()),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)

logger = logging.getLogger(__name__)

app = FastAPI(
    title="Confspace API",
    description="Point-addition constructions on configuration spaces of the ball",
    version=VERSION,
    docs_url="/docs",
    redoc_url="/redoc",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(router, prefix="/api/v1")


@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    # same body shape as the 400 responses raised by the router
    message = "; ".join(
        f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}"
        for err in exc.errors()
    )
    error = ErrorResponse(code=ErrorCode.VALIDATION_ERROR, message=message)
    return JSONResponse(
        status_code=HttpStatus.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": error.model_dump()},
    )


@app.get("/")
async def root():
    return {
        "message": "Confspace API",
        "version": VERSION,
        "docs": "/docs",
        "health": "/api/v1/health",
    }


if __name__ == "__main__":
    uvicorn.run(
        "app.main:app",
        host="0.0.0.0",
        port=8000,
        reload=True if settings.environment == "dev" else False,
        log_level=settings.log_level.lower(),
    )
