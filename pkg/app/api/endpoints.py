import logging

from fastapi import APIRouter, HTTPException

from app.core.constants import HttpStatus
from app.core.exceptions import (ConfigurationSpaceError,
                                 HomotopyFailureError, SectionViolationError)
from app.models.schemas import (AddRequest, Configuration, ErrorCode,
                                ErrorResponse, FixedRequest, FixedSearchResult,
                                HomotopyRequest, HomotopyTrace,
                                ObstructionReport, ObstructRequest,
                                SectionCheckReport, VerifyRequest)
from app.services.cache_service import CacheService
from app.services.homotopy_service import uniqueness_homotopy
from app.services.obstruction_service import measure_coefficients
from app.services.report_service import RunTimer, build_manifest
from app.services.section_service import (apply_section, parse_section,
                                          verify_section)
from app.services.solver_service import (find_fixed_configuration,
                                         parse_point_map)

logger = logging.getLogger(__name__)

router = APIRouter()

cache_service = CacheService()


def _bad_request(code: ErrorCode, message: str) -> HTTPException:
    return HTTPException(
        status_code=HttpStatus.HTTP_400_BAD_REQUEST,
        detail=ErrorResponse(code=code, message=message).model_dump(),
    )


def _domain_error(e: Exception) -> HTTPException:
    if isinstance(e, (SectionViolationError, HomotopyFailureError)):
        return _bad_request(ErrorCode.SECTION_VIOLATION, str(e))
    return _bad_request(ErrorCode.INVALID_INPUT, str(e))


@router.post("/add", response_model=Configuration)
def add_point(request: AddRequest):
    """
    Append the section's point to a configuration
    """
    try:
        return apply_section(parse_section(request.section), request.configuration)
    except ConfigurationSpaceError as e:
        raise _domain_error(e)


@router.post("/verify", response_model=SectionCheckReport)
def verify(request: VerifyRequest):
    """
    Sample-check a section; reports are cached since runs are seeded
    """
    params = request.model_dump()
    cached_result = cache_service.get("verify", params)
    if cached_result is not None:
        return cached_result

    timer = RunTimer()
    try:
        report = verify_section(
            parse_section(request.section),
            n=request.n,
            m=request.m,
            sample_count=request.samples,
            rng_seed=request.seed,
            check_equivariance=request.equivariance,
        )
    except ConfigurationSpaceError as e:
        raise _domain_error(e)

    report.manifest = build_manifest("verify", params, request.seed, timer)
    cache_service.set("verify", params, report)
    return report


@router.post("/homotopy", response_model=HomotopyTrace)
def homotopy(request: HomotopyRequest):
    timer = RunTimer()
    try:
        trace = uniqueness_homotopy(
            parse_section(request.section), request.configuration, request.frames
        )
    except ConfigurationSpaceError as e:
        raise _domain_error(e)
    except ValueError as e:
        raise _bad_request(ErrorCode.INVALID_INPUT, str(e))

    trace.manifest = build_manifest(
        "homotopy", request.model_dump(mode="json"), None, timer
    )
    return trace


@router.post("/obstruct", response_model=ObstructionReport)
def obstruct(request: ObstructRequest):
    """
    Measure lambda and delta for a candidate section on planar loops
    """
    params = request.model_dump()
    cached_result = cache_service.get("obstruct", params)
    if cached_result is not None:
        return cached_result

    timer = RunTimer()
    try:
        report = measure_coefficients(
            parse_section(request.section),
            n=request.n,
            radius=request.radius,
            samples=request.samples,
            seed=request.seed,
            trials=request.trials,
        )
    except ConfigurationSpaceError as e:
        raise _domain_error(e)

    report.manifest = build_manifest("obstruct", params, request.seed, timer)
    cache_service.set("obstruct", params, report)
    return report


@router.post("/fixed", response_model=FixedSearchResult)
def fixed(request: FixedRequest):
    params = request.model_dump()
    cached_result = cache_service.get("fixed", params)
    if cached_result is not None:
        return cached_result

    timer = RunTimer()
    try:
        result = find_fixed_configuration(
            parse_point_map(request.map),
            n=request.n,
            m=request.m,
            tol=request.tol,
            restarts=request.restarts,
            budget=request.budget,
            rng_seed=request.seed,
        )
    except ConfigurationSpaceError as e:
        raise _domain_error(e)

    result.manifest = build_manifest("fixed", params, request.seed, timer)
    cache_service.set("fixed", params, result)
    return result


@router.get("/health")
async def health_check():
    """Health check endpoint"""
    return {"status": "healthy", "service": "confspace"}


@router.get("/cache/stats")
async def get_cache_stats():
    """Get cache statistics (for debugging)"""
    return cache_service.get_stats()
