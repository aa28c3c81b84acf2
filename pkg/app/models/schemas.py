from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import (BaseModel, ConfigDict, Field, field_validator,
                      model_validator)
from scipy.spatial.distance import pdist

from app.core.config import settings
from app.core.exceptions import LabelError

Point = Tuple[float, ...]


class ErrorCode(str, Enum):
    INVALID_INPUT = "400_INVALID_INPUT"
    VALIDATION_ERROR = "422_VALIDATION_ERROR"
    SECTION_VIOLATION = "SECTION_VIOLATION"
    IDENTITY_VIOLATED = "IDENTITY_VIOLATED"
    COLLISION_WITNESS = "COLLISION_WITNESS"
    NOT_CONVERGED = "NOT_CONVERGED"


class RunManifest(BaseModel):
    subcommand: str
    parameters: Dict[str, Any]
    seed: Optional[int] = None
    version: str
    wall_time_seconds: float = Field(..., ge=0)


class Configuration(BaseModel):
    """
    Ordered tuple of pairwise-distinct points in the closed unit ball

    Plain n-configurations hold p_1..p_n in slots 0..n-1. Configurations
    produced by a section hold the added point p_0 in slot 0.
    """

    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=1)
    points: Tuple[Point, ...] = Field(..., min_length=1)

    @field_validator("points")
    @classmethod
    def validate_finite(cls, v: Tuple[Point, ...]) -> Tuple[Point, ...]:
        for k, p in enumerate(v):
            if not all(np.isfinite(p)):
                raise ValueError(f"point {k} has non-finite coordinates")
        return v

    @model_validator(mode="after")
    def validate_configuration(self) -> "Configuration":
        for k, p in enumerate(self.points):
            if len(p) != self.dim:
                raise ValueError(
                    f"point {k} has {len(p)} coordinates, expected dim={self.dim}"
                )

        arr = np.asarray(self.points, dtype=float)
        norms = np.linalg.norm(arr, axis=1)
        outside = np.flatnonzero(norms > 1.0 + settings.eps_ball)
        if outside.size:
            k = int(outside[0])
            raise ValueError(
                f"point {k} lies outside the closed unit ball (norm {norms[k]!r})"
            )

        if len(self.points) > 1 and pdist(arr).min() <= 0.0:
            raise ValueError("points must be pairwise distinct")
        return self

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Configuration":
        arr = np.asarray(arr, dtype=float)
        return cls(dim=arr.shape[1], points=tuple(map(tuple, arr.tolist())))

    @property
    def n(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float)


class SectionKind(str, Enum):
    MIDPOINT = "midpoint"
    ADD_NEAR = "add_near"
    BIASED_INTERPOLATION = "biased_interpolation"
    USER_REGISTERED = "user_registered"


class SectionDescriptor(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: SectionKind
    i: Optional[int] = Field(default=None, ge=1)
    j: Optional[int] = Field(default=None, ge=1)
    alpha: Optional[float] = None
    name: Optional[str] = None

    @model_validator(mode="after")
    def validate_parameters(self) -> "SectionDescriptor":
        if self.kind == SectionKind.ADD_NEAR:
            if self.i is None or self.j is None:
                raise ValueError("add_near requires indices i and j")
            if self.i == self.j:
                raise ValueError("add_near requires i != j")
        if self.kind == SectionKind.BIASED_INTERPOLATION:
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise ValueError("biased_interpolation requires alpha in (0, 1)")
        if self.kind == SectionKind.USER_REGISTERED and not self.name:
            raise ValueError("user_registered sections require a name")
        return self

    @property
    def label(self) -> str:
        if self.kind == SectionKind.MIDPOINT:
            return "midpoint"
        if self.kind == SectionKind.ADD_NEAR:
            return f"add-near:{self.i},{self.j}"
        if self.kind == SectionKind.BIASED_INTERPOLATION:
            return f"biased:{self.alpha!r}"
        return self.name


class SectionCheckReport(BaseModel):
    section: str
    n: int
    m: int
    seed: int
    samples_run: int
    worst_gap: float
    worst_containment_excess: float
    equivariance_checked: bool
    equivariance_violations: int = 0
    section_property_violations: int = 0
    gap_violations: int = 0
    containment_violations: int = 0
    equivariance_witness: Optional[Configuration] = None
    section_property_witness: Optional[Configuration] = None
    gap_witness: Optional[Configuration] = None
    containment_witness: Optional[Configuration] = None
    passed: bool
    manifest: Optional[RunManifest] = None


class ChordData(BaseModel):
    model_config = ConfigDict(frozen=True)

    q1: Point
    q2: Point
    x: Point
    r: float = Field(..., ge=1.0)
    degenerate: bool = False


class HomotopyPhase(str, Enum):
    SCALING = "scaling"
    LINE = "line"


class HomotopyTrace(BaseModel):
    section: str
    grid: List[float]
    frames: List[Configuration]
    phase: List[HomotopyPhase]
    manifest: Optional[RunManifest] = None

    @model_validator(mode="after")
    def validate_lengths(self) -> "HomotopyTrace":
        if not len(self.grid) == len(self.frames) == len(self.phase):
            raise ValueError("grid, frames and phase must have equal length")
        return self


class HomotopyFailure(BaseModel):
    frame_index: int
    time: float
    reason: str
    frame: List[Point]


class LoopSample(BaseModel):
    """
    Closed sampled path of planar configurations

    When `sectioned` is set the frames carry the added point in slot 0 and
    labels coincide with slots; otherwise label a lives in slot a - 1.
    """

    configs: List[Configuration] = Field(..., min_length=2)
    sectioned: bool = False

    @model_validator(mode="after")
    def validate_loop(self) -> "LoopSample":
        first = self.configs[0]
        if first.dim != 2:
            raise ValueError("loop samples must be planar (dim=2)")
        for config in self.configs:
            if config.dim != first.dim or config.n != first.n:
                raise ValueError("all frames must share n and dim")
        if self.configs[-1].points != first.points:
            raise ValueError("loop is not closed: first and last frames differ")
        return self

    @property
    def n(self) -> int:
        return self.configs[0].n

    def slot(self, label: int) -> int:
        index = label if self.sectioned else label - 1
        if not 0 <= index < self.n:
            raise LabelError(f"label {label} out of range for this loop")
        return index


class WitnessKind(str, Enum):
    COLLISION = "collision"
    OUTSIDE_BALL = "outside_ball"
    DISCONTINUITY = "discontinuity"


class FailureWitness(BaseModel):
    kind: WitnessKind
    loop_id: str
    frame_index: int
    slots: List[int]
    frame: List[Point]


class ObstructionReport(BaseModel):
    section: str
    n: int
    radius: float
    samples: int
    seed: int
    lambda_values: Dict[int, int] = Field(default_factory=dict)
    delta_values: Dict[str, int] = Field(default_factory=dict)
    lambda_consistent: bool = False
    lambda_value: Optional[int] = None
    delta_value: Optional[int] = None
    identity_holds: bool = False
    collision_witness: Optional[FailureWitness] = None
    manifest: Optional[RunManifest] = None


class PointMapKind(str, Enum):
    CONSTANT = "constant"
    CENTROID = "centroid"
    CONTRACTION = "contraction"
    USER_REGISTERED = "user_registered"


class PointMapDescriptor(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: PointMapKind
    q: Optional[Point] = None
    alpha: Optional[float] = None
    name: Optional[str] = None
    declared_symmetric: bool = True

    @model_validator(mode="after")
    def validate_parameters(self) -> "PointMapDescriptor":
        if self.kind in (PointMapKind.CONSTANT, PointMapKind.CONTRACTION):
            if self.q is None:
                raise ValueError(f"{self.kind.value} requires a point q")
            if np.linalg.norm(self.q) > 1.0 + settings.eps_ball:
                raise ValueError("q must lie in the closed unit ball")
        if self.kind == PointMapKind.CONTRACTION:
            if self.alpha is None or not 0.0 <= self.alpha < 1.0:
                raise ValueError("contraction requires alpha in [0, 1)")
        if self.kind == PointMapKind.USER_REGISTERED and not self.name:
            raise ValueError("user_registered maps require a name")
        return self

    @property
    def label(self) -> str:
        coords = ",".join(repr(v) for v in self.q or ())
        if self.kind == PointMapKind.CONSTANT:
            return f"constant:{coords}"
        if self.kind == PointMapKind.CENTROID:
            return "centroid"
        if self.kind == PointMapKind.CONTRACTION:
            return f"contraction:{self.alpha!r},{coords}"
        return self.name


class FixedSearchResult(BaseModel):
    map: str
    n: int
    m: int
    tol: float
    seed: int
    best_config: Configuration
    image_point: Point
    nearest_index: int
    residual: float = Field(..., ge=0)
    evaluations: int
    restarts_used: int
    converged: bool
    manifest: Optional[RunManifest] = None


# HTTP request bodies


class AddRequest(BaseModel):
    section: str
    configuration: Configuration


class VerifyRequest(BaseModel):
    section: str
    n: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    samples: int = Field(default=1000, ge=1)
    seed: int = 0
    equivariance: Optional[bool] = None


class HomotopyRequest(BaseModel):
    section: str
    configuration: Configuration
    frames: Optional[int] = Field(default=None, ge=2)


class ObstructRequest(BaseModel):
    section: str
    n: int = Field(..., ge=2)
    radius: Optional[float] = Field(default=None, gt=0)
    samples: Optional[int] = Field(default=None, ge=8)
    seed: int = 0
    trials: bool = True


class FixedRequest(BaseModel):
    map: str
    n: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    tol: Optional[float] = Field(default=None, gt=0)
    restarts: Optional[int] = Field(default=None, ge=1)
    budget: Optional[int] = Field(default=None, ge=1)
    seed: int = 0


class ErrorResponse(BaseModel):
    code: ErrorCode
    message: str
