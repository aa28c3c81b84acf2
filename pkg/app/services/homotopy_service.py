import logging
import math
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import (BoundaryError, HomotopyFailureError,
                                 InvalidConfigurationError, ParameterError,
                                 SectionViolationError)
from app.models.schemas import (ChordData, Configuration, HomotopyFailure,
                                HomotopyPhase, HomotopyTrace,
                                SectionDescriptor)
from app.services.section_service import (check_applicable, append_point,
                                          midpoint_section, resolve_section)
from app.utils.geometry import pairwise_gap, radial_projection

logger = logging.getLogger(__name__)


def _require_pair(c: Configuration) -> None:
    if c.n != 2:
        raise InvalidConfigurationError(f"expected a 2-configuration, got {c.n} points")



def chord_data(c: Configuration) -> ChordData:
    """
    Boundary points of the chord through (p_1, p_2) and the equal-ratio centre

    In line coordinates s along w = (p_2 - p_1)/|p_2 - p_1| with p_1 at s = 0,
    the chord ends A <= 0 and B >= |p_2 - p_1| solve |p_1 + s w|^2 = 1.
    Then r = (B - A)/|p_2 - p_1| and the centre x solves A - x = r (0 - x).
    """
    _require_pair(c)
    p1, p2 = c.as_array()
    d = p2 - p1
    length = float(np.linalg.norm(d))
    w = d / length

    b = float(p1 @ w)
    c0 = float(p1 @ p1) - 1.0
    sq = math.sqrt(max(b * b - c0, 0.0))
    # cancellation-free roots: s_minus * s_plus = c0
    if b >= 0.0:
        s_minus = -b - sq
        s_plus = c0 / s_minus if s_minus != 0.0 else length
    else:
        s_plus = -b + sq
        s_minus = c0 / s_plus
    # points on the sphere are their own chord ends
    a_end = min(s_minus, 0.0)
    b_end = max(s_plus, length)

    q1 = p1 + a_end * w
    q2 = p1 + b_end * w
    r = (b_end - a_end) / length

    # both points on the sphere: no scaling, centre at the midpoint
    if r - 1.0 <= settings.chord_degenerate_tol:
        return ChordData(
            q1=tuple(q1.tolist()),
            q2=tuple(q2.tolist()),
            x=tuple(((p1 + p2) / 2).tolist()),
            r=1.0,
            degenerate=True,
        )

    x = p1 + (a_end / (1.0 - r)) * w
    return ChordData(
        q1=tuple(q1.tolist()), q2=tuple(q2.tolist()), x=tuple(x.tolist()), r=r
    )


def _scale_factor(cd: ChordData, t: float) -> float:
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"time t={t} outside [0, 1]")
    if cd.degenerate:
        return 1.0
    return (1.0 - t) + cd.r * t


def scale_map(cd: ChordData, t: float, v) -> np.ndarray:
    """
    h_t(v) = ((1 - t) + r t)(v - x) + x, applied row-wise to arrays
    """
    factor = _scale_factor(cd, t)
    v = np.array(v, dtype=float)
    if factor == 1.0:
        return v
    x = np.asarray(cd.x)
    return factor * (v - x) + x


def scale_map_inverse(cd: ChordData, t: float, v) -> np.ndarray:
    factor = _scale_factor(cd, t)
    v = np.array(v, dtype=float)
    if factor == 1.0:
        return v
    x = np.asarray(cd.x)
    return (v - x) / factor + x


def conjugated_section(
    s: SectionDescriptor,
    c: Configuration,
    t: float,
    chord: Optional[ChordData] = None,
) -> Configuration:
    """
    s_t(c) = (H_t)^-1 . s . H_t (c), with p_1, p_2 copied into slots 1, 2
    """
    _require_pair(c)
    entry = resolve_section(s)
    check_applicable(entry, 2, c.dim)
    cd = chord or chord_data(c)

    # roundoff can leave h_1(p_i) a hair outside the sphere
    scaled = Configuration.from_array(
        radial_projection(scale_map(cd, t, c.as_array()))
    )
    try:
        scaled_out = append_point(scaled, entry.rule(scaled.as_array()))
    except SectionViolationError as e:
        raise SectionViolationError(
            f"section '{entry.name}' fails on the scaled pair at t={t}: {e}",
            witness=scaled,
        )
    p0 = scale_map_inverse(cd, t, scaled_out.points[0])
    return append_point(c, p0)


def is_equivariant_homotopy(
    s: SectionDescriptor, c: Configuration, t: float, tol: float = 1e-10
) -> bool:
    swapped = Configuration(dim=c.dim, points=(c.points[1], c.points[0]))
    here = np.asarray(conjugated_section(s, c, t).points[0])
    there = np.asarray(conjugated_section(s, swapped, t).points[0])
    return bool(np.linalg.norm(here - there) <= tol)


def between_or_offline(p0, p1, p2, eps_col: Optional[float] = None) -> bool:
    """
    True when p0 is off the line through p1, p2 or strictly inside the segment
    """
    eps_col = settings.eps_col if eps_col is None else eps_col
    p0, p1, p2 = (np.asarray(p, dtype=float) for p in (p0, p1, p2))
    d = p2 - p1
    length_sq = float(d @ d)
    if length_sq == 0.0:
        raise InvalidConfigurationError("p1 and p2 must be distinct")

    rel = p0 - p1
    u = float(rel @ d) / length_sq
    if np.linalg.norm(rel - u * d) > eps_col:
        return True
    return eps_col < u < 1.0 - eps_col


def _failure(k: int, t: float, reason: str, frame) -> HomotopyFailureError:
    witness = HomotopyFailure(
        frame_index=k, time=t, reason=reason, frame=[tuple(p) for p in frame]
    )
    logger.warning(f"Homotopy failed at frame {k} (t={t}): {reason}")
    return HomotopyFailureError(f"frame {k} at t={t}: {reason}", witness=witness)


def _checked_frame(points: np.ndarray, k: int, t: float) -> Configuration:
    if pairwise_gap(points) <= settings.eps_gap:
        raise _failure(k, t, "added point within eps_gap of an input point", points)
    try:
        return Configuration.from_array(points)
    except ValidationError as e:
        raise _failure(k, t, f"invalid frame: {e.errors()[0]['msg']}", points)


def uniqueness_homotopy(
    s: SectionDescriptor, c: Configuration, frames: Optional[int] = None
) -> HomotopyTrace:
    """
    Homotopy through sections from s to the midpoint section

    Phase 1 (grid [0, 1/2]) runs the conjugated section s_t for t in [0, 1];
    phase 2 (grid (1/2, 1]) moves p_0 on a straight line to the midpoint.
    """
    frames = settings.homotopy_frames if frames is None else frames
    if frames < 2:
        raise ParameterError("a homotopy trace needs at least two frames per phase")

    _require_pair(c)
    # the midpoint frame sits half the gap from each input point
    gap = pairwise_gap(c.as_array())
    if gap <= 2 * settings.eps_gap:
        raise InvalidConfigurationError(
            f"points {gap!r} apart are too close to separate a midpoint by more "
            f"than eps_gap={settings.eps_gap}"
        )
    cd = chord_data(c)
    p1, p2 = c.as_array()

    grid: List[float] = []
    out: List[Configuration] = []
    phase: List[HomotopyPhase] = []

    for k in range(frames):
        t = k / (frames - 1)
        try:
            frame = conjugated_section(s, c, t, chord=cd)
        except SectionViolationError as e:
            witness = e.witness.points if e.witness is not None else []
            raise _failure(len(out), t / 2, str(e), witness)
        out.append(_checked_frame(frame.as_array(), len(out), t / 2))
        grid.append(t / 2)
        phase.append(HomotopyPhase.SCALING)

    p0_end = np.asarray(out[-1].points[0])
    if not between_or_offline(p0_end, p1, p2):
        raise _failure(
            len(out) - 1,
            0.5,
            "added point lies on the chord outside the segment",
            out[-1].points,
        )

    midpoint = np.asarray(midpoint_section(c).points[0])
    for k in range(1, frames):
        u = k / (frames - 1)
        p0 = (1.0 - u) * p0_end + u * midpoint
        points = np.vstack([p0, p1, p2])
        tau = 0.5 + u / 2
        out.append(_checked_frame(points, len(out), tau))
        grid.append(tau)
        phase.append(HomotopyPhase.LINE)

    logger.info(
        f"Homotopy for '{s.label}' built with {len(out)} frames (r={cd.r:.6g})"
    )
    return HomotopyTrace(section=s.label, grid=grid, frames=out, phase=phase)


def boundary_pushoff(c: Configuration, t: float) -> Configuration:
    """
    Flow of the vector field -(p - p_1): p_k -> p_1 + exp(-t)(p_k - p_1)
    """
    if t < 0:
        raise BoundaryError("flow time must be nonnegative")
    points = c.as_array()
    anchor = points[0]
    if abs(float(np.linalg.norm(anchor)) - 1.0) > settings.eps_ball:
        raise BoundaryError("p_1 must lie on the unit sphere")
    if t == 0:
        return c

    flowed = anchor + math.exp(-t) * (points - anchor)
    flowed[0] = anchor
    # contraction below float spacing merges points into p_1
    gap = pairwise_gap(flowed)
    if gap <= settings.eps_gap:
        raise BoundaryError(
            f"flow time t={t} contracts the configuration to gap {gap!r}, "
            f"at or below eps_gap={settings.eps_gap}"
        )
    return Configuration.from_array(flowed)
