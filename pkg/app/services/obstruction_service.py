import logging
import math
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import (LabelError, LoopConstructionError,
                                 NearZeroVectorError,
                                 SectionApplicabilityError, WindingError)
from app.models.schemas import (Configuration, FailureWitness, LoopSample,
                                ObstructionReport, SectionDescriptor,
                                WitnessKind)
from app.services.section_service import (SectionEntry, check_applicable,
                                          resolve_section)
from app.utils.geometry import apply_permutation
from app.utils.winding import winding_number

logger = logging.getLogger(__name__)


def loop_array(loop: LoopSample) -> np.ndarray:
    """
    Frames of a loop stacked into a (K + 1, n, 2) array
    """
    return np.array([config.points for config in loop.configs], dtype=float)


def gauss_winding(loop: LoopSample, a: int, b: int) -> int:
    """
    Winding number of the direction from p_a to p_b along the loop
    """
    if a == b:
        raise LabelError("gauss_winding needs two distinct labels")
    frames = loop_array(loop)
    vectors = frames[:, loop.slot(b), :] - frames[:, loop.slot(a), :]
    return winding_number(vectors)


def reverse_loop(loop: LoopSample) -> LoopSample:
    return LoopSample(configs=loop.configs[::-1], sectioned=loop.sectioned)


def concatenate_loops(first: LoopSample, second: LoopSample) -> LoopSample:
    """
    Traverse `first` then `second`; both must start at the same frame
    """
    if first.configs[0].points != second.configs[0].points:
        raise LoopConstructionError("loops must share their base frame")
    return LoopSample(
        configs=first.configs + second.configs[1:], sectioned=first.sectioned
    )


def permute_loop(loop: LoopSample, sigma: Sequence[int]) -> LoopSample:
    if loop.sectioned:
        raise LoopConstructionError("permute_loop acts on plain (unsectioned) loops")
    return LoopSample(configs=[apply_permutation(c, sigma) for c in loop.configs])


def default_base(n: int, seed: int = 0) -> Configuration:
    """
    n points equally spaced on a circle, jittered by a seeded offset
    """
    rng = np.random.default_rng(seed)
    angles = 2 * math.pi * np.arange(n) / n
    points = settings.obstruction_base_radius * np.column_stack(
        [np.cos(angles), np.sin(angles)]
    )
    jitter = settings.obstruction_base_jitter
    points = points + rng.uniform(-jitter, jitter, size=(n, 2))
    return Configuration.from_array(points)


def generator_loop(
    n: int,
    a: int,
    b: int,
    base: Configuration,
    radius: Optional[float] = None,
    samples: Optional[int] = None,
) -> LoopSample:
    """
    Loop in which p_b orbits p_a once counterclockwise, all other points fixed

    Under the pairing convention this loop pairs to 1 with G_ab and to 0 with
    every other generator; the duality is checked before returning.
    """
    radius = settings.obstruction_radius if radius is None else radius
    samples = settings.obstruction_samples if samples is None else samples

    if base.n != n or base.dim != 2:
        raise LoopConstructionError(f"base must be a planar {n}-configuration")
    if a == b or not (1 <= a <= n and 1 <= b <= n):
        raise LoopConstructionError(f"invalid pair ({a}, {b}) for n={n}")
    if samples < 4 or radius <= 0:
        raise LoopConstructionError("need radius > 0 and at least 4 samples")

    points = base.as_array()
    centre = points[a - 1]
    if np.linalg.norm(centre) + radius > 1.0 + settings.eps_ball:
        raise LoopConstructionError(
            f"orbit of radius {radius} around p_{a} leaves the unit disk"
        )
    for k in range(n):
        if k in (a - 1, b - 1):
            continue
        if np.linalg.norm(points[k] - centre) <= 2 * radius:
            raise LoopConstructionError(
                f"p_{k + 1} lies within 2*radius of p_{a}; orbit is infeasible"
            )

    angles = 2 * math.pi * np.arange(samples) / samples
    configs = []
    for theta in angles:
        frame = points.copy()
        frame[b - 1] = centre + radius * np.array([math.cos(theta), math.sin(theta)])
        configs.append(Configuration.from_array(frame))
    configs.append(configs[0])
    loop = LoopSample(configs=configs)

    for pair in combinations(range(1, n + 1), 2):
        expected = 1 if set(pair) == {a, b} else 0
        measured = gauss_winding(loop, *pair)
        if measured != expected:
            raise LoopConstructionError(
                f"loop pairs to {measured} with G_{pair[0]}{pair[1]}, "
                f"expected {expected}"
            )
    return loop


def _witness(
    kind: WitnessKind, loop_id: str, k: int, slots: List[int], frame: np.ndarray
) -> FailureWitness:
    return FailureWitness(
        kind=kind,
        loop_id=loop_id,
        frame_index=k,
        slots=slots,
        frame=[tuple(p) for p in np.asarray(frame).tolist()],
    )


def _added_point_witness(
    entry: SectionEntry, points: np.ndarray, loop_id: str, k: int
) -> Tuple[Optional[np.ndarray], Optional[FailureWitness]]:
    p0 = np.asarray(entry.rule(points), dtype=float)
    if p0.shape != (2,) or not np.all(np.isfinite(p0)):
        return None, _witness(WitnessKind.OUTSIDE_BALL, loop_id, k, [0], points)
    if np.linalg.norm(p0) > 1.0 + settings.eps_ball:
        frame = np.vstack([p0, points])
        return None, _witness(WitnessKind.OUTSIDE_BALL, loop_id, k, [0], frame)

    dists = np.linalg.norm(points - p0, axis=1)
    nearest = int(np.argmin(dists))
    if dists[nearest] <= settings.eps_wind:
        frame = np.vstack([p0, points])
        return None, _witness(
            WitnessKind.COLLISION, loop_id, k, [0, nearest + 1], frame
        )
    return p0, None


def trial_configurations(n: int) -> Dict[str, np.ndarray]:
    """
    Symmetric configurations on which symmetric candidates tend to collide
    """
    xs = np.linspace(-0.5, 0.5, n)
    order = [0, n - 1] + list(range(1, n - 1)) if n > 1 else [0]
    collinear = np.column_stack([xs[order], np.zeros(n)])

    angles = 2 * math.pi * np.arange(n - 1) / max(n - 1, 1)
    ring = 0.5 * np.column_stack([np.cos(angles), np.sin(angles)])
    polygon = np.vstack([ring, np.zeros((1, 2))])
    return {"collinear": collinear, "polygon": polygon}


def _screen_trials(entry: SectionEntry, n: int) -> Optional[FailureWitness]:
    for name, points in trial_configurations(n).items():
        _, witness = _added_point_witness(entry, points, f"trial:{name}", 0)
        if witness is not None:
            return witness
    return None


def _image_winding(
    entry: SectionEntry, loop: LoopSample, loop_id: str
) -> Tuple[Optional[int], Optional[FailureWitness]]:
    """
    Winding of the pair (0, 1) on the image of a loop under the candidate
    """
    frames = loop_array(loop)
    image = []
    for k, points in enumerate(frames):
        p0, witness = _added_point_witness(entry, points, loop_id, k)
        if witness is not None:
            return None, witness
        image.append(Configuration.from_array(np.vstack([p0, points])))
    image_loop = LoopSample(configs=image, sectioned=True)

    try:
        return gauss_winding(image_loop, 0, 1), None
    except WindingError as e:
        kind = (
            WitnessKind.COLLISION
            if isinstance(e, NearZeroVectorError)
            else WitnessKind.DISCONTINUITY
        )
        k = e.step or 0
        return None, _witness(kind, loop_id, k, [0, 1], loop_array(image_loop)[k])


def measure_coefficients(
    s: SectionDescriptor,
    n: int,
    base: Optional[Configuration] = None,
    radius: Optional[float] = None,
    samples: Optional[int] = None,
    seed: int = 0,
    trials: bool = True,
) -> ObstructionReport:
    """
    Pair the pulled-back class s*(G_01) with the generator loops

    lambda_a comes from the loop where p_a orbits p_1, delta_ab from the loop
    where p_b orbits p_a. Any collision or jump of the candidate is reported
    as a witness instead of raising.
    """
    entry = resolve_section(s)
    check_applicable(entry, n, 2)
    if n < 2:
        raise SectionApplicabilityError("coefficients are defined for n >= 2")
    radius = settings.obstruction_radius if radius is None else radius
    samples = settings.obstruction_samples if samples is None else samples
    base = default_base(n, seed) if base is None else base

    witness = _screen_trials(entry, n) if trials else None

    lambda_values: Dict[int, int] = {}
    for a in range(2, n + 1):
        loop = generator_loop(n, 1, a, base, radius, samples)
        value, failure = _image_winding(entry, loop, f"lambda:1-{a}")
        if failure is not None:
            witness = witness or failure
            continue
        lambda_values[a] = value

    delta_values: Dict[str, int] = {}
    for a, b in combinations(range(2, n + 1), 2):
        loop = generator_loop(n, a, b, base, radius, samples)
        value, failure = _image_winding(entry, loop, f"delta:{a}-{b}")
        if failure is not None:
            witness = witness or failure
            continue
        delta_values[f"{a},{b}"] = value

    # a loop that produced a witness leaves a gap in the coefficients
    lambda_complete = len(lambda_values) == n - 1
    lambda_consistent = lambda_complete and len(set(lambda_values.values())) == 1
    lambda_value = next(iter(lambda_values.values())) if lambda_consistent else None

    expected_deltas = (n - 1) * (n - 2) // 2
    deltas = set(delta_values.values())
    delta_value = deltas.pop() if len(deltas) == 1 else None
    deltas_vanish = len(delta_values) == expected_deltas and all(
        v == 0 for v in delta_values.values()
    )

    identity_holds = (
        witness is None
        and lambda_consistent
        and lambda_value * (n - 1) == 1
        and deltas_vanish
    )

    report = ObstructionReport(
        section=entry.name,
        n=n,
        radius=radius,
        samples=samples,
        seed=seed,
        lambda_values=lambda_values,
        delta_values=delta_values,
        lambda_consistent=lambda_consistent,
        lambda_value=lambda_value,
        delta_value=delta_value if len(delta_values) == expected_deltas else None,
        identity_holds=identity_holds,
        collision_witness=witness,
    )

    if witness is not None:
        logger.warning(
            f"Candidate '{entry.name}' (n={n}) fails on {witness.loop_id} "
            f"frame {witness.frame_index}: {witness.kind.value}"
        )
    elif not identity_holds:
        logger.warning(
            f"Candidate '{entry.name}' (n={n}) violates lambda(n-1)=1, delta=0: "
            f"lambda={lambda_values}, delta={delta_values}"
        )
    else:
        logger.info(f"Candidate '{entry.name}' (n={n}) satisfies the identity")
    return report
