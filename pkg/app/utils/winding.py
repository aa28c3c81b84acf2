import math
from typing import Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import (NearZeroVectorError, NonIntegralError,
                                 ShapeMismatchError, UndersampledError)


def signed_step_angles(vectors: np.ndarray) -> np.ndarray:
    """
    Signed angle from each planar vector to the next, one entry per step

    A closed sequence repeats its first vector at the end; no wrap-around
    step is added.
    """
    current, following = vectors[:-1], vectors[1:]
    cross = current[:, 0] * following[:, 1] - current[:, 1] * following[:, 0]
    dot = np.einsum("ij,ij->i", current, following)
    return np.arctan2(cross, dot)


def winding_number(
    vectors,
    eps_wind: Optional[float] = None,
    residual_max: Optional[float] = None,
) -> int:
    """
    Number of counterclockwise turns of a closed sequence of planar vectors

    Raises:
        NearZeroVectorError: a vector is shorter than eps_wind
        UndersampledError: two consecutive vectors are a quarter turn or more apart
        NonIntegralError: the angle sum is not close to a multiple of 2*pi
    """
    eps_wind = settings.eps_wind if eps_wind is None else eps_wind
    residual_max = (
        settings.winding_residual_max if residual_max is None else residual_max
    )

    vs = np.asarray(vectors, dtype=float)
    if vs.ndim != 2 or vs.shape[1] != 2 or len(vs) < 2:
        raise ShapeMismatchError("expected a sequence of at least two planar vectors")


    norms = np.linalg.norm(vs, axis=1)
    small = np.flatnonzero(norms <= eps_wind)
    if small.size:
        step = int(small[0])
        raise NearZeroVectorError(
            f"vector {step} has norm {norms[step]!r} <= {eps_wind}", step=step
        )

    steps = signed_step_angles(vs)
    large = np.flatnonzero(np.abs(steps) >= math.pi / 2)
    if large.size:
        step = int(large[0])
        raise UndersampledError(
            f"angular step {step} is {steps[step]!r} rad (>= pi/2)", step=step
        )

    turns = float(steps.sum()) / (2 * math.pi)
    rounded = round(turns)
    if abs(turns - rounded) >= residual_max:
        raise NonIntegralError(f"angle sum is {turns!r} turns, not integral")
    return int(rounded)
