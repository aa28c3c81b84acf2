import logging
from typing import Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import ConfigurationSpaceError
from app.models.schemas import Configuration
from app.utils.geometry import Permutation, pairwise_gap

logger = logging.getLogger(__name__)


def uniform_ball_points(count: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """
    Draw `count` points uniformly from the closed unit m-ball

    Direction from a normalized Gaussian, radius from U^(1/m) so the density
    is uniform in volume.
    """
    directions = rng.standard_normal((count, m))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    # all-zero draw has measure zero
    directions = directions / np.where(norms > 0.0, norms, 1.0)
    radii = rng.random((count, 1)) ** (1.0 / m)
    return directions * radii


def random_configuration_array(
    n: int,
    m: int,
    rng: np.random.Generator,
    min_gap: Optional[float] = None,
) -> np.ndarray:
    """
    Rejection-sample an (n, m) array whose points are at least `min_gap` apart
    """
    min_gap = settings.sampler_min_gap if min_gap is None else min_gap
    for _ in range(settings.sampler_max_attempts):
        points = uniform_ball_points(n, m, rng)
        if pairwise_gap(points) >= min_gap:
            return points

    logger.error(f"Sampler gave up for n={n}, m={m}, min_gap={min_gap}")
    raise ConfigurationSpaceError(
        f"could not sample {n} points in the {m}-ball with gap >= {min_gap}"
    )


def random_configuration(
    n: int,
    m: int,
    rng: np.random.Generator,
    min_gap: Optional[float] = None,
) -> Configuration:
    return Configuration.from_array(random_configuration_array(n, m, rng, min_gap))


def random_permutation(n: int, rng: np.random.Generator) -> Permutation:
    return tuple(int(k) + 1 for k in rng.permutation(n))
