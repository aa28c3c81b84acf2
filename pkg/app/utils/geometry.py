from typing import Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from app.core.exceptions import (InvalidConfigurationError, LabelError,
                                 PermutationError, ShapeMismatchError)
from app.models.schemas import Configuration, Point

Permutation = Tuple[int, ...]


def pairwise_gap(points: np.ndarray) -> float:
    """
    Smallest distance between two rows of an (n, m) array, inf for n < 2
    """
    if len(points) < 2:
        return float("inf")
    return float(pdist(points).min())


def min_pairwise_gap(c: Configuration) -> float:
    return pairwise_gap(c.as_array())


def _neighbor_distances(points: np.ndarray, index: int) -> np.ndarray:
    dists = np.linalg.norm(points - points[index], axis=1)
    return np.delete(dists, index)


def nearest_neighbor_distance(c: Configuration, i: int) -> float:
    """
    Distance d_i from p_i to its nearest neighbour (1-based label i)
    """
    if c.n < 2:
        raise InvalidConfigurationError(
            "nearest-neighbour distance needs at least two points"
        )
    if not 1 <= i <= c.n:
        raise LabelError(f"index {i} out of range 1..{c.n}")
    return float(_neighbor_distances(c.as_array(), i - 1).min())


def nearest_neighbor_tie_margin(c: Configuration, i: int) -> float:
    """
    Gap between the two smallest distances from p_i; inf when n = 2
    """
    if c.n < 3:
        return float("inf")
    dists = np.sort(_neighbor_distances(c.as_array(), i - 1))
    return float(dists[1] - dists[0])


def validate_permutation(sigma: Sequence[int], n: int) -> Permutation:
    """
    Check that sigma lists the 1-based images sigma(1), ..., sigma(n)
    """
    try:
        images = tuple(int(s) for s in sigma)
    except (TypeError, ValueError) as e:
        raise PermutationError(f"permutation entries must be integers: {e}")
    if len(images) != n or sorted(images) != list(range(1, n + 1)):
        raise PermutationError(
            f"{list(sigma)} is not a permutation of 1..{n}"
        )
    return images


def compose_permutations(sigma: Sequence[int], tau: Sequence[int]) -> Permutation:
    """
    Return sigma after tau, i.e. i -> sigma(tau(i))
    """
    n = len(tau)
    sigma = validate_permutation(sigma, n)
    tau = validate_permutation(tau, n)
    return tuple(sigma[t - 1] for t in tau)


def apply_permutation(c: Configuration, sigma: Sequence[int]) -> Configuration:
    """
    Move the point in slot i to slot sigma(i)
    """
    sigma = validate_permutation(sigma, c.n)
    out: list = [None] * c.n
    for i, image in enumerate(sigma):
        out[image - 1] = c.points[i]
    return Configuration(dim=c.dim, points=tuple(out))


def config_distance(a: Configuration, b: Configuration) -> float:
    """
    Sup metric on ordered configurations: max_i |a_i - b_i|
    """
    if a.n != b.n or a.dim != b.dim:
        raise ShapeMismatchError(
            f"cannot compare a ({a.n} points, dim {a.dim}) "
            f"with b ({b.n} points, dim {b.dim})"
        )
    return float(np.linalg.norm(a.as_array() - b.as_array(), axis=1).max())


def canonical_form(c: Configuration) -> Tuple[Point, ...]:
    """
    Lexicographically sorted points, a representative of the unordered class
    """
    return tuple(sorted(c.points))


def unordered_equal(a: Configuration, b: Configuration) -> bool:
    return a.dim == b.dim and canonical_form(a) == canonical_form(b)


def radial_projection(points: np.ndarray) -> np.ndarray:
    """
    Pull every row with norm > 1 back onto the unit sphere
    """
    norms = np.linalg.norm(points, axis=1, keepdims=True)
    return np.where(norms > 1.0, points / np.maximum(norms, 1.0), points)
