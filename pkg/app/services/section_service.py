import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.spatial.distance import pdist

from app.core.config import settings
from app.core.exceptions import (InvalidConfigurationError, RegistryError,
                                 SectionApplicabilityError,
                                 SectionViolationError, UnknownDescriptorError)
from app.models.schemas import (Configuration, SectionCheckReport,
                                SectionDescriptor, SectionKind)
from app.utils.geometry import apply_permutation, config_distance
from app.utils.sampling import random_configuration, random_permutation

logger = logging.getLogger(__name__)

# (n, m) array of p_1..p_n -> (m,) array p_0
PointRule = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SectionEntry:
    name: str
    rule: PointRule
    applies_to: Callable[[int], bool]
    equivariant: bool = False
    # ambient dimension the rule is defined for, None for any
    dim: Optional[int] = None


class SectionRegistry:
    def __init__(self):
        self._entries: Dict[str, SectionEntry] = {}

    def register(
        self,
        name: str,
        rule: PointRule,
        applies_to: Optional[Callable[[int], bool]] = None,
        equivariant: bool = False,
        replace: bool = False,
        dim: Optional[int] = None,
    ) -> SectionEntry:
        """
        Register a point rule under `name`

        The rule receives p_1..p_n as an (n, m) array and returns p_0.
        """
        if name in self._entries and not replace:
            raise RegistryError(f"section '{name}' is already registered")
        entry = SectionEntry(
            name=name,
            rule=rule,
            applies_to=applies_to or (lambda n: n >= 1),
            equivariant=equivariant,
            dim=dim,
        )
        self._entries[name] = entry
        logger.info(f"Registered section '{name}' (equivariant={equivariant})")
        return entry

    def unregister(self, name: str) -> None:
        self._entries.pop(name, None)

    def get(self, name: str) -> SectionEntry:
        try:
            return self._entries[name]
        except KeyError:
            raise UnknownDescriptorError(f"no section registered as '{name}'")

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def names(self) -> List[str]:
        return sorted(self._entries)


section_registry = SectionRegistry()


def _midpoint_rule(points: np.ndarray) -> np.ndarray:
    return (points[0] + points[1]) / 2


def _add_near_rule(i: int, j: int) -> PointRule:
    def rule(points: np.ndarray) -> np.ndarray:
        p_i = points[i - 1]
        v_ij = points[j - 1] - p_i
        d_i = np.delete(np.linalg.norm(points - p_i, axis=1), i - 1).min()
        return p_i + (d_i / (2 * np.linalg.norm(v_ij))) * v_ij

    return rule


def _biased_rule(alpha: float) -> PointRule:
    def rule(points: np.ndarray) -> np.ndarray:
        return (1 - alpha) * points[0] + alpha * points[1]

    return rule


def resolve_section(descriptor: SectionDescriptor) -> SectionEntry:
    if descriptor.kind == SectionKind.MIDPOINT:
        return SectionEntry(
            name=descriptor.label,
            rule=_midpoint_rule,
            applies_to=lambda n: n == 2,
            equivariant=True,
        )
    if descriptor.kind == SectionKind.ADD_NEAR:
        i, j = descriptor.i, descriptor.j
        return SectionEntry(
            name=descriptor.label,
            rule=_add_near_rule(i, j),
            applies_to=lambda n: n >= max(2, i, j),
        )
    if descriptor.kind == SectionKind.BIASED_INTERPOLATION:
        return SectionEntry(
            name=descriptor.label,
            rule=_biased_rule(descriptor.alpha),
            applies_to=lambda n: n == 2,
        )
    return section_registry.get(descriptor.name)


def parse_section(text: str) -> SectionDescriptor:
    """
    Parse the CLI forms `midpoint`, `add-near:i,j`, `biased:alpha` or a
    registered name
    """
    text = text.strip()
    head, _, args = text.partition(":")
    try:
        if head == "midpoint" and not args:
            return SectionDescriptor(kind=SectionKind.MIDPOINT)
        if head in ("add-near", "add_near"):
            i, j = (int(v) for v in args.split(","))
            return SectionDescriptor(kind=SectionKind.ADD_NEAR, i=i, j=j)
        if head in ("biased", "biased_interpolation"):
            return SectionDescriptor(
                kind=SectionKind.BIASED_INTERPOLATION, alpha=float(args)
            )
    except ValueError as e:
        raise UnknownDescriptorError(f"malformed section '{text}': {e}")

    if text not in section_registry:
        raise UnknownDescriptorError(
            f"unknown section '{text}'; registered: {section_registry.names()}"
        )
    return SectionDescriptor(kind=SectionKind.USER_REGISTERED, name=text)


def check_applicable(entry: SectionEntry, n: int, m: Optional[int] = None) -> None:
    if not entry.applies_to(n):
        raise SectionApplicabilityError(
            f"section '{entry.name}' does not apply to n={n}"
        )
    if m is not None and entry.dim is not None and m != entry.dim:
        raise SectionApplicabilityError(
            f"section '{entry.name}' is defined for m={entry.dim}, got m={m}"
        )


def _added_point_defects(p0: np.ndarray, points: np.ndarray) -> Dict[str, float]:
    """
    Gap from p_0 to the existing points and its excess over the unit ball
    """
    gap = float(np.linalg.norm(points - p0, axis=1).min())
    excess = max(float(np.linalg.norm(p0)) - 1.0, 0.0)
    return {"gap": gap, "excess": excess}


def append_point(c: Configuration, p0: np.ndarray) -> Configuration:
    """
    Build (p_0, p_1, ..., p_n) with the input points copied untouched
    """
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (c.dim,) or not np.all(np.isfinite(p0)):
        raise SectionViolationError(
            f"added point has shape {p0.shape}, expected ({c.dim},)", witness=c
        )
    defects = _added_point_defects(p0, c.as_array())
    if defects["gap"] <= 0.0:
        raise SectionViolationError("added point coincides with an input point", c)
    if defects["excess"] > settings.eps_ball:
        raise SectionViolationError("added point lies outside the unit ball", c)
    return Configuration(dim=c.dim, points=(tuple(p0.tolist()),) + c.points)


def apply_section(descriptor: SectionDescriptor, c: Configuration) -> Configuration:
    entry = resolve_section(descriptor)
    check_applicable(entry, c.n, c.dim)
    return append_point(c, entry.rule(c.as_array()))


def forget_point(c: Configuration) -> Configuration:
    """
    Drop the 0th point of a sectioned configuration
    """
    if c.n < 2:
        raise InvalidConfigurationError(
            "forget_point needs a configuration of at least two points"
        )
    return Configuration(dim=c.dim, points=c.points[1:])


def midpoint_section(c: Configuration) -> Configuration:
    return apply_section(SectionDescriptor(kind=SectionKind.MIDPOINT), c)


def add_near_section(c: Configuration, i: int = 1, j: int = 2) -> Configuration:
    """
    Add p_0 at distance d_i / 2 from p_i along the segment towards p_j
    """
    return apply_section(SectionDescriptor(kind=SectionKind.ADD_NEAR, i=i, j=j), c)


def biased_interpolation_section(c: Configuration, alpha: float) -> Configuration:
    return apply_section(
        SectionDescriptor(kind=SectionKind.BIASED_INTERPOLATION, alpha=alpha), c
    )


def section_lipschitz_ratio(
    descriptor: SectionDescriptor, c: Configuration, c_perturbed: Configuration
) -> float:
    h = config_distance(c, c_perturbed)
    if h == 0.0:
        return 0.0
    moved = config_distance(
        apply_section(descriptor, c), apply_section(descriptor, c_perturbed)
    )
    return moved / h


def _equivariant_at(
    entry: SectionEntry, c: Configuration, p0: np.ndarray, sigma
) -> bool:
    """
    Compare s(sigma . c) with sigma^ . s(c), where sigma^ keeps slot 0 fixed
    """
    permuted = apply_permutation(c, sigma)
    p0_permuted = np.asarray(entry.rule(permuted.as_array()), dtype=float)
    if p0_permuted.shape != p0.shape:
        return False
    image = np.vstack([p0_permuted, permuted.as_array()])

    sectioned = np.vstack([p0, c.as_array()])
    expected = np.empty_like(sectioned)
    expected[0] = sectioned[0]
    for i, target in enumerate(sigma, start=1):
        expected[target] = sectioned[i]

    return bool(
        np.linalg.norm(image - expected, axis=1).max() <= settings.equivariance_tol
    )


def verify_section(
    descriptor: SectionDescriptor,
    n: int,
    m: int,
    sample_count: int,
    rng_seed: int,
    check_equivariance: Optional[bool] = None,
) -> SectionCheckReport:
    """
    Run a section over seeded random configurations and tally its defects

    Failures never raise; the first witness of each failure class (lowest
    sample index) is kept in the report.

    Equivariance is checked only when the section declares it, unless
    `check_equivariance` overrides the flag. The `biased` rule declares no
    equivariance, so its violations show up only with the override.
    """
    entry = resolve_section(descriptor)
    check_applicable(entry, n, m)
    check_eq = entry.equivariant if check_equivariance is None else check_equivariance

    rng = np.random.default_rng(rng_seed)
    counts = {"section": 0, "gap": 0, "containment": 0, "equivariance": 0}
    witnesses: Dict[str, Configuration] = {}
    worst_gap = float("inf")
    worst_excess = 0.0

    def record(kind: str, c: Configuration) -> None:
        counts[kind] += 1
        witnesses.setdefault(kind, c)

    logger.info(
        f"Verifying section '{entry.name}' on {sample_count} samples "
        f"(n={n}, m={m}, seed={rng_seed}, equivariance={check_eq})"
    )

    for _ in range(sample_count):
        c = random_configuration(n, m, rng)
        sigma = random_permutation(n, rng) if check_eq else None
        points = c.as_array()

        # a rule that raises or returns garbage violates the section property
        try:
            p0 = np.asarray(entry.rule(points), dtype=float)
        except (ValueError, ArithmeticError, IndexError):
            record("section", c)
            continue
        if p0.shape != (m,) or not np.all(np.isfinite(p0)):
            record("section", c)
            continue

        defects = _added_point_defects(p0, points)
        worst_gap = min(worst_gap, defects["gap"])
        worst_excess = max(worst_excess, defects["excess"])
        if defects["gap"] <= settings.eps_gap:
            record("gap", c)
        if defects["excess"] > settings.eps_ball:
            record("containment", c)
        # forgetting p_0 must give back c exactly
        elif defects["gap"] > 0.0:
            if forget_point(append_point(c, p0)).points != c.points:
                record("section", c)

        if check_eq and not _equivariant_at(entry, c, p0, sigma):
            record("equivariance", c)

    passed = (
        not any(counts.values())
        and worst_gap > settings.eps_gap
        and worst_excess <= settings.eps_ball
    )
    report = SectionCheckReport(
        section=entry.name,
        n=n,
        m=m,
        seed=rng_seed,
        samples_run=sample_count,
        worst_gap=worst_gap,
        worst_containment_excess=worst_excess,
        equivariance_checked=check_eq,
        equivariance_violations=counts["equivariance"],
        section_property_violations=counts["section"],
        gap_violations=counts["gap"],
        containment_violations=counts["containment"],
        equivariance_witness=witnesses.get("equivariance"),
        section_property_witness=witnesses.get("section"),
        gap_witness=witnesses.get("gap"),
        containment_witness=witnesses.get("containment"),
        passed=passed,
    )

    if passed:
        logger.info(f"Section '{entry.name}' passed (worst gap {worst_gap:.3e})")
    else:
        logger.warning(f"Section '{entry.name}' failed verification: {counts}")
    return report


def _ordered_line_section(points: np.ndarray) -> np.ndarray:
    """
    On a line the points have a natural order; add the midpoint of the two
    leftmost ones, which is add-near applied to the leftmost point
    """
    xs = np.sort(points[:, 0])
    return np.array([(xs[0] + xs[1]) / 2])


section_registry.register(
    "ordered-line",
    _ordered_line_section,
    applies_to=lambda n: n >= 2,
    equivariant=True,
    dim=1,
)


# Symmetric candidates for the unordered problem. None of them is a section
# for n >= 3; they are kept as fixtures for the obstruction measurements.


def _centroid_candidate(points: np.ndarray) -> np.ndarray:
    return points.mean(axis=0)


def _origin_candidate(points: np.ndarray) -> np.ndarray:
    return np.zeros(points.shape[1])


def _closest_pair_midpoint_candidate(points: np.ndarray) -> np.ndarray:
    dists = pdist(points)
    rows, cols = np.triu_indices(len(points), k=1)
    tied = np.flatnonzero(dists == dists.min())
    midpoints = (points[rows[tied]] + points[cols[tied]]) / 2
    # ties resolved by coordinates, not labels
    first = np.lexsort(midpoints.T[::-1])[0]
    return midpoints[first]


section_registry.register("centroid", _centroid_candidate, equivariant=True)
section_registry.register("origin", _origin_candidate, equivariant=True)
section_registry.register(
    "closest-pair-midpoint",
    _closest_pair_midpoint_candidate,
    applies_to=lambda n: n >= 2,
    equivariant=True,
)
