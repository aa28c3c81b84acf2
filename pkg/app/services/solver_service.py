import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.optimize import minimize

from app.core.config import settings
from app.core.exceptions import (ParameterError, PointMapError, RegistryError,
                                 UnknownDescriptorError)
from app.models.schemas import (Configuration, FixedSearchResult,
                                PointMapDescriptor, PointMapKind)
from app.utils.geometry import (apply_permutation, pairwise_gap,
                                radial_projection)
from app.utils.sampling import (random_configuration,
                                random_configuration_array, random_permutation)

logger = logging.getLogger(__name__)

# (n, m) array of points -> (m,) image point
MapRule = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PointMapEntry:
    name: str
    rule: MapRule
    declared_symmetric: bool = True


class PointMapRegistry:
    def __init__(self):
        self._entries: Dict[str, PointMapEntry] = {}

    def register(
        self,
        name: str,
        rule: MapRule,
        declared_symmetric: bool = True,
        replace: bool = False,
    ) -> PointMapEntry:
        if name in self._entries and not replace:
            raise RegistryError(f"point map '{name}' is already registered")
        entry = PointMapEntry(
            name=name, rule=rule, declared_symmetric=declared_symmetric
        )
        self._entries[name] = entry
        logger.info(f"Registered point map '{name}' (symmetric={declared_symmetric})")
        return entry

    def unregister(self, name: str) -> None:
        self._entries.pop(name, None)

    def get(self, name: str) -> PointMapEntry:
        try:
            return self._entries[name]
        except KeyError:
            raise UnknownDescriptorError(f"no point map registered as '{name}'")

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def names(self) -> List[str]:
        return sorted(self._entries)


point_map_registry = PointMapRegistry()


def _constant_rule(q) -> MapRule:
    q = np.asarray(q, dtype=float)

    def rule(points: np.ndarray) -> np.ndarray:
        return q.copy()

    return rule


def _centroid_rule(points: np.ndarray) -> np.ndarray:
    return points.mean(axis=0)


def _contraction_rule(alpha: float, q) -> MapRule:
    q = np.asarray(q, dtype=float)

    def rule(points: np.ndarray) -> np.ndarray:
        return alpha * points.mean(axis=0) + (1 - alpha) * q

    return rule


def resolve_point_map(f: PointMapDescriptor) -> PointMapEntry:
    if f.kind == PointMapKind.CONSTANT:
        return PointMapEntry(name=f.label, rule=_constant_rule(f.q))
    if f.kind == PointMapKind.CENTROID:
        return PointMapEntry(name=f.label, rule=_centroid_rule)
    if f.kind == PointMapKind.CONTRACTION:
        return PointMapEntry(name=f.label, rule=_contraction_rule(f.alpha, f.q))
    return point_map_registry.get(f.name)


def parse_point_map(text: str) -> PointMapDescriptor:
    """
    Parse `constant:x,y,...`, `centroid`, `contraction:alpha,x,y,...` or a
    registered name
    """
    text = text.strip()
    head, _, args = text.partition(":")
    try:
        if head == "centroid" and not args:
            return PointMapDescriptor(kind=PointMapKind.CENTROID)
        if head == "constant":
            q = tuple(float(v) for v in args.split(","))
            return PointMapDescriptor(kind=PointMapKind.CONSTANT, q=q)
        if head == "contraction":
            alpha, *q = (float(v) for v in args.split(","))
            return PointMapDescriptor(
                kind=PointMapKind.CONTRACTION, alpha=alpha, q=tuple(q)
            )
    except ValueError as e:
        raise UnknownDescriptorError(f"malformed point map '{text}': {e}")

    if text not in point_map_registry:
        raise UnknownDescriptorError(
            f"unknown point map '{text}'; registered: {point_map_registry.names()}"
        )
    entry = point_map_registry.get(text)
    return PointMapDescriptor(
        kind=PointMapKind.USER_REGISTERED,
        name=text,
        declared_symmetric=entry.declared_symmetric,
    )


def _image(entry: PointMapEntry, points: np.ndarray) -> np.ndarray:
    y = np.asarray(entry.rule(points), dtype=float)
    m = points.shape[1]
    if y.shape != (m,) or not np.all(np.isfinite(y)):
        raise PointMapError(
            f"point map '{entry.name}' returned shape {y.shape}, expected ({m},)"
        )
    if np.linalg.norm(y) > 1.0 + settings.eps_ball:
        raise PointMapError(
            f"point map '{entry.name}' left the unit ball (norm {np.linalg.norm(y)!r})"
        )
    return y


def evaluate_map(f: PointMapDescriptor, c: Configuration) -> np.ndarray:
    return _image(resolve_point_map(f), c.as_array())


def _distances(entry: PointMapEntry, points: np.ndarray) -> np.ndarray:
    return np.linalg.norm(points - _image(entry, points), axis=1)


def residual(f: PointMapDescriptor, c: Configuration) -> float:
    """
    min_i |f(c) - p_i|, zero exactly when f(c) is a point of c
    """
    return float(_distances(resolve_point_map(f), c.as_array()).min())


def nearest_index(f: PointMapDescriptor, c: Configuration) -> int:
    """
    1-based label of the point closest to f(c), smallest on ties
    """
    return int(np.argmin(_distances(resolve_point_map(f), c.as_array()))) + 1


class _Objective:
    """
    Squared residual over flattened coordinates, counting evaluations

    Iterates are radially projected into the ball; those closer than the
    separation floor evaluate to +inf. The best projected iterate seen so far
    is kept.
    """

    def __init__(self, entry: PointMapEntry, n: int, m: int, min_gap: float):
        self.entry = entry
        self.n = n
        self.m = m
        self.min_gap = min_gap
        self.evaluations = 0
        self.best_value = float("inf")
        self.best_points: Optional[np.ndarray] = None

    def __call__(self, x: np.ndarray) -> float:
        self.evaluations += 1
        points = radial_projection(np.reshape(x, (self.n, self.m)))
        if pairwise_gap(points) < self.min_gap:
            return float("inf")
        value = float(_distances(self.entry, points).min() ** 2)
        if value < self.best_value:
            self.best_value = value
            self.best_points = points.copy()
        return value


def _simplex(x0: np.ndarray, step: float) -> np.ndarray:
    return np.vstack([x0, x0 + step * np.eye(len(x0))])


def find_fixed_configuration(
    f: PointMapDescriptor,
    n: int,
    m: int,
    tol: Optional[float] = None,
    restarts: Optional[int] = None,
    budget: Optional[int] = None,
    rng_seed: int = 0,
) -> FixedSearchResult:
    """
    Multistart Nelder-Mead search for c with f(c) close to a point of c

    Each restart draws a seeded random configuration, runs scipy's adaptive
    Nelder-Mead on the squared residual and re-runs it from its best point a
    few times. The search stops at the first restart below `tol` or when the
    evaluation budget is spent; non-convergence is reported, not raised.
    """
    tol = settings.solver_tol if tol is None else tol
    restarts = settings.solver_restarts if restarts is None else restarts
    budget = settings.solver_budget if budget is None else budget
    if tol <= 0:
        raise ParameterError("tol must be positive")
    if n < 1 or m < 1 or restarts < 1 or budget < 1:
        raise ParameterError("n, m, restarts and budget must be positive")

    entry = resolve_point_map(f)
    rng = np.random.default_rng(rng_seed)
    objective = _Objective(entry, n, m, settings.solver_min_gap)
    tol_sq = tol * tol
    restarts_used = 0

    logger.info(
        f"Searching fixed configuration of '{entry.name}' "
        f"(n={n}, m={m}, tol={tol}, restarts={restarts}, budget={budget}, "
        f"seed={rng_seed})"
    )

    # one seeded start per restart, polished from its best point
    for _ in range(restarts):
        if objective.evaluations >= budget:
            break
        restarts_used += 1
        x = random_configuration_array(
            n, m, rng, min_gap=settings.solver_min_gap
        ).ravel()
        value = objective(x)
        if value < tol_sq:
            break

        for _ in range(1 + settings.solver_polish_passes):
            remaining = budget - objective.evaluations
            if remaining <= 0:
                break
            found = minimize(
                objective,
                x,
                method="Nelder-Mead",
                options={
                    "initial_simplex": _simplex(x, settings.solver_initial_step),
                    "xatol": tol * 1e-2,
                    "fatol": tol_sq * 1e-2,
                    "maxfev": remaining,
                    "adaptive": True,
                },
            )
            # stalled
            if not found.fun < value:
                break
            x = radial_projection(np.reshape(found.x, (n, m))).ravel()
            value = found.fun
        if objective.best_value < tol_sq:
            break

    best_config = Configuration.from_array(objective.best_points)
    best_residual = residual(f, best_config)
    result = FixedSearchResult(
        map=entry.name,
        n=n,
        m=m,
        tol=tol,
        seed=rng_seed,
        best_config=best_config,
        image_point=tuple(evaluate_map(f, best_config).tolist()),
        nearest_index=nearest_index(f, best_config),
        residual=best_residual,
        evaluations=objective.evaluations,
        restarts_used=restarts_used,
        converged=best_residual < tol,
    )

    if result.converged:
        logger.info(
            f"Converged after {result.evaluations} evaluations "
            f"(residual {best_residual:.3e})"
        )
    else:
        logger.warning(
            f"No fixed configuration of '{entry.name}' below tol={tol}; "
            f"best residual {best_residual:.3e} after {result.evaluations} evaluations"
        )
    return result


def symmetry_check(
    f: PointMapDescriptor,
    n: int,
    m: int,
    samples: int = 100,
    rng_seed: int = 0,
) -> int:
    """
    Count samples with |f(sigma . c) - f(c)| > symmetry_tol
    """
    entry = resolve_point_map(f)
    rng = np.random.default_rng(rng_seed)
    violations = 0
    for _ in range(samples):
        c = random_configuration(n, m, rng)
        sigma = random_permutation(n, rng)
        moved = _image(entry, apply_permutation(c, sigma).as_array())
        if np.linalg.norm(moved - _image(entry, c.as_array())) > settings.symmetry_tol:
            violations += 1

    if violations:
        logger.warning(
            f"Point map '{entry.name}' broke symmetry on {violations}/{samples} samples"
        )
    return violations


def _first_point(points: np.ndarray) -> np.ndarray:
    return points[0].copy()


point_map_registry.register("first-point", _first_point, declared_symmetric=False)
