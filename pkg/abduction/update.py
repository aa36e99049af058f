"""
Abduction as constrained optimization under partial observability.

Find u* minimizing sum_i w_i (u_i - b_i)^2 subject to forward(u*) matching the
facts. Solved with a quadratic penalty whose weight is raised from 1 to 1e8;
each round is a least-squares warm start, Nelder-Mead restarts and a
coordinate-wise golden-section pass.
"""
import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy import optimize

import config
from abduction.results import Deterministic
from abduction.shared import check_facts, split_noises
from inference.sampling import ATOM_TOLERANCE, forward_batch
from scm.distributions import Categorical, Point, Uniform
from scm.errors import EvaluationError, InvalidQuery, NoFeasiblePoint, NonFiniteObjective, SupportTooLarge
from scm.model import NoiseDraw, Scm

logger = structlog.get_logger(__name__)

PENALTY_SCHEDULE = tuple(10.0 ** k for k in range(9))
NELDER_MEAD_RESTARTS = 2


def _default(dist) -> float:
    """Prior mean, or for finite support the atom nearest it (ties go to the likelier atom)"""
    if isinstance(dist, Categorical):
        mean = dist.mean
        ranked = sorted(zip(dist.values, dist.probs), key=lambda atom: (abs(atom[0] - mean), -atom[1]))
        return float(ranked[0][0])
    return float(dist.mean)


def _on_support(dist, value: float) -> Optional[float]:
    """``value`` snapped to an atom of finite support, or None when the prior cannot produce it"""
    if dist.is_finite:
        return next((float(v) for v, _ in dist.atoms() if abs(value - v) <= ATOM_TOLERANCE), None)
    if isinstance(dist, Uniform) and not dist.lo <= value <= dist.hi:
        return None
    return value


def _baseline(scm: Scm, baseline: Optional[Mapping[str, float]]) -> NoiseDraw:
    if baseline is None:
        return {v.noise: _default(v.distribution) for v in scm.variables}
    unknown = [k for k in baseline if not scm.is_noise(k)]
    missing = [n for n in scm.noise_names if n not in baseline]
    if unknown or missing:
        raise InvalidQuery(f"baseline must cover every noise exactly (missing {missing}, unknown {unknown})")
    out = {n: float(baseline[n]) for n in scm.noise_names}
    if not all(math.isfinite(v) for v in out.values()):
        raise InvalidQuery("baseline values must be finite")
    snapped = {n: _on_support(scm.distribution(n), v) for n, v in out.items()}
    outside = [n for n, v in snapped.items() if v is None]
    if outside:
        raise InvalidQuery(f"baseline outside the prior support of {', '.join(outside)}")
    return snapped


def _weights(scm: Scm, weights: Optional[Mapping[str, float]]) -> Dict[str, float]:
    weights = dict(weights or {})
    unknown = [k for k in weights if not scm.is_noise(k)]
    if unknown:
        raise InvalidQuery(f"weights for unknown noises: {unknown}")
    out = {n: float(weights.get(n, 1.0)) for n in scm.noise_names}
    if not all(math.isfinite(w) and w > 0 for w in out.values()):
        raise InvalidQuery("weights must be positive")
    return out


@dataclass
class _PenaltyProblem:
    """Continuous coordinates of one atom combination of the finite coordinates"""
    scm: Scm
    facts: Dict[str, float]
    fixed: Dict[str, float]
    names: List[str]
    centre: np.ndarray
    scale: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def residuals(self, x: np.ndarray) -> np.ndarray:
        noise = {name: np.array([value]) for name, value in self.fixed.items()}
        for name, value in zip(self.names, x):
            noise[name] = np.array([value])
        try:
            values = forward_batch(self.scm, noise)
        except EvaluationError:
            return np.full(len(self.facts), np.inf)
        return np.array([values[name][0] - target for name, target in self.facts.items()])

    def distance(self, x: np.ndarray) -> float:
        return float(np.sum(self.scale * (x - self.centre) ** 2))

    def objective(self, x: np.ndarray, penalty: float) -> float:
        r = self.residuals(x)
        value = self.distance(x) + penalty * float(np.dot(r, r))
        return value if math.isfinite(value) else np.inf

    @property
    def bounds(self) -> List[Tuple[Optional[float], Optional[float]]]:
        return [(lo if math.isfinite(lo) else None, hi if math.isfinite(hi) else None)
                for lo, hi in zip(self.lower, self.upper)]

    def start(self) -> np.ndarray:
        return np.clip(self.centre, self.lower, self.upper)

    def minimize(self, x: np.ndarray, penalty: float) -> np.ndarray:
        candidates = [x]

        def stacked(z):
            r = self.residuals(z)
            return np.concatenate([np.sqrt(self.scale) * (z - self.centre), math.sqrt(penalty) * r])

        try:
            fit = optimize.least_squares(stacked, x, bounds=(self.lower, self.upper),
                                         xtol=1e-15, ftol=1e-15, gtol=1e-15)
            candidates.append(fit.x)
        except ValueError:
            # residuals not finite at the start point
            pass

        best = min(candidates, key=lambda z: self.objective(z, penalty))
        for _ in range(NELDER_MEAD_RESTARTS):
            result = optimize.minimize(
                self.objective, best, args=(penalty,), method="Nelder-Mead", bounds=self.bounds,
                options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 500 * len(best) + 500, "adaptive": len(best) > 2},
            )
            if self.objective(result.x, penalty) < self.objective(best, penalty):
                best = result.x
        best = self._coordinate_pass(best, penalty)

        if not math.isfinite(self.objective(best, penalty)):
            raise NonFiniteObjective(f"penalty {penalty:g}")
        return best

    def _coordinate_pass(self, x: np.ndarray, penalty: float) -> np.ndarray:
        x = np.array(x, dtype=float)
        for j in range(len(x)):
            def along(t, j=j):
                z = x.copy()
                z[j] = t
                return self.objective(z, penalty)

            try:
                if math.isfinite(self.lower[j]) and math.isfinite(self.upper[j]):
                    line = optimize.minimize_scalar(along, bounds=(self.lower[j], self.upper[j]), method="bounded",
                                                    options={"xatol": 1e-12})
                else:
                    step = max(1e-3, 1e-2 * abs(x[j]))
                    line = optimize.minimize_scalar(along, bracket=(x[j], x[j] + step), method="golden")
            except (ValueError, RuntimeError):
                continue
            if line.fun < along(x[j]) and self.lower[j] <= line.x <= self.upper[j]:
                x[j] = line.x
        return x

    def project(self, x: np.ndarray) -> np.ndarray:
        """Residual-only least squares from x; tightens feasibility after the penalty rounds"""
        try:
            fit = optimize.least_squares(self.residuals, x, bounds=(self.lower, self.upper),
                                         xtol=1e-15, ftol=1e-15, gtol=1e-15)
        except ValueError:
            return x
        if np.max(np.abs(self.residuals(fit.x))) < np.max(np.abs(self.residuals(x))):
            return fit.x
        return x

    def solve(self, tolerance: float) -> Tuple[np.ndarray, float]:
        if not self.names:
            x = np.empty(0)
            return x, float(np.max(np.abs(self.residuals(x))))
        x = self.start()
        for penalty in PENALTY_SCHEDULE:
            x = self.minimize(x, penalty)
            residual = float(np.max(np.abs(self.residuals(x))))
            logger.debug("[ABDUCTION] penalty round", penalty=penalty, residual=residual)
            if residual <= tolerance:
                break
        x = self.project(x)
        return x, float(np.max(np.abs(self.residuals(x))))


def abduce_update(
    scm: Scm,
    facts: Mapping[str, float],
    baseline: Optional[Mapping[str, float]] = None,
    weights: Optional[Mapping[str, float]] = None,
    tolerance: float = 1e-6,
    max_combinations: Optional[int] = None,
) -> Deterministic:
    """
    Nearest noise vector to ``baseline`` that reproduces ``facts``.

    Noises with no path to an observed variable stay at the baseline. Point
    noises keep their value, Categorical ones are searched over their atoms
    and Uniform ones stay within their bounds.

    Args:
        baseline: Reference noise vector on the prior support; defaults to
            each prior mean, moved to the nearest atom for Categorical noises

    Raises:
        InvalidQuery: a baseline coordinate the prior cannot produce
        NoFeasiblePoint: no candidate reaches ``tolerance``
        NonFiniteObjective: the penalty objective is not finite anywhere tried
        SupportTooLarge: too many Categorical atom combinations to search
    """
    facts = check_facts(scm, facts)
    cap = config.UPDATE_COMBINATIONS if max_combinations is None else max_combinations
    baseline = _baseline(scm, baseline)
    weights = _weights(scm, weights)
    constrained, unconstrained = split_noises(scm, facts)

    fixed = dict(baseline)
    categorical: List[str] = []
    continuous: List[str] = []
    for name in constrained:
        dist = scm.distribution(name)
        if isinstance(dist, Point):
            fixed[name] = dist.value
        elif isinstance(dist, Categorical):
            categorical.append(name)
        else:
            continuous.append(name)

    combos = math.prod(len(scm.distribution(n).values) for n in categorical)
    if combos > cap:
        raise SupportTooLarge(combos, cap)

    lower = np.array([scm.distribution(n).lo if isinstance(scm.distribution(n), Uniform) else -np.inf for n in continuous])
    upper = np.array([scm.distribution(n).hi if isinstance(scm.distribution(n), Uniform) else np.inf for n in continuous])
    centre = np.array([baseline[n] for n in continuous])
    scale = np.array([weights[n] for n in continuous])

    best: Optional[Tuple[float, NoiseDraw]] = None
    smallest = math.inf
    failure: Optional[NonFiniteObjective] = None
    for combo in itertools.product(*(scm.distribution(n).values for n in categorical)):
        assignment = dict(fixed)
        assignment.update(zip(categorical, map(float, combo)))
        problem = _PenaltyProblem(scm, facts, {k: v for k, v in assignment.items() if k not in continuous},
                                  continuous, centre, scale, lower, upper)
        try:
            x, residual = problem.solve(tolerance)
        except NonFiniteObjective as e:
            failure = e
            continue
        smallest = min(smallest, residual)
        if residual > tolerance:
            continue
        assignment.update(zip(continuous, map(float, x)))
        distance = _distance(assignment, baseline, weights, _moved(categorical, continuous))
        if best is None or distance < best[0]:
            best = (distance, assignment)

    if best is None:
        if failure is not None and not math.isfinite(smallest):
            raise failure
        raise NoFeasiblePoint(smallest, tolerance)
    u_star = {n: best[1][n] for n in scm.noise_names}
    logger.info("[ABDUCTION] update", u_star=u_star, distance=best[0], combinations=combos)
    return Deterministic(u_star, constrained, unconstrained)


def _moved(*groups: Sequence[str]) -> List[str]:
    return [n for group in groups for n in group]


def _distance(u: Mapping[str, float], baseline: Mapping[str, float], weights: Mapping[str, float], names) -> float:
    return math.fsum(weights[n] * (u[n] - baseline[n]) ** 2 for n in names)
