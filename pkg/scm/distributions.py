"""
Noise priors: Point, Normal, Uniform and Categorical.
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

DISTRIBUTION_NAMES = ("Point", "Normal", "Uniform", "Categorical")


@dataclass(frozen=True)
class Point:
    value: float

    name = "Point"
    is_finite = True

    def params(self) -> Tuple[float, ...]:
        return (self.value,)

    def check(self) -> Optional[str]:
        if not math.isfinite(self.value):
            return "value must be finite"
        return None

    def atoms(self) -> List[Tuple[float, float]]:
        return [(self.value, 1.0)]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, self.value, dtype=float)

    def log_prob(self, x: np.ndarray) -> np.ndarray:
        return np.where(np.asarray(x) == self.value, 0.0, -np.inf)

    @property
    def mean(self) -> float:
        return self.value

    @property
    def std(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Normal:
    loc: float
    stddev: float

    name = "Normal"
    is_finite = False

    def params(self):
        return (self.loc, self.stddev)

    def check(self):
        if not (math.isfinite(self.loc) and math.isfinite(self.stddev)):
            return "parameters must be finite"
        if self.stddev <= 0:
            return "stddev must be > 0"
        return None

    def atoms(self):
        raise TypeError("Normal has no finite support")

    def sample(self, rng, n):
        return rng.normal(self.loc, self.stddev, n)

    def log_prob(self, x):
        return stats.norm.logpdf(x, loc=self.loc, scale=self.stddev)

    @property
    def mean(self):
        return self.loc

    @property
    def std(self):
        return self.stddev


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    name = "Uniform"
    is_finite = False

    def params(self):
        return (self.lo, self.hi)

    def check(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            return "bounds must be finite"
        if self.lo >= self.hi:
            return "lo must be < hi"
        if not math.isfinite(self.hi - self.lo):
            return "hi - lo must be finite"
        return None

    def atoms(self):
        raise TypeError("Uniform has no finite support")

    def sample(self, rng, n):
        return rng.uniform(self.lo, self.hi, n)

    def log_prob(self, x):
        return stats.uniform.logpdf(x, loc=self.lo, scale=self.hi - self.lo)

    @property
    def mean(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def std(self):
        return (self.hi - self.lo) / math.sqrt(12.0)


@dataclass(frozen=True)
class Categorical:
    values: Tuple[float, ...]
    probs: Tuple[float, ...]

    name = "Categorical"
    is_finite = True

    def params(self):
        return tuple(self.values) + tuple(self.probs)

    def check(self):
        if len(self.values) == 0 or len(self.values) != len(self.probs):
            return "needs 2k arguments: k values then k probabilities"
        if not all(math.isfinite(v) for v in self.values):
            return "values must be finite"
        if len(set(self.values)) != len(self.values):
            return "values must be distinct"
        if any(p < 0 or not math.isfinite(p) for p in self.probs):
            return "probabilities must be >= 0"
        if abs(math.fsum(self.probs) - 1.0) > 1e-9:
            return f"probabilities sum to {math.fsum(self.probs)!r}, not 1"
        return None

    def atoms(self):
        return list(zip(self.values, self.probs))

    def sample(self, rng, n):
        p = np.asarray(self.probs, dtype=float)
        return rng.choice(np.asarray(self.values, dtype=float), size=n, p=p / p.sum())

    def log_prob(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, -np.inf)
        with np.errstate(divide="ignore"):
            for value, prob in zip(self.values, self.probs):
                out = np.where(x == value, np.log(prob), out)
        return out

    @property
    def mean(self):
        return float(np.dot(self.values, self.probs))

    @property
    def std(self):
        m = self.mean
        return math.sqrt(max(0.0, float(np.dot(self.probs, (np.asarray(self.values) - m) ** 2))))


Distribution = Point | Normal | Uniform | Categorical


def from_args(name: str, args: Sequence[float]) -> Distribution:
    """
    Build a distribution from DSL arguments.

    Raises:
        ValueError: wrong argument count, or ``name`` is not a known distribution
    """
    args = tuple(float(a) for a in args)
    if name == "Point":
        if len(args) != 1:
            raise ValueError("Point takes 1 argument")
        return Point(args[0])
    if name == "Normal":
        if len(args) != 2:
            raise ValueError("Normal takes 2 arguments (mean, stddev)")
        return Normal(*args)
    if name == "Uniform":
        if len(args) != 2:
            raise ValueError("Uniform takes 2 arguments (lo, hi)")
        return Uniform(*args)
    if name == "Categorical":
        if len(args) < 2 or len(args) % 2:
            raise ValueError("Categorical takes 2k arguments: k values then k probabilities")
        k = len(args) // 2
        return Categorical(args[:k], args[k:])
    raise ValueError(f"Unknown distribution: {name}")
