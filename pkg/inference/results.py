"""
Query results: exact pmf, weighted empirical sample set, or a single point.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from utils.result_summarizer import get_summarizer


@dataclass(frozen=True)
class ExactPmf:
    targets: Tuple[str, ...]
    support: Tuple[Tuple[float, ...], ...]
    probs: Tuple[float, ...]

    kind = "pmf"

    def __post_init__(self):
        total = math.fsum(self.probs)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"pmf sums to {total!r}")

    def as_dict(self) -> Dict[Tuple[float, ...], float]:
        return dict(zip(self.support, self.probs))

    def prob(self, *values: float) -> float:
        return self.as_dict().get(tuple(float(v) for v in values), 0.0)

    def marginal(self, name: str) -> Dict[float, float]:
        j = self.targets.index(name)
        out: Dict[float, float] = {}
        for row, p in zip(self.support, self.probs):
            out[row[j]] = out.get(row[j], 0.0) + p
        return out

    def mean(self, name: str) -> float:
        return math.fsum(v * p for v, p in self.marginal(name).items())

    def to_dict(self, include_samples: bool = False) -> dict:
        return {
            "kind": self.kind,
            "targets": list(self.targets),
            "support": [list(row) for row in self.support],
            "probs": list(self.probs),
        }


@dataclass(frozen=True)
class Empirical:
    targets: Tuple[str, ...]
    samples: np.ndarray = field(compare=False)
    weights: np.ndarray = field(compare=False)
    summary: Dict[str, dict] = field(compare=False)

    kind = "empirical"

    @classmethod
    def from_samples(cls, targets, samples: np.ndarray, weights: Optional[np.ndarray] = None) -> "Empirical":
        samples = np.asarray(samples, dtype=float).reshape(-1, len(targets))
        if weights is None:
            weights = np.ones(len(samples))
        weights = np.asarray(weights, dtype=float)
        if len(samples) == 0 or np.any(weights < 0) or not np.any(weights > 0):
            raise ValueError("empirical result needs nonnegative, not-all-zero weights")
        summary = get_summarizer().summarize(samples, weights, targets)
        return cls(tuple(targets), samples, weights, summary)

    @property
    def n(self) -> int:
        return len(self.samples)

    def column(self, name: str) -> np.ndarray:
        return self.samples[:, self.targets.index(name)]

    def mean(self, name: str) -> float:
        return self.summary[name]["mean"]

    def variance(self, name: str) -> float:
        return self.summary[name]["variance"]

    def pmf(self) -> Dict[Tuple[float, ...], float]:
        return get_summarizer().empirical_pmf(self.samples, self.weights)

    def to_dict(self, include_samples: bool = False) -> dict:
        out = {
            "kind": self.kind,
            "targets": list(self.targets),
            "n": self.n,
            "summary": self.summary,
        }
        if include_samples:
            out["samples"] = self.samples.tolist()
            out["weights"] = self.weights.tolist()
        return out


@dataclass(frozen=True)
class PointResult:
    value: Dict[str, float]

    kind = "point"

    def mean(self, name: str) -> float:
        return self.value[name]

    def to_dict(self, include_samples: bool = False) -> dict:
        return {"kind": self.kind, "value": dict(self.value)}


DistributionResult = Union[ExactPmf, Empirical, PointResult]


def pmf_from_table(targets: List[str], table: Dict[Tuple[float, ...], float]) -> ExactPmf:
    """Normalise a (possibly unnormalised) table into a pmf with sorted support"""
    total = math.fsum(table.values())
    support = tuple(sorted(k for k, p in table.items() if p > 0))
    probs = tuple(table[k] / total for k in support)
    return ExactPmf(tuple(targets), support, probs)


@dataclass(frozen=True)
class EffectResult:
    """Difference between two intervention arms, per target"""
    targets: Tuple[str, ...]
    mean_difference: Dict[str, float]
    differences: DistributionResult

    @property
    def kind(self) -> str:
        return self.differences.kind

    def to_dict(self, include_samples: bool = False) -> dict:
        out = self.differences.to_dict(include_samples)
        out["mean_difference"] = dict(self.mean_difference)
        return out
