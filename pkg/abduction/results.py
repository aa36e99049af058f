"""
Abduction results: a single noise vector or a sampled posterior over noises.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union

import numpy as np

from scm.model import NoiseDraw


@dataclass(frozen=True)
class Deterministic:
    u_star: NoiseDraw
    constrained: Tuple[str, ...] = ()
    unconstrained: Tuple[str, ...] = ()

    kind = "deterministic"

    @property
    def diagnostics(self) -> dict:
        return {"constrained": list(self.constrained), "unconstrained": list(self.unconstrained)}

    def to_dict(self, include_samples: bool = False) -> dict:
        return {"kind": self.kind, "u_star": dict(self.u_star)}


@dataclass(frozen=True)
class Posterior:
    """
    Noise samples, one row per draw and one column per noise (declaration order).

    diagnostics: acceptance_rate, n_proposed, ess, budget_exhausted, mean and
    std per noise, constrained and unconstrained noise lists, plus
    method-specific entries.
    """
    noise_names: Tuple[str, ...]
    samples: np.ndarray = field(compare=False)
    weights: np.ndarray = field(compare=False)
    diagnostics: Dict[str, object] = field(compare=False)

    kind = "posterior"

    @property
    def n(self) -> int:
        return len(self.samples)

    def columns(self) -> Dict[str, np.ndarray]:
        return {name: self.samples[:, j] for j, name in enumerate(self.noise_names)}

    def draws(self) -> List[NoiseDraw]:
        return [dict(zip(self.noise_names, row)) for row in self.samples.tolist()]

    def to_dict(self, include_samples: bool = False) -> dict:
        out = {"kind": self.kind, "noises": list(self.noise_names), "n": self.n}
        if include_samples:
            out["samples"] = self.samples.tolist()
            out["weights"] = self.weights.tolist()
        return out


AbductionResult = Union[Deterministic, Posterior]
