"""
Abduction method selectors and their parameters.
"""
from dataclasses import asdict, dataclass
from typing import Mapping, Optional, Union

import config
from scm.model import NoiseDraw


@dataclass(frozen=True)
class Exact:
    """Invert every equation; needs every variable observed"""
    name = "exact"

    def describe(self) -> dict:
        return {"name": self.name}


@dataclass(frozen=True)
class Update:
    """
    Nearest feasible noise vector to ``baseline`` under the weighted L2 distance.

    ``baseline`` defaults to the prior means; ``weights`` default to 1.
    """
    baseline: Optional[NoiseDraw] = None
    weights: Optional[Mapping[str, float]] = None
    tolerance: float = 1e-6

    name = "update"

    def describe(self) -> dict:
        return {"name": self.name, **asdict(self)}


@dataclass(frozen=True)
class Rejection:
    """
    Prior proposals accepted when the simulated facts match.

    ``epsilon`` (one window for every continuous fact, or one per variable)
    defaults to 1% of each fact's prior-predictive standard deviation.
    """
    n: int = config.MC_SAMPLES
    epsilon: Optional[Union[float, Mapping[str, float]]] = None
    max_proposals: int = config.MAX_PROPOSALS
    shards: int = 1
    workers: int = 1

    name = "rejection"

    def describe(self) -> dict:
        return {"name": self.name, "n": self.n, "epsilon": self.epsilon, "max_proposals": self.max_proposals,
                "shards": self.shards}


@dataclass(frozen=True)
class Mcmc:
    """
    Random-walk Metropolis-Hastings on the noise vector with a Gaussian kernel
    of bandwidth ``h`` on continuous fact residuals.
    """
    n: int = config.MC_SAMPLES
    burnin: Optional[int] = None
    h: Optional[Union[float, Mapping[str, float]]] = None
    proposal_scale: float = 0.5
    chains: int = config.MCMC_CHAINS
    workers: int = 1

    name = "mcmc"

    def describe(self) -> dict:
        return {"name": self.name, "n": self.n, "burnin": self.burnin, "h": self.h,
                "proposal_scale": self.proposal_scale, "chains": self.chains}


Method = Union[Exact, Update, Rejection, Mcmc]

METHOD_NAMES = ("exact", "update", "rejection", "mcmc")
