"""
Association queries P(Y | Z): exact variable elimination or Monte Carlo.
"""
from dataclasses import dataclass
from typing import Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import structlog

import config
from inference.enumeration import cpt_factors, require_finite
from inference.factors import eliminate
from inference.results import DistributionResult, Empirical, pmf_from_table
from inference.sampling import forward_batch, matches, sample_noise_columns
from scm.errors import InvalidQuery, ZeroProbabilityEvidence
from scm.model import Assignment, Scm
from utils.parallel import run_shards, shard_sizes

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class Exact:
    order_heuristic: str = "min-degree"
    cap: Optional[int] = None

    name = "exact"

    def describe(self) -> dict:
        return {"name": self.name, "order_heuristic": self.order_heuristic}


@dataclass(frozen=True)
class MonteCarlo:
    n: int = config.MC_SAMPLES
    seed: int = 0
    epsilon: float = config.EVIDENCE_WINDOW
    shards: int = 1
    workers: int = 1

    name = "mc"

    def describe(self) -> dict:
        return {"name": self.name, "n": self.n, "seed": self.seed, "epsilon": self.epsilon, "shards": self.shards}


Engine = Union[Exact, MonteCarlo]


def choose_engine(scm: Scm, engine: Optional[Engine] = None, seed: int = 0) -> Engine:
    """Exact when the model is finite-support and under the state cap, else Monte Carlo"""
    if engine is not None:
        return engine
    if scm.is_finite_support and scm.joint_state_bound() <= config.STATE_CAP:
        return Exact()
    return MonteCarlo(seed=seed)


def check_query(scm: Scm, targets: Iterable[str], evidence: Mapping[str, float]) -> List[str]:
    """Resolve and check target/evidence names; returns targets in the given order"""
    targets = list(dict.fromkeys(targets))
    if not targets:
        raise InvalidQuery("at least one target is required")
    for name in list(targets) + list(evidence):
        scm.variable(name)
    for name, value in evidence.items():
        if not np.isfinite(value):
            raise InvalidQuery(f"evidence value for {name} is not finite")
    return targets


def association_query(
    scm: Scm,
    targets: Sequence[str],
    evidence: Optional[Assignment] = None,
    engine: Optional[Engine] = None,
) -> DistributionResult:
    """
    Compute P(Y | Z).

    A target that also appears in the evidence is returned as a point mass at
    the evidence value.

    Args:
        scm: Validated model
        targets: Y, nonempty
        evidence: Z, possibly empty
        engine: Exact, MonteCarlo, or None to pick automatically

    Returns:
        ExactPmf for the exact engine, Empirical for Monte Carlo

    Raises:
        ZeroProbabilityEvidence: P(Z) = 0, or no Monte Carlo sample matched Z
        NotFiniteSupport: Exact on a model with continuous noise
    """
    evidence = dict(evidence or {})
    targets = check_query(scm, targets, evidence)
    engine = choose_engine(scm, engine)
    logger.info("[INFERENCE] association query", targets=targets, evidence=evidence, engine=engine.name)
    if isinstance(engine, Exact):
        return _exact(scm, targets, evidence, engine)
    return _monte_carlo(scm, targets, evidence, engine)


def _exact(scm: Scm, targets: List[str], evidence: Assignment, engine: Exact) -> DistributionResult:
    require_finite(scm)
    keep = set(targets)
    factors = [f.reduce(evidence, keep=keep) for f in cpt_factors(scm, cap=engine.cap)]
    hidden = [name for name in scm.names if name not in keep and name not in evidence]
    joint = eliminate(factors, hidden, engine.order_heuristic, declaration=scm.names)
    if joint.total() <= 0:
        raise ZeroProbabilityEvidence(evidence)
    joint = joint.reorder(targets)
    return pmf_from_table(targets, joint.table)


def _monte_carlo(scm: Scm, targets: List[str], evidence: Assignment, engine: MonteCarlo) -> DistributionResult:
    if engine.n < 1:
        raise InvalidQuery("n must be >= 1")
    sizes = shard_sizes(engine.n, engine.shards)

    def shard(k: int, rng: np.random.Generator) -> np.ndarray:
        values = forward_batch(scm, sample_noise_columns(scm, rng, sizes[k]))
        return filter_rows(scm, values, targets, evidence, engine.epsilon)

    rows = np.concatenate(run_shards(shard, engine.seed, engine.shards, engine.workers))
    if len(rows) == 0:
        raise ZeroProbabilityEvidence(evidence, "no Monte Carlo sample matched the evidence")
    logger.debug("[INFERENCE] monte carlo accepted", accepted=len(rows), n=engine.n)
    return Empirical.from_samples(targets, rows)


def filter_rows(
    scm: Scm,
    values: Mapping[str, np.ndarray],
    targets: Sequence[str],
    evidence: Mapping[str, float],
    epsilon: float,
) -> np.ndarray:
    """Target columns of the rows consistent with the evidence"""
    n = len(next(iter(values.values())))
    mask = np.ones(n, dtype=bool)
    for name, target in evidence.items():
        mask &= matches(values[name], target, name in scm.finite_variables, epsilon)
    return np.column_stack([values[name] for name in targets])[mask]
