"""
Population-level intervention queries on the mutilated model.
"""
from typing import Mapping, Optional, Sequence

import numpy as np
import structlog

from inference.association import Exact, association_query, check_query, choose_engine
from inference.results import DistributionResult, EffectResult, Empirical, PointResult
from inference.sampling import forward_batch, sample_noise_columns
from intervention.surgery import surgery
from scm.errors import InvalidQuery
from scm.model import Assignment, Scm
from utils.parallel import run_shards, shard_sizes

logger = structlog.get_logger(__name__)


def intervention_query(
    scm: Scm,
    targets: Sequence[str],
    do: Mapping[str, float],
    evidence: Optional[Assignment] = None,
    engine=None,
) -> DistributionResult:
    """
    P_do(Y | Z): association query on surgery(scm, do).

    Evidence conditions the mutilated model, including evidence on ancestors
    of the intervened variables.
    """
    if not do:
        raise InvalidQuery("do-query needs at least one intervention")
    mutilated = surgery(scm, do)
    logger.info("[INTERVENTION] do query", targets=list(targets), do=dict(do))
    return association_query(mutilated, targets, evidence, engine)


def ace(
    scm: Scm,
    targets: Sequence[str],
    do1: Mapping[str, float],
    do2: Mapping[str, float],
    engine=None,
    seed: int = 0,
) -> EffectResult:
    """
    Population average causal effect E[Y | do1] - E[Y | do2].

    The exact engine differences the two exact means. Monte Carlo pushes the
    same prior noise batch through both mutilated models and reports the
    per-draw differences.
    """
    targets = check_query(scm, targets, {})
    m1, m2 = surgery(scm, do1), surgery(scm, do2)
    engine = choose_engine(scm, engine, seed)
    logger.info("[INTERVENTION] average effect", targets=targets, do1=dict(do1), do2=dict(do2), engine=engine.name)

    if isinstance(engine, Exact):
        r1 = association_query(m1, targets, {}, engine)
        r2 = association_query(m2, targets, {}, engine)
        diff = {y: r1.mean(y) - r2.mean(y) for y in targets}
        return EffectResult(tuple(targets), diff, PointResult(diff))

    if engine.n < 1:
        raise InvalidQuery("n must be >= 1")
    sizes = shard_sizes(engine.n, engine.shards)

    def shard(k: int, rng: np.random.Generator) -> np.ndarray:
        noise = sample_noise_columns(scm, rng, sizes[k])
        v1, v2 = forward_batch(m1, noise), forward_batch(m2, noise)
        return np.column_stack([v1[y] - v2[y] for y in targets])

    rows = np.concatenate(run_shards(shard, engine.seed, engine.shards, engine.workers))
    differences = Empirical.from_samples(targets, rows)
    return EffectResult(tuple(targets), {y: differences.mean(y) for y in targets}, differences)
