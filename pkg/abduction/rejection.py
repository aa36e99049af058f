"""
Rejection sampling from the prior: a draw is kept when its simulated facts
match the observed ones (atom match for finite-support variables, a window of
half-width epsilon otherwise).
"""
from typing import Mapping, Optional, Tuple, Union

import numpy as np
import structlog

import config
from abduction.results import Posterior
from abduction.shared import check_facts, fact_mask, fact_windows, posterior_diagnostics, split_noises
from inference.sampling import forward_batch, sample_noise_columns
from scm.errors import BudgetExhausted, InvalidQuery
from scm.model import Scm
from utils.parallel import run_shards, shard_sizes

logger = structlog.get_logger(__name__)

MIN_BATCH = 1_000
MAX_BATCH = 100_000


def _batch_size(needed: int, accepted: int, proposed: int, budget_left: int) -> int:
    if accepted > 0:
        estimate = int(1.2 * needed * proposed / accepted) + 1
    else:
        estimate = 4 * needed
    return int(min(budget_left, max(MIN_BATCH, min(MAX_BATCH, estimate))))


def abduce_rejection(
    scm: Scm,
    facts: Mapping[str, float],
    n_target: Optional[int] = None,
    seed: int = 0,
    epsilon: Optional[Union[float, Mapping[str, float]]] = None,
    max_proposals: Optional[int] = None,
    shards: int = 1,
    workers: int = 1,
) -> Posterior:
    """
    Draw u from the prior until ``n_target`` draws reproduce the facts.

    Shard k collects its share of ``n_target`` from substream k within its share
    of the proposal budget; shards are merged in index order.

    Raises:
        BudgetExhausted: the budget ran out before any draw was accepted. A
            partial result (some draws accepted) is returned instead, flagged
            ``budget_exhausted`` in its diagnostics.
    """
    facts = check_facts(scm, facts)
    n_target = config.MC_SAMPLES if n_target is None else n_target
    max_proposals = config.MAX_PROPOSALS if max_proposals is None else max_proposals
    if n_target < 1 or max_proposals < 1 or shards < 1:
        raise InvalidQuery("n_target, max_proposals and shards must be >= 1")
    windows = fact_windows(scm, facts, epsilon, seed)
    targets = shard_sizes(n_target, shards)
    budgets = shard_sizes(max_proposals, shards)
    names = tuple(scm.noise_names)

    def shard(k: int, rng: np.random.Generator) -> Tuple[np.ndarray, int]:
        kept = []
        accepted = proposed = 0
        while accepted < targets[k] and proposed < budgets[k]:
            size = _batch_size(targets[k] - accepted, accepted, proposed, budgets[k] - proposed)
            noise = sample_noise_columns(scm, rng, size)
            mask = fact_mask(forward_batch(scm, noise), facts, windows)
            rows = np.column_stack([noise[name] for name in names])[mask][: targets[k] - accepted]
            kept.append(rows)
            accepted += len(rows)
            proposed += size
        samples = np.concatenate(kept) if kept else np.empty((0, len(names)))
        return samples, proposed

    parts = run_shards(shard, seed, shards, workers)
    samples = np.concatenate([p[0] for p in parts])
    n_proposed = int(sum(p[1] for p in parts))
    accepted = len(samples)
    exhausted = accepted < n_target
    constrained, unconstrained = split_noises(scm, facts)

    if accepted == 0:
        logger.warning("[ABDUCTION] rejection budget exhausted with nothing accepted", n_proposed=n_proposed)
        raise BudgetExhausted(0, n_proposed, partial=None)
    if exhausted:
        logger.warning("[ABDUCTION] rejection budget exhausted", accepted=accepted, n_target=n_target,
                       n_proposed=n_proposed)

    diagnostics = posterior_diagnostics(
        names, samples, constrained, unconstrained,
        acceptance_rate=accepted / n_proposed,
        n_proposed=n_proposed,
        ess=float(accepted),
        budget_exhausted=exhausted,
        epsilon=windows,
    )
    logger.info("[ABDUCTION] rejection", accepted=accepted, n_proposed=n_proposed,
                acceptance_rate=diagnostics["acceptance_rate"])
    return Posterior(names, samples, np.ones(accepted), diagnostics)
