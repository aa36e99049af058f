"""
Metropolis-Hastings over the noise vector.

The target is prior(u) times a Gaussian kernel of bandwidth h on the residuals
of continuous facts; facts on finite-support variables must match exactly.
Continuous coordinates that can reach a fact move by a Gaussian random walk
scaled by their prior standard deviation. Finite-support coordinates that can
reach a fact are redrawn from their prior, either one at a time or as a block,
so their prior terms cancel in the acceptance ratio. Every step also redraws
the noises no fact depends on from their prior: the kernel does not see them,
so that proposal is accepted unless the redrawn model cannot be evaluated.
The normalizing constant is never needed.
"""
from dataclasses import dataclass
from typing import List, Mapping, Optional, Tuple, Union

import numpy as np
import structlog

import config
from abduction.results import Posterior
from abduction.shared import check_facts, fact_windows, posterior_diagnostics, split_noises
from inference.sampling import ATOM_TOLERANCE, forward_batch, sample_noise_columns
from scm.distributions import Point
from scm.errors import BadBandwidth, DegenerateChain, EvaluationError, InvalidQuery
from scm.model import Scm
from utils.parallel import run_shards, shard_sizes
from utils.result_summarizer import get_summarizer

logger = structlog.get_logger(__name__)

MIN_ACCEPTANCE = 1e-3
INIT_DRAWS = 1000


@dataclass
class _Target:
    scm: Scm
    facts: Mapping[str, float]
    bandwidths: Mapping[str, float]

    def __post_init__(self):
        self.names = tuple(self.scm.noise_names)
        self.dists = [self.scm.distribution(n) for n in self.names]
        constrained, _ = split_noises(self.scm, self.facts)
        movable = [j for j, d in enumerate(self.dists) if not isinstance(d, Point)]
        self.continuous = [j for j in movable if self.names[j] in constrained and not self.dists[j].is_finite]
        self.finite = [j for j in movable if self.names[j] in constrained and self.dists[j].is_finite]
        self.free = [j for j in movable if self.names[j] not in constrained]
        self.steps = np.array([self.dists[j].std for j in self.continuous])
        self.hard = {k: v for k, v in self.facts.items() if k in self.scm.finite_variables}
        self.soft = {k: v for k, v in self.facts.items() if k not in self.hard}

    def log_prior(self, u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(u)
        total = np.zeros(len(u))
        for j, dist in enumerate(self.dists):
            total = total + dist.log_prob(u[:, j])
        return total

    def log_kernel(self, u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(u)
        try:
            values = forward_batch(self.scm, {n: u[:, j] for j, n in enumerate(self.names)})
        except EvaluationError:
            if len(u) == 1:
                return np.array([-np.inf])
            return np.concatenate([self.log_kernel(row) for row in u])
        out = np.zeros(len(u))
        for name, target in self.soft.items():
            out -= (values[name] - target) ** 2 / (2.0 * self.bandwidths[name] ** 2)
        for name, target in self.hard.items():
            out = np.where(np.abs(values[name] - target) <= ATOM_TOLERANCE, out, -np.inf)
        return out

    def moves(self) -> List[str]:
        out = ["walk"] if self.continuous else []
        if self.finite:
            out += ["one", "block"]
        return out


def _start(target: _Target, rng: np.random.Generator) -> np.ndarray:
    """Best of INIT_DRAWS prior draws under the target density"""
    noise = sample_noise_columns(target.scm, rng, INIT_DRAWS)
    u = np.column_stack([noise[n] for n in target.names])
    with np.errstate(invalid="ignore"):
        score = target.log_prior(u) + target.log_kernel(u)
    best = int(np.argmax(score))
    if not np.isfinite(score[best]):
        raise DegenerateChain(0.0, "no prior draw is consistent with the facts")
    return u[best].copy()


def _refresh(target: _Target, u: np.ndarray, lp: float, lk: float, rng: np.random.Generator):
    """Redraw the noises no fact depends on; their conditional is the prior"""
    proposal = u.copy()
    for j in target.free:
        proposal[j] = target.dists[j].sample(rng, 1)[0]
    lk_new = target.log_kernel(proposal)[0]
    if lk_new >= lk or np.log(rng.uniform()) < lk_new - lk:
        return proposal, target.log_prior(proposal)[0], lk_new
    return u, lp, lk


def _run_chain(
    target: _Target,
    n: int,
    burnin: int,
    proposal_scale: float,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, int, int]:
    u = _start(target, rng)
    lp = target.log_prior(u)[0]
    lk = target.log_kernel(u)[0]
    moves = target.moves()
    samples = np.empty((n, len(u)))
    accepted = 0

    for t in range(burnin + n):
        move = moves[rng.integers(len(moves))] if moves else None
        proposal = u.copy()
        if move == "walk":
            proposal[target.continuous] += rng.normal(0.0, proposal_scale * target.steps)
            lp_new = target.log_prior(proposal)[0]
            lk_new = target.log_kernel(proposal)[0] if np.isfinite(lp_new) else -np.inf
            log_alpha = (lp_new + lk_new) - (lp + lk)
        elif move is not None:
            coords = [target.finite[rng.integers(len(target.finite))]] if move == "one" else target.finite
            for j in coords:
                proposal[j] = target.dists[j].sample(rng, 1)[0]
            lp_new = target.log_prior(proposal)[0]
            lk_new = target.log_kernel(proposal)[0]
            # prior independence proposal: only the kernel enters the ratio
            log_alpha = lk_new - lk
        else:
            lp_new, lk_new, log_alpha = lp, lk, 0.0

        if log_alpha >= 0 or np.log(rng.uniform()) < log_alpha:
            u, lp, lk = proposal, lp_new, lk_new
            if t >= burnin:
                accepted += 1
        if target.free:
            u, lp, lk = _refresh(target, u, lp, lk, rng)
        if t >= burnin:
            samples[t - burnin] = u
    return samples, accepted, burnin + n


def abduce_mcmc(
    scm: Scm,
    facts: Mapping[str, float],
    n_samples: Optional[int] = None,
    n_burnin: Optional[int] = None,
    seed: int = 0,
    proposal_scale: float = 0.5,
    h: Optional[Union[float, Mapping[str, float]]] = None,
    n_chains: Optional[int] = None,
    workers: int = 1,
) -> Posterior:
    """
    Sample P(U | facts) by Metropolis-Hastings.

    Args:
        n_samples: Post-burn-in draws over all chains
        n_burnin: Discarded draws per chain (default 10% of its draws)
        h: Kernel bandwidth, one for every continuous fact or one per
            variable; defaults to the rejection window
        n_chains: Chains on substreams 0..n_chains-1, concatenated in order

    Raises:
        BadBandwidth: h <= 0
        DegenerateChain: post-burn-in acceptance below 0.1%, or no starting
            point consistent with the facts
    """
    facts = check_facts(scm, facts)
    n_samples = config.MC_SAMPLES if n_samples is None else n_samples
    n_chains = config.MCMC_CHAINS if n_chains is None else n_chains
    for value in (h.values() if isinstance(h, Mapping) else [h]):
        if value is not None and not value > 0:
            raise BadBandwidth(value)
    if n_samples < n_chains or n_chains < 1:
        raise InvalidQuery("n_samples must be >= n_chains >= 1")
    if not proposal_scale > 0:
        raise InvalidQuery("proposal_scale must be positive")
    if n_burnin is not None and n_burnin < 0:
        raise InvalidQuery("n_burnin must be >= 0")

    target = _Target(scm, facts, fact_windows(scm, facts, h, seed))
    sizes = shard_sizes(n_samples, n_chains)
    burnins = [n_burnin if n_burnin is not None else size // 10 for size in sizes]

    chains = run_shards(lambda k, rng: _run_chain(target, sizes[k], burnins[k], proposal_scale, rng),
                        seed, n_chains, workers)
    samples = np.concatenate([c[0] for c in chains])
    accepted = sum(c[1] for c in chains)
    n_proposed = sum(c[2] for c in chains)
    rate = accepted / n_samples
    if not target.moves():
        rate = 1.0
    if rate < MIN_ACCEPTANCE:
        raise DegenerateChain(rate)

    summarizer = get_summarizer()
    ess_per_noise = {
        name: float(sum(summarizer.effective_sample_size(c[0][:, j]) for c in chains))
        for j, name in enumerate(target.names)
    }
    constrained, unconstrained = split_noises(scm, facts)
    diagnostics = posterior_diagnostics(
        target.names, samples, constrained, unconstrained,
        acceptance_rate=rate,
        n_proposed=n_proposed,
        ess=min(ess_per_noise.values()),
        ess_per_noise=ess_per_noise,
        budget_exhausted=False,
        chains=n_chains,
        burnin=burnins[0],
        h={k: v for k, v in target.bandwidths.items() if k in target.soft},
    )
    logger.info("[ABDUCTION] mcmc", chains=n_chains, acceptance_rate=rate, ess=diagnostics["ess"])
    return Posterior(target.names, samples, np.ones(len(samples)), diagnostics)
