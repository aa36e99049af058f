"""
ICI Orchestrator - individual causal queries in three steps

1. Abduction: indiv(W) infers the noise of the individual from its facts
2. Intervention: surgery replaces the equations of the intervened variables
3. Inference: the abduced noise is propagated through the mutilated model

W conditions only step 1; evidence Z filters the propagated draws of step 3.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import structlog

import config
from abduction.exact import abduce_exact
from abduction.mcmc import abduce_mcmc
from abduction.methods import Exact, Mcmc, Method, Rejection, Update
from abduction.rejection import abduce_rejection
from abduction.results import AbductionResult, Deterministic
from abduction.update import abduce_update
from inference.association import check_query
from inference.results import DistributionResult, EffectResult, Empirical, PointResult
from inference.sampling import forward_batch, forward_sample, matches
from intervention.surgery import check_intervention, surgery
from scm.errors import InvalidQuery, ZeroProbabilityEvidence
from scm.model import Assignment, Scm

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class IndividualQuery:
    facts: Assignment
    do: Assignment
    targets: Tuple[str, ...]
    evidence: Assignment = field(default_factory=dict)
    method: Method = field(default_factory=Exact)
    seed: int = 0


@dataclass(frozen=True)
class IceRequest:
    facts: Assignment
    targets: Tuple[str, ...]
    do1: Assignment
    do2: Assignment
    method: Method = field(default_factory=Exact)
    seed: int = 0


def indiv(scm: Scm, facts: Mapping[str, float], method: Optional[Method] = None, seed: int = 0) -> AbductionResult:
    """
    The individualized population: the noise consistent with the facts W.

    Args:
        scm: Validated model
        facts: Observed variables of the individual
        method: Exact, Update, Rejection or Mcmc (default Exact)
        seed: Master seed for the sampling methods
    """
    method = method or Exact()
    logger.info("[ORCHESTRATOR] Abduction", method=method.name, facts=dict(facts), seed=seed)
    if isinstance(method, Exact):
        return abduce_exact(scm, facts)
    if isinstance(method, Update):
        return abduce_update(scm, facts, method.baseline, method.weights, method.tolerance)
    if isinstance(method, Rejection):
        return abduce_rejection(scm, facts, method.n, seed, method.epsilon, method.max_proposals,
                                method.shards, method.workers)
    if isinstance(method, Mcmc):
        return abduce_mcmc(scm, facts, method.n, method.burnin, seed, method.proposal_scale, method.h,
                           method.chains, method.workers)
    raise InvalidQuery(f"Unknown abduction method: {method!r}")


class IciOrchestrator:
    """
    Runs individual queries against one model

    Manages:
    - The abduction result per (facts, method, seed), shared by every
      intervention asked about the same individual
    - The mutilated model per intervention
    """

    def __init__(self, scm: Scm, epsilon: float = config.EVIDENCE_WINDOW):
        self.scm = scm
        self.epsilon = epsilon
        self._abductions: Dict[tuple, AbductionResult] = {}
        self._mutilated: Dict[tuple, Scm] = {}

    def abduce(self, facts: Mapping[str, float], method: Optional[Method] = None, seed: int = 0) -> AbductionResult:
        method = method or Exact()
        key = (tuple(sorted(facts.items())), repr(method), seed)
        if key not in self._abductions:
            self._abductions[key] = indiv(self.scm, facts, method, seed)
        return self._abductions[key]

    def mutilate(self, do: Mapping[str, float]) -> Scm:
        key = tuple(sorted(do.items()))
        if key not in self._mutilated:
            logger.info("[ORCHESTRATOR] Intervention", do=dict(do))
            self._mutilated[key] = surgery(self.scm, do)
        return self._mutilated[key]

    def propagate(
        self,
        abduced: AbductionResult,
        do: Mapping[str, float],
        targets: Sequence[str],
        evidence: Optional[Mapping[str, float]] = None,
    ) -> DistributionResult:
        """Push every abduced draw through the mutilated model and keep the targets"""
        mutilated = self.mutilate(do)
        evidence = dict(evidence or {})
        targets = list(targets)

        if isinstance(abduced, Deterministic):
            values = forward_sample(mutilated, abduced.u_star)
            for name, target in evidence.items():
                finite = name in mutilated.finite_variables
                if not matches(np.array([values[name]]), target, finite, self.epsilon)[0]:
                    raise ZeroProbabilityEvidence(evidence, "the individual's propagated values contradict the evidence")
            return PointResult({name: values[name] for name in targets})

        values = forward_batch(mutilated, abduced.columns())
        n = abduced.n
        mask = np.ones(n, dtype=bool)
        for name, target in evidence.items():
            mask &= matches(values[name], target, name in mutilated.finite_variables, self.epsilon)
        if not mask.any():
            raise ZeroProbabilityEvidence(evidence, "no propagated draw matched the evidence")
        rows = np.column_stack([values[name] for name in targets])[mask]
        logger.info("[ORCHESTRATOR] Inference", kept=int(mask.sum()), n=n)
        return Empirical.from_samples(targets, rows, abduced.weights[mask])

    def query(self, q: IndividualQuery) -> DistributionResult:
        targets = _check_individual(self.scm, q.targets, q.do, q.evidence)
        abduced = self.abduce(q.facts, q.method, q.seed)
        return self.propagate(abduced, q.do, targets, q.evidence)

    def ice(self, r: IceRequest) -> EffectResult:
        targets = _check_individual(self.scm, r.targets, r.do1, {})
        _check_individual(self.scm, r.targets, r.do2, {})
        abduced = self.abduce(r.facts, r.method, r.seed)
        first = self.propagate(abduced, r.do1, targets)
        second = self.propagate(abduced, r.do2, targets)

        if isinstance(abduced, Deterministic):
            diff = {y: first.value[y] - second.value[y] for y in targets}
            return EffectResult(tuple(targets), diff, PointResult(diff))
        # same abduced draws in both arms, so rows pair up
        differences = Empirical.from_samples(targets, first.samples - second.samples, abduced.weights)
        return EffectResult(tuple(targets), {y: differences.mean(y) for y in targets}, differences)

    def alternatives(
        self,
        facts: Mapping[str, float],
        variable: str,
        values: Sequence[float],
        targets: Sequence[str],
        method: Optional[Method] = None,
        seed: int = 0,
    ) -> List[Tuple[float, DistributionResult]]:
        """One abduction, then do(variable=v) for each v in turn"""
        if not values:
            raise InvalidQuery("at least one alternative value is required")
        abduced = self.abduce(facts, method, seed)
        out = []
        for value in values:
            do = {variable: float(value)}
            out.append((float(value), self.propagate(abduced, do, _check_individual(self.scm, targets, do, {}))))
        return out


def _check_individual(scm: Scm, targets, do, evidence) -> List[str]:
    targets = check_query(scm, targets, evidence)
    check_intervention(scm, do)
    overlap = [t for t in targets if t in do]
    if overlap:
        raise InvalidQuery(f"targets must not be intervened: {', '.join(overlap)}")
    return targets


def ici_query(scm: Scm, q: IndividualQuery) -> DistributionResult:
    """P(Y | indiv(W), do(X), Z)"""
    return IciOrchestrator(scm).query(q)


def ice(scm: Scm, r: IceRequest) -> EffectResult:
    """Individual causal effect Y(do1) - Y(do2) from one shared abduction"""
    return IciOrchestrator(scm).ice(r)


def alternatives(
    scm: Scm,
    facts: Mapping[str, float],
    variable: str,
    values: Sequence[float],
    targets: Sequence[str],
    method: Optional[Method] = None,
    seed: int = 0,
) -> List[Tuple[float, DistributionResult]]:
    return IciOrchestrator(scm).alternatives(facts, variable, values, targets, method, seed)
