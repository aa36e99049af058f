"""
Abduction under full observability: U_i = f_i^-1(V_i, Pa(V_i)).
"""
from typing import Mapping

import numpy as np
import structlog

from abduction.results import Deterministic
from abduction.shared import check_facts
from scm.errors import EvaluationError, NotInvertible, PartialObservation
from scm.expr import evaluate_scalar
from scm.model import Scm

logger = structlog.get_logger(__name__)


def abduce_exact(scm: Scm, facts: Mapping[str, float]) -> Deterministic:
    """
    Invert each equation in topological order.

    Raises:
        PartialObservation: some variable is not in ``facts``
        NotInvertible: a variable has neither a declared nor an additive inverse
    """
    facts = check_facts(scm, facts)
    missing = [name for name in scm.names if name not in facts]
    if missing:
        raise PartialObservation(missing)

    u_star = {}
    for name in scm.order:
        var = scm.variable(name)
        inverse = scm.inverse_for(name)
        if inverse is None:
            raise NotInvertible(name)
        values = {p: facts[p] for p in scm.parent_map[name]}
        values[name] = facts[name]
        try:
            u_star[var.noise] = evaluate_scalar(inverse, values)
        except EvaluationError as e:
            raise EvaluationError(name, e.cause) from None
        if np.isneginf(var.distribution.log_prob(np.array([u_star[var.noise]]))[0]):
            logger.warning("[ABDUCTION] abduced noise outside prior support", noise=var.noise,
                           value=u_star[var.noise], prior=var.distribution.name)

    u_star = {noise: u_star[noise] for noise in scm.noise_names}
    logger.info("[ABDUCTION] exact", u_star=u_star)
    return Deterministic(u_star, tuple(scm.noise_names), ())
