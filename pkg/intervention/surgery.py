"""
Graph surgery: do(X=x) replaces X's equation with the constant x.

The intervened noise is kept under its name as an inert Point(0) so every
variable still owns exactly one noise.
"""
from dataclasses import replace
from typing import Dict, Mapping, Optional

import numpy as np

import config
from inference.enumeration import cpt_factors, require_finite
from inference.factors import Factor, product
from scm.distributions import Point
from scm.errors import InvalidQuery
from scm.expr import Num
from scm.model import Scm
from scm.validation import validate

# Variable name -> forced value
Intervention = Dict[str, float]


def check_intervention(scm: Scm, do: Mapping[str, float]):
    for name, value in do.items():
        scm.variable(name)
        if not np.isfinite(value):
            raise InvalidQuery(f"do value for {name} is not finite")


def surgery(scm: Scm, do: Mapping[str, float]) -> Scm:
    """
    Model M_do: each intervened variable becomes ``X = x``; every other equation
    and noise is unchanged.

    Raises:
        UnknownVariable: when a do key is not an endogenous variable
    """
    check_intervention(scm, do)
    if not do:
        return scm
    variables = tuple(
        replace(v, expr=Num(float(do[v.name])), distribution=Point(0.0), inverse=None) if v.name in do else v
        for v in scm.variables
    )
    return validate(Scm(variables, scm.order, scm.parent_map))


def truncated_joint(scm: Scm, do: Mapping[str, float], cap: Optional[int] = None) -> Factor:
    """
    Truncated factorization: product of P(V | Pa(V)) over non-intervened
    variables times the indicator I(X = x), scope in declaration order.

    Computed from the original model's conditionals, independently of
    ``surgery``.
    """
    cap = config.STATE_CAP if cap is None else cap
    check_intervention(scm, do)
    require_finite(scm, ignore=do)
    indicators = [Factor((name,), {(float(value),): 1.0}) for name, value in do.items()]
    joint = product(cpt_factors(scm, cap=cap, fixed=do) + indicators)
    return joint.reorder(scm.names)
