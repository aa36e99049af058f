"""
Forward simulation: noise draws pushed through the structural equations.
"""
from typing import Dict, List, Mapping

import numpy as np

from scm.errors import EvaluationError, InvalidQuery
from scm.expr import evaluate
from scm.model import Assignment, NoiseDraw, Scm
from utils.parallel import generator

# Absolute tolerance for matching finite-support values against user literals
ATOM_TOLERANCE = 1e-9


def sample_noise_columns(scm: Scm, rng: np.random.Generator, n: int) -> Dict[str, np.ndarray]:
    """n independent joint draws as one array per noise, drawn in declaration order"""
    return {v.noise: v.distribution.sample(rng, n) for v in scm.variables}


def sample_noise(scm: Scm, rng_seed: int, n: int) -> List[NoiseDraw]:
    """
    Draw n independent joint noise vectors.

    The stream is numpy's PCG64 seeded through SeedSequence(rng_seed), so a
    fixed seed reproduces the same draws on every platform.
    """
    if n < 1:
        raise InvalidQuery("n must be >= 1")
    columns = sample_noise_columns(scm, generator(rng_seed), n)
    names = list(columns)
    rows = np.column_stack([columns[name] for name in names])
    return [dict(zip(names, map(float, row))) for row in rows]


def forward_batch(scm: Scm, noise: Mapping[str, np.ndarray]) -> Dict[str, np.ndarray]:
    """
    Evaluate every variable in topological order for a batch of noise draws.

    Raises:
        InvalidQuery: when a noise column is missing
        EvaluationError: naming the variable whose equation failed
    """
    missing = [name for name in scm.noise_names if name not in noise]
    if missing:
        raise InvalidQuery(f"noise draw missing {', '.join(missing)}")
    n = len(next(iter(noise.values()))) if noise else 0
    env: Dict[str, np.ndarray] = {name: np.asarray(noise[name], dtype=float) for name in scm.noise_names}
    for name in scm.order:
        var = scm.variable(name)
        try:
            env[name] = evaluate(var.expr, env, n)
        except EvaluationError as e:
            raise EvaluationError(name, e.cause) from None
    return {name: env[name] for name in scm.names}


def forward_sample(scm: Scm, noise: NoiseDraw) -> Assignment:
    """Single-draw forward evaluation; identical noise gives an identical assignment"""
    columns = {name: np.array([float(value)]) for name, value in noise.items()}
    values = forward_batch(scm, columns)
    return {name: float(values[name][0]) for name in scm.names}


def matches(values: np.ndarray, target: float, finite: bool, epsilon: float) -> np.ndarray:
    """Row mask: atom match for finite-support variables, |v - z| <= epsilon otherwise"""
    tolerance = ATOM_TOLERANCE if finite else epsilon
    return np.abs(values - target) <= tolerance


def reproduces_facts(scm: Scm, noise: NoiseDraw, facts: Mapping[str, float], tol: float = 1e-9) -> bool:
    try:
        values = forward_sample(scm, noise)
    except EvaluationError:
        return False
    return all(abs(values[k] - v) <= tol for k, v in facts.items())
