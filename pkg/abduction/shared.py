"""
Helpers shared by the abduction methods.
"""
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from inference.sampling import ATOM_TOLERANCE, forward_batch, sample_noise_columns
from scm.errors import InvalidQuery
from scm.model import Assignment, Scm
from utils.parallel import generator
from utils.result_summarizer import get_summarizer

PRIOR_PREDICTIVE_SAMPLES = 1000
WINDOW_FRACTION = 1e-2
DEGENERATE_WINDOW = 1e-9


def check_facts(scm: Scm, facts: Optional[Mapping[str, float]]) -> Assignment:
    if not facts:
        raise InvalidQuery("facts must name at least one observed variable")
    out = {}
    for name, value in facts.items():
        scm.variable(name)
        value = float(value)
        if not np.isfinite(value):
            raise InvalidQuery(f"fact value for {name} is not finite")
        out[name] = value
    return out


def influencing_noises(scm: Scm, observed: Iterable[str]) -> List[str]:
    """
    Noises of the observed variables and of every variable with a directed path
    into one, in declaration order. All other noises are unconstrained by the facts.
    """
    observed = set(observed)
    affected = observed | scm.ancestors(observed)
    return [v.noise for v in scm.variables if v.name in affected]


def split_noises(scm: Scm, facts: Mapping[str, float]) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    constrained = influencing_noises(scm, facts)
    return tuple(constrained), tuple(n for n in scm.noise_names if n not in constrained)


def fact_windows(
    scm: Scm,
    facts: Mapping[str, float],
    window: Optional[Union[float, Mapping[str, float]]],
    seed: int,
) -> Dict[str, float]:
    """
    Per-fact tolerance. Finite-support variables match atoms; continuous ones
    use ``window`` or, when absent, 1% of the prior-predictive standard deviation
    estimated from 1000 forward samples.
    """
    out: Dict[str, float] = {}
    default = None
    for name in facts:
        if name in scm.finite_variables:
            out[name] = ATOM_TOLERANCE
            continue
        if isinstance(window, Mapping) and name in window:
            out[name] = float(window[name])
        elif window is not None and not isinstance(window, Mapping):
            out[name] = float(window)
        else:
            if default is None:
                default = prior_predictive_std(scm, seed)
            std = default[name]
            out[name] = WINDOW_FRACTION * std if std > 0 else DEGENERATE_WINDOW
        if not out[name] > 0:
            raise InvalidQuery(f"tolerance for {name} must be positive")
    return out


def prior_predictive_std(scm: Scm, seed: int) -> Dict[str, float]:
    rng = generator(seed)
    values = forward_batch(scm, sample_noise_columns(scm, rng, PRIOR_PREDICTIVE_SAMPLES))
    return {name: float(np.std(column)) for name, column in values.items()}


def fact_mask(values: Mapping[str, np.ndarray], facts: Mapping[str, float], windows: Mapping[str, float]) -> np.ndarray:
    n = len(next(iter(values.values())))
    mask = np.ones(n, dtype=bool)
    for name, target in facts.items():
        mask &= np.abs(values[name] - target) <= windows[name]
    return mask


def posterior_diagnostics(
    noise_names: Tuple[str, ...],
    samples: np.ndarray,
    constrained: Tuple[str, ...],
    unconstrained: Tuple[str, ...],
    **extra,
) -> Dict[str, object]:
    summary = get_summarizer().summarize(samples, None, noise_names)
    diagnostics = {
        "mean": {name: s["mean"] for name, s in summary.items()},
        "std": {name: s["std"] for name, s in summary.items()},
        "constrained": list(constrained),
        "unconstrained": list(unconstrained),
    }
    diagnostics.update(extra)
    return diagnostics
