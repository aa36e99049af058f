"""
Exact enumeration for finite-support models.

Every noise atom is pushed through the structural equations, either for the
whole joint (``enumerate_joint``) or one variable at a time given its parents
(``noise_to_conditional`` / ``cpt_factors``), which feeds variable elimination.
"""
from collections import defaultdict
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import structlog

import config
from inference.factors import Factor
from inference.sampling import ATOM_TOLERANCE, forward_batch
from scm.errors import EvaluationError, InvalidQuery, NotFiniteSupport, SupportTooLarge, ZeroProbabilityEvidence
from scm.expr import evaluate
from scm.model import Assignment, Scm

logger = structlog.get_logger(__name__)


def _atom_grid(atom_lists: Sequence[List[Tuple[float, float]]]) -> Tuple[List[np.ndarray], np.ndarray]:
    """Cartesian product of atom lists as value columns plus the product mass per row"""
    if not atom_lists:
        return [], np.ones(1)
    values = [np.array([a for a, _ in atoms], dtype=float) for atoms in atom_lists]
    probs = [np.array([p for _, p in atoms], dtype=float) for atoms in atom_lists]
    value_grid = np.meshgrid(*values, indexing="ij")
    prob_grid = np.meshgrid(*probs, indexing="ij")
    mass = np.prod(np.stack([g.ravel() for g in prob_grid]), axis=0)
    return [g.ravel() for g in value_grid], mass


def require_finite(scm: Scm, ignore: Iterable[str] = ()):
    """Raise NotFiniteSupport unless every noise of a variable outside ``ignore`` is finite"""
    ignore = set(ignore)
    continuous = [v.noise for v in scm.variables if not v.distribution.is_finite and v.name not in ignore]
    if continuous:
        raise NotFiniteSupport(continuous)


def enumerate_joint(scm: Scm, cap: Optional[int] = None) -> Factor:
    """
    Exact joint pmf over all endogenous variables, scope in declaration order.

    Raises:
        NotFiniteSupport: when any noise is Normal or Uniform
        SupportTooLarge: when the number of noise combinations exceeds ``cap``
    """
    cap = config.STATE_CAP if cap is None else cap
    require_finite(scm)
    size = scm.joint_state_bound()
    if size > cap:
        raise SupportTooLarge(size, cap)

    columns, mass = _atom_grid([v.distribution.atoms() for v in scm.variables])
    keep = mass > 0
    noise = {name: col[keep] for name, col in zip(scm.noise_names, columns)}
    mass = mass[keep]
    values = forward_batch(scm, noise)

    table: Dict[Tuple[float, ...], float] = defaultdict(float)
    rows = np.column_stack([values[name] for name in scm.names]) if scm.names else np.empty((len(mass), 0))
    for row, p in zip(map(tuple, rows.tolist()), mass.tolist()):
        table[row] += p
    logger.debug("[INFERENCE] enumerated joint", noise_states=size, support=len(table))
    return Factor(tuple(scm.names), dict(table))


def noise_to_conditional(scm: Scm, v: str, pa_values: Mapping[str, float]) -> Factor:
    """pmf of ``v`` given its parents, pushing each noise atom through f_v"""
    var = scm.variable(v)
    if not var.distribution.is_finite:
        raise NotFiniteSupport([var.noise])
    missing = [p for p in scm.parent_map[v] if p not in pa_values]
    if missing:
        raise InvalidQuery(f"parent values missing for {v}: {', '.join(missing)}")

    atoms = [(a, p) for a, p in var.distribution.atoms() if p > 0]
    n = len(atoms)
    env = {p: np.full(n, float(pa_values[p])) for p in scm.parent_map[v]}
    env[var.noise] = np.array([a for a, _ in atoms], dtype=float)
    try:
        out = evaluate(var.expr, env, n)
    except EvaluationError as e:
        raise EvaluationError(v, e.cause) from None

    table: Dict[Tuple[float, ...], float] = defaultdict(float)
    for value, (_, p) in zip(out.tolist(), atoms):
        table[(value,)] += p
    return Factor((v,), dict(table))


def _conditional_table(scm: Scm, v: str, supports: Mapping[str, List[float]], cap: int) -> Factor:
    """CPT factor over (Pa(v)..., v) for every combination of parent support values"""
    var = scm.variable(v)
    pas = scm.parent_map[v]
    atoms = [(a, p) for a, p in var.distribution.atoms() if p > 0]
    size = len(atoms)
    for p in pas:
        size *= len(supports[p])
    if size > cap:
        raise SupportTooLarge(size, cap)

    columns, mass = _atom_grid([[(x, 1.0) for x in supports[p]] for p in pas] + [atoms])
    env = dict(zip(pas, columns[:-1]))
    env[var.noise] = columns[-1]
    n = len(mass)
    try:
        out = evaluate(var.expr, env, n)
        ok = np.ones(n, dtype=bool)
    except EvaluationError:
        # combinations of parent values that never co-occur may fail; they get no mass
        out = np.zeros(n)
        ok = np.zeros(n, dtype=bool)
        for i in range(n):
            try:
                out[i] = evaluate(var.expr, {k: c[i:i + 1] for k, c in env.items()}, 1)[0]
                ok[i] = True
            except EvaluationError:
                continue

    table: Dict[Tuple[float, ...], float] = defaultdict(float)
    for i in np.flatnonzero(ok):
        key = tuple(float(env[p][i]) for p in pas) + (float(out[i]),)
        table[key] += float(mass[i])
    return Factor(tuple(pas) + (v,), dict(table))


def variable_supports(scm: Scm, cap: Optional[int] = None) -> Dict[str, List[float]]:
    """
    Sorted possible values of every variable, built in topological order from
    parent supports (a superset when parents are dependent).
    """
    cap = config.STATE_CAP if cap is None else cap
    require_finite(scm)
    supports: Dict[str, List[float]] = {}
    for name in scm.order:
        cpt = _conditional_table(scm, name, supports, cap)
        supports[name] = sorted({key[-1] for key in cpt.table})
    return supports


def cpt_factors(
    scm: Scm,
    exclude: Iterable[str] = (),
    cap: Optional[int] = None,
    fixed: Optional[Mapping[str, float]] = None,
) -> List[Factor]:
    """
    One factor P(V | Pa(V)) per variable not in ``exclude`` or ``fixed``, in
    declaration order.

    Variables in ``fixed`` get no factor and a single-value support, so their
    children's conditionals are built for that value only.
    """
    cap = config.STATE_CAP if cap is None else cap
    fixed = dict(fixed or {})
    require_finite(scm, ignore=fixed)
    exclude = set(exclude) | set(fixed)
    supports: Dict[str, List[float]] = {}
    factors: Dict[str, Factor] = {}
    for name in scm.order:
        if name in fixed:
            supports[name] = [float(fixed[name])]
            continue
        cpt = _conditional_table(scm, name, supports, cap)
        supports[name] = sorted({key[-1] for key in cpt.table})
        factors[name] = cpt
    return [factors[name] for name in scm.names if name not in exclude]


def enumerate_noise_posterior(scm: Scm, facts: Assignment, cap: Optional[int] = None) -> Dict[Tuple[float, ...], float]:
    """
    Exact P(U | facts) over noise tuples in declaration order, by brute force.

    Used to cross-check sampling-based abduction on small models.
    """
    cap = config.STATE_CAP if cap is None else cap
    require_finite(scm)
    size = scm.joint_state_bound()
    if size > cap:
        raise SupportTooLarge(size, cap)
    columns, mass = _atom_grid([v.distribution.atoms() for v in scm.variables])
    keep = mass > 0
    columns = [col[keep] for col in columns]
    mass = mass[keep]
    values = forward_batch(scm, dict(zip(scm.noise_names, columns)))
    match = np.ones(len(mass), dtype=bool)
    for name, target in facts.items():
        match &= np.abs(values[scm.variable(name).name] - target) <= ATOM_TOLERANCE
    total = mass[match].sum()
    if total <= 0:
        raise ZeroProbabilityEvidence(dict(facts))
    rows = np.column_stack(columns)[match]
    posterior: Dict[Tuple[float, ...], float] = defaultdict(float)
    for row, p in zip(map(tuple, rows.tolist()), mass[match].tolist()):
        posterior[row] += p / total
    return dict(posterior)
