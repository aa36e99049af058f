"""Variable Elimination over sparse factors

Each factor maps value tuples over its scope to nonnegative mass. For any set
of hidden variables H, elimination repeatedly picks Y in H, multiplies the
factors mentioning Y, sums Y out, and puts the result back.
"""
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import structlog

logger = structlog.get_logger(__name__)

HEURISTICS = ("min-degree", "declaration-order")


@dataclass(frozen=True)
class Factor:
    scope: Tuple[str, ...]
    table: Dict[Tuple[float, ...], float] = field(hash=False)

    def __post_init__(self):
        if len(set(self.scope)) != len(self.scope):
            raise ValueError(f"duplicate names in factor scope {self.scope}")

    def __mul__(self, other: "Factor") -> "Factor":
        shared = [v for v in self.scope if v in other.scope]
        extra = [v for v in other.scope if v not in self.scope]
        a_shared = [self.scope.index(v) for v in shared]
        b_shared = [other.scope.index(v) for v in shared]
        b_extra = [other.scope.index(v) for v in extra]

        index = defaultdict(list)
        for key, p in other.table.items():
            index[tuple(key[i] for i in b_shared)].append((tuple(key[i] for i in b_extra), p))

        table: Dict[Tuple[float, ...], float] = defaultdict(float)
        for key, p in self.table.items():
            for tail, q in index.get(tuple(key[i] for i in a_shared), ()):
                table[key + tail] += p * q
        return Factor(self.scope + tuple(extra), dict(table))

    def marginalize(self, names: Iterable[str]) -> "Factor":
        drop = set(names)
        keep = [i for i, v in enumerate(self.scope) if v not in drop]
        table: Dict[Tuple[float, ...], float] = defaultdict(float)
        for key, p in self.table.items():
            table[tuple(key[i] for i in keep)] += p
        return Factor(tuple(self.scope[i] for i in keep), dict(table))

    def reduce(self, evidence: Mapping[str, float], keep: Iterable[str] = (), tol: float = 1e-9) -> "Factor":
        """Keep rows agreeing with evidence; evidence names drop out of scope unless kept"""
        fixed = {self.scope.index(k): v for k, v in evidence.items() if k in self.scope}
        if not fixed:
            return self
        keep = set(keep)
        retained = [i for i, v in enumerate(self.scope) if i not in fixed or v in keep]
        table: Dict[Tuple[float, ...], float] = defaultdict(float)
        for key, p in self.table.items():
            if all(abs(key[i] - v) <= tol for i, v in fixed.items()):
                table[tuple(key[i] for i in retained)] += p
        return Factor(tuple(self.scope[i] for i in retained), dict(table))

    def reorder(self, scope: Sequence[str]) -> "Factor":
        scope = tuple(scope)
        if set(scope) != set(self.scope):
            raise ValueError(f"cannot reorder {self.scope} as {scope}")
        positions = [self.scope.index(v) for v in scope]
        return Factor(scope, {tuple(key[i] for i in positions): p for key, p in self.table.items()})

    def total(self) -> float:
        return math.fsum(self.table.values())

    def normalize(self) -> "Factor":
        total = self.total()
        return Factor(self.scope, {k: p / total for k, p in self.table.items()})


def product(factors: Sequence[Factor]) -> Factor:
    result = Factor((), {(): 1.0})
    for f in factors:
        result = result * f
    return result


def _pick_min_degree(factors: List[Factor], hidden: List[str]) -> str:
    def degree(var: str) -> int:
        neighbours: Set[str] = set()
        for f in factors:
            if var in f.scope:
                neighbours.update(f.scope)
        return len(neighbours - {var})

    # ties go to the earliest name in ``hidden`` (declaration order)
    return min(hidden, key=lambda v: (degree(v), hidden.index(v)))


def eliminate(
    factors: Sequence[Factor],
    hidden: Iterable[str],
    order_heuristic: str = "min-degree",
    declaration: Optional[Sequence[str]] = None,
) -> Factor:
    """
    Sum-product elimination of ``hidden`` from the product of ``factors``.

    Args:
        factors: Input factors
        hidden: Names to sum out
        order_heuristic: "min-degree" (default) or "declaration-order"
        declaration: Name order used for declaration-order elimination and
            tie-breaking; defaults to first appearance across scopes

    Returns:
        One factor over the remaining (non-hidden) names
    """
    if order_heuristic not in HEURISTICS:
        raise ValueError(f"Unknown elimination heuristic: {order_heuristic}")
    if declaration is None:
        declaration = list(dict.fromkeys(v for f in factors for v in f.scope))
    hidden_set = set(hidden)
    remaining = [v for v in declaration if v in hidden_set]
    remaining += sorted(hidden_set - set(remaining))
    pool = list(factors)

    while remaining:
        var = _pick_min_degree(pool, remaining) if order_heuristic == "min-degree" else remaining[0]
        remaining.remove(var)
        relevant = [f for f in pool if var in f.scope]
        if not relevant:
            continue
        pool = [f for f in pool if var not in f.scope]
        pool.append(product(relevant).marginalize([var]))
        logger.debug("[INFERENCE] eliminated", var=var, n_factors=len(pool))

    return product(pool)
