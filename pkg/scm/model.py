"""
SCM domain types: variables, the validated model and its causal graph.

An ``Scm`` is only produced by ``scm.validation.validate`` and is immutable
afterwards, so it can be shared read-only between workers.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import networkx as nx

from scm.distributions import Distribution
from scm.errors import UnknownVariable
from scm.expr import Expr, additive_inverse

# Variable/noise name -> value
Assignment = Dict[str, float]
# Noise name -> value; complete when it covers every noise of the model
NoiseDraw = Dict[str, float]


@dataclass(frozen=True)
class Variable:
    """One structural equation V = f(Pa(V), U) with its noise prior"""
    name: str
    expr: Expr
    noise: str
    distribution: Distribution
    inverse: Optional[Expr] = None


@dataclass(frozen=True)
class Scm:
    variables: Tuple[Variable, ...]
    order: Tuple[str, ...]
    parent_map: Mapping[str, Tuple[str, ...]] = field(compare=False)

    @cached_property
    def _by_name(self) -> Dict[str, Variable]:
        return {v.name: v for v in self.variables}

    @cached_property
    def _by_noise(self) -> Dict[str, Variable]:
        return {v.noise: v for v in self.variables}

    @property
    def names(self) -> List[str]:
        """Endogenous names in declaration order"""
        return [v.name for v in self.variables]

    @property
    def noise_names(self) -> List[str]:
        """Noise names in declaration order"""
        return [v.noise for v in self.variables]

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownVariable(name) from None

    def owner_of(self, noise: str) -> Variable:
        try:
            return self._by_noise[noise]
        except KeyError:
            raise UnknownVariable(noise) from None

    def is_variable(self, name: str) -> bool:
        return name in self._by_name

    def is_noise(self, name: str) -> bool:
        return name in self._by_noise

    def distribution(self, noise: str) -> Distribution:
        return self.owner_of(noise).distribution

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.names)
        for child, pas in self.parent_map.items():
            g.add_edges_from((p, child) for p in pas)
        return g

    def ancestors(self, names: Iterable[str]) -> Set[str]:
        out: Set[str] = set()
        for n in names:
            out |= nx.ancestors(self.graph, self.variable(n).name)
        return out

    def descendants(self, names: Iterable[str]) -> Set[str]:
        out: Set[str] = set()
        for n in names:
            out |= nx.descendants(self.graph, self.variable(n).name)
        return out

    def inverse_for(self, name: str) -> Optional[Expr]:
        """Declared inverse, else the synthesised additive-noise inverse"""
        var = self.variable(name)
        if var.inverse is not None:
            return var.inverse
        return additive_inverse(var.expr, var.name, var.noise)

    @cached_property
    def finite_variables(self) -> FrozenSet[str]:
        """Variables whose own and ancestral noises all have finite support"""
        finite = set()
        for name in self.order:
            var = self.variable(name)
            if var.distribution.is_finite and all(p in finite for p in self.parent_map[name]):
                finite.add(name)
        return frozenset(finite)

    @property
    def continuous_noises(self) -> List[str]:
        return [v.noise for v in self.variables if not v.distribution.is_finite]

    @property
    def is_finite_support(self) -> bool:
        return not self.continuous_noises

    def joint_state_bound(self) -> int:
        """Number of noise atom combinations (upper bound on joint support)"""
        size = 1
        for v in self.variables:
            size *= len(v.distribution.atoms())
        return size


def parents(scm: Scm, v: str) -> Set[str]:
    """Direct causes Pa(v): the endogenous names referenced by v's equation"""
    scm.variable(v)
    return set(scm.parent_map[v])
