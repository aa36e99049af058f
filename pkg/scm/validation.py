"""
Structural validation: turns a parsed document (or an existing Scm) into a
validated Scm, collecting every violation instead of stopping at the first.
"""
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple, Union

import networkx as nx
import numpy as np
import structlog

from dsl.document import ModelDocument
from scm import distributions
from scm.errors import (
    BadDistributionParams,
    CycleDetected,
    DuplicateName,
    EvaluationError,
    InverseMismatch,
    NoiseCardinalityViolation,
    ScmError,
    UnknownReference,
    ValidationFailed,
)
from scm.expr import Expr, evaluate_scalar, referenced_names
from scm.model import Scm, Variable

logger = structlog.get_logger(__name__)

INVERSE_PROBES = 100
INVERSE_TOLERANCE = 1e-9


@dataclass
class _Candidate:
    name: str
    expr: Expr
    noise: Optional[str]
    distribution: Optional[distributions.Distribution]
    inverse: Optional[Expr]
    line: Optional[int] = None

    def where(self, what: str = "equation") -> str:
        suffix = f" (line {self.line})" if self.line else ""
        return f"{what} of '{self.name}'{suffix}"


def validate(model: Union[ModelDocument, Scm]) -> Scm:
    """
    Validate a model and derive its parent map and topological order.

    Args:
        model: A parsed document (noise pairing inferred from references) or an
            already-built Scm (explicit pairing, revalidated)

    Raises:
        ValidationFailed: listing every violation found
    """
    diagnostics: List[ScmError] = []
    if isinstance(model, Scm):
        candidates, declared = _from_scm(model, diagnostics)
    else:
        candidates, declared = _from_document(model, diagnostics)

    scm = _check_structure(candidates, declared, diagnostics)
    if diagnostics:
        logger.info("[VALIDATION] model rejected", n_diagnostics=len(diagnostics))
        raise ValidationFailed(diagnostics)
    logger.debug("[VALIDATION] model accepted", order=list(scm.order))
    return scm


def _from_document(doc: ModelDocument, diagnostics: List[ScmError]) -> Tuple[List[_Candidate], Set[str]]:
    noises: Dict[str, Optional[distributions.Distribution]] = {}
    for decl in doc.noises:
        if decl.name in noises:
            diagnostics.append(DuplicateName(decl.name))
            continue
        try:
            dist = distributions.from_args(decl.distribution, decl.args)
        except ValueError as e:
            diagnostics.append(BadDistributionParams(decl.name, str(e)))
            noises[decl.name] = None
            continue
        reason = dist.check()
        if reason:
            diagnostics.append(BadDistributionParams(decl.name, reason))
            dist = None
        noises[decl.name] = dist

    candidates: Dict[str, _Candidate] = {}
    for decl in doc.variables:
        if decl.name in candidates:
            diagnostics.append(DuplicateName(decl.name))
            continue
        if decl.name in noises:
            diagnostics.append(DuplicateName(decl.name, "used as both a variable and a noise"))
            continue
        line = decl.span.line if decl.span else None
        candidates[decl.name] = _Candidate(decl.name, decl.expr, None, None, None, line)

    # noise pairing: each var references exactly one noise, each noise one var
    owner: Dict[str, str] = {}
    for cand in candidates.values():
        used = [n for n in referenced_names(cand.expr) if n in noises]
        if len(used) != 1:
            reason = "references no noise" if not used else f"references noises {', '.join(used)}; exactly one allowed"
            diagnostics.append(NoiseCardinalityViolation(cand.name, reason))
            continue
        noise = used[0]
        if noise in owner:
            diagnostics.append(
                NoiseCardinalityViolation(cand.name, f"noise '{noise}' already belongs to '{owner[noise]}'")
            )
            continue
        owner[noise] = cand.name
        cand.noise = noise
        cand.distribution = noises[noise]
    for noise in noises:
        if noise not in owner and not any(noise in referenced_names(c.expr) for c in candidates.values()):
            diagnostics.append(NoiseCardinalityViolation(noise, "noise declared but used by no variable"))

    seen_inverses = set()
    for decl in doc.inverses:
        if decl.noise in seen_inverses:
            diagnostics.append(DuplicateName(decl.noise, "has more than one inverse"))
            continue
        seen_inverses.add(decl.noise)
        if decl.noise not in owner:
            diagnostics.append(UnknownReference(decl.noise, "inverse declaration"))
            continue
        candidates[owner[decl.noise]].inverse = decl.expr

    return list(candidates.values()), set(noises)


def _from_scm(scm: Scm, diagnostics: List[ScmError]) -> Tuple[List[_Candidate], Set[str]]:
    out = []
    seen_noise = {}
    for var in scm.variables:
        if var.noise in seen_noise:
            diagnostics.append(
                NoiseCardinalityViolation(var.name, f"noise '{var.noise}' already belongs to '{seen_noise[var.noise]}'")
            )
        seen_noise[var.noise] = var.name
        reason = var.distribution.check()
        if reason:
            diagnostics.append(BadDistributionParams(var.noise, reason))
        out.append(_Candidate(var.name, var.expr, var.noise, var.distribution, var.inverse))
    return out, set(seen_noise)


def _check_structure(
    candidates: List[_Candidate], declared_noises: Set[str], diagnostics: List[ScmError]
) -> Optional[Scm]:
    names = {c.name for c in candidates}
    noise_of = {c.name: c.noise for c in candidates}

    parent_map: Dict[str, tuple] = {}
    for cand in candidates:
        pas = []
        for ref in referenced_names(cand.expr):
            if ref in names:
                pas.append(ref)
            elif ref in declared_noises:
                if cand.noise is not None and ref != cand.noise:
                    diagnostics.append(
                        NoiseCardinalityViolation(cand.name, f"references foreign noise '{ref}'")
                    )
            else:
                diagnostics.append(UnknownReference(ref, cand.where()))
        parent_map[cand.name] = tuple(pas)

    for cand in candidates:
        if cand.inverse is None:
            continue
        allowed = {cand.name, *parent_map[cand.name]}
        for ref in referenced_names(cand.inverse):
            if ref not in allowed:
                diagnostics.append(UnknownReference(ref, cand.where("inverse")))

    graph = nx.DiGraph()
    graph.add_nodes_from(c.name for c in candidates)
    for child, pas in parent_map.items():
        graph.add_edges_from((p, child) for p in pas)
    for component in nx.strongly_connected_components(graph):
        nodes = sorted(component, key=[c.name for c in candidates].index)
        if len(nodes) > 1 or graph.has_edge(nodes[0], nodes[0]):
            cycle = nx.find_cycle(graph.subgraph(nodes), source=nodes[0])
            diagnostics.append(CycleDetected([u for u, _ in cycle] + [cycle[0][0]]))

    if diagnostics:
        return None

    index = {c.name: i for i, c in enumerate(candidates)}
    order = tuple(nx.lexicographical_topological_sort(graph, key=index.__getitem__))
    variables = tuple(
        Variable(c.name, c.expr, noise_of[c.name], c.distribution, c.inverse) for c in candidates
    )
    for var in variables:
        if var.inverse is not None:
            mismatch = _probe_inverse(var, parent_map[var.name])
            if mismatch:
                diagnostics.append(mismatch)
    return Scm(variables, order, parent_map)


def _probe_inverse(var: Variable, pas: tuple) -> Optional[InverseMismatch]:
    """Check inverse(forward(pa, u), pa) == u on seeded probe points"""
    rng = np.random.default_rng(0)
    parent_draws = rng.normal(0.0, 1.0, size=(INVERSE_PROBES, len(pas)))
    noise_draws = var.distribution.sample(rng, INVERSE_PROBES)
    for row, u in zip(parent_draws, noise_draws):
        values = dict(zip(pas, row))
        values[var.noise] = u
        try:
            v = evaluate_scalar(var.expr, values)
            values[var.name] = v
            recovered = evaluate_scalar(var.inverse, values)
        except EvaluationError:
            continue
        if not math.isclose(recovered, u, rel_tol=0.0, abs_tol=INVERSE_TOLERANCE * max(1.0, abs(u))):
            return InverseMismatch(var.name, float(u), recovered)
    return None
