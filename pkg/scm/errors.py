"""
Error hierarchy shared by every package.

Each error carries a stable ``code`` for machine-readable output and a
``details()`` dict with its structured fields.
"""
from typing import Any, Dict, List, Optional, Sequence


class ScmError(Exception):
    """Base class for all domain errors"""

    code = "scm_error"

    def details(self) -> Dict[str, Any]:
        return {}

    def to_dict(self) -> Dict[str, Any]:
        return {"code": self.code, "message": str(self), "details": self.details()}


###################
# MODEL / DSL     #
###################

class CycleDetected(ScmError):
    code = "cycle_detected"

    def __init__(self, path: Sequence[str]):
        self.path = list(path)
        super().__init__(f"Cycle detected: {' -> '.join(self.path)}")

    def details(self):
        return {"path": self.path}


class NoiseCardinalityViolation(ScmError):
    code = "noise_cardinality_violation"

    def __init__(self, var: str, reason: str):
        self.var = var
        self.reason = reason
        super().__init__(f"Noise pairing violated for '{var}': {reason}")

    def details(self):
        return {"var": self.var, "reason": self.reason}


class UnknownReference(ScmError):
    code = "unknown_reference"

    def __init__(self, name: str, location: str):
        self.name = name
        self.location = location
        super().__init__(f"Unknown name '{name}' referenced in {location}")

    def details(self):
        return {"name": self.name, "location": self.location}


class BadDistributionParams(ScmError):
    code = "bad_distribution_params"

    def __init__(self, noise: str, reason: str):
        self.noise = noise
        self.reason = reason
        super().__init__(f"Bad parameters for noise '{noise}': {reason}")

    def details(self):
        return {"noise": self.noise, "reason": self.reason}


class DuplicateName(ScmError):
    code = "duplicate_name"

    def __init__(self, name: str, reason: str = "declared more than once"):
        self.name = name
        self.reason = reason
        super().__init__(f"Name '{name}' {reason}")

    def details(self):
        return {"name": self.name, "reason": self.reason}


class InverseMismatch(ScmError):
    code = "inverse_mismatch"

    def __init__(self, var: str, expected: float, got: float):
        self.var = var
        self.expected = expected
        self.got = got
        super().__init__(
            f"Inverse for '{var}' does not recover its noise: expected {expected!r}, got {got!r}"
        )

    def details(self):
        return {"var": self.var, "expected": self.expected, "got": self.got}


class ValidationFailed(ScmError):
    code = "validation_failed"

    def __init__(self, diagnostics: List[ScmError]):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"{len(self.diagnostics)} validation error(s): {summary}")

    def details(self):
        return {"diagnostics": [d.to_dict() for d in self.diagnostics]}


class DslSyntaxError(ScmError):
    code = "syntax_error"

    def __init__(self, span, expected: str, found: Optional[str] = None):
        self.span = span
        self.expected = expected
        self.found = found
        where = f"line {span.line}, column {span.column}"
        got = f", found {found!r}" if found is not None else ""
        super().__init__(f"Syntax error at {where}: expected {expected}{got}")

    def details(self):
        return {"span": self.span.to_dict(), "expected": self.expected, "found": self.found}


class UnknownDistribution(ScmError):
    code = "unknown_distribution"

    def __init__(self, span, name: str):
        self.span = span
        self.name = name
        super().__init__(f"Unknown distribution '{name}' at line {span.line}, column {span.column}")

    def details(self):
        return {"span": self.span.to_dict(), "name": self.name}


class ParseFailed(ScmError):
    code = "parse_failed"

    def __init__(self, diagnostics: List[ScmError]):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"{len(self.diagnostics)} parse error(s): {summary}")

    def details(self):
        return {"diagnostics": [d.to_dict() for d in self.diagnostics]}


###################
# EVALUATION      #
###################

class UnknownVariable(ScmError):
    code = "unknown_variable"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unknown variable '{name}'")

    def details(self):
        return {"name": self.name}


class EvaluationError(ScmError):
    code = "evaluation_error"

    def __init__(self, var: Optional[str], cause: str):
        self.var = var
        self.cause = cause
        where = f" while evaluating '{var}'" if var else ""
        super().__init__(f"Evaluation failed{where}: {cause}")

    def details(self):
        return {"var": self.var, "cause": self.cause}


class InvalidQuery(ScmError):
    code = "invalid_query"

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"Invalid query: {reason}")

    def details(self):
        return {"reason": self.reason}


###################
# INFERENCE       #
###################

class NotFiniteSupport(ScmError):
    code = "not_finite_support"

    def __init__(self, noises: Sequence[str]):
        self.noises = list(noises)
        super().__init__(f"Exact inference needs finite-support noise; continuous: {', '.join(self.noises)}")

    def details(self):
        return {"noises": self.noises}


class SupportTooLarge(ScmError):
    code = "support_too_large"

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"Joint support of {size} states exceeds cap {cap}")

    def details(self):
        return {"size": self.size, "cap": self.cap}


class ZeroProbabilityEvidence(ScmError):
    code = "zero_probability_evidence"

    def __init__(self, evidence: Dict[str, float], reason: str = "evidence has zero probability"):
        self.evidence = dict(evidence)
        self.reason = reason
        super().__init__(f"{reason}: {self.evidence}")

    def details(self):
        return {"evidence": self.evidence, "reason": self.reason}


###################
# ABDUCTION       #
###################

class PartialObservation(ScmError):
    code = "partial_observation"

    def __init__(self, missing: Sequence[str]):
        self.missing = list(missing)
        super().__init__(f"Exact abduction needs every variable observed; missing: {', '.join(self.missing)}")

    def details(self):
        return {"missing": self.missing}


class NotInvertible(ScmError):
    code = "not_invertible"

    def __init__(self, var: str):
        self.var = var
        super().__init__(f"Equation for '{var}' has no declared or derivable inverse")

    def details(self):
        return {"var": self.var}


class NoFeasiblePoint(ScmError):
    code = "no_feasible_point"

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(f"No noise values reproduce the facts: residual {residual:.3g} > {tolerance:.3g}")

    def details(self):
        return {"residual": self.residual, "tolerance": self.tolerance}


class NonFiniteObjective(ScmError):
    code = "non_finite_objective"

    def __init__(self, where: str):
        self.where = where
        super().__init__(f"Objective is not finite at {where}")

    def details(self):
        return {"where": self.where}


class BudgetExhausted(ScmError):
    code = "budget_exhausted"

    def __init__(self, accepted: int, n_proposed: int, partial=None):
        self.accepted = accepted
        self.n_proposed = n_proposed
        self.partial = partial
        super().__init__(f"Proposal budget exhausted: {accepted} accepted of {n_proposed} proposed")

    def details(self):
        return {"accepted": self.accepted, "n_proposed": self.n_proposed}


class DegenerateChain(ScmError):
    code = "degenerate_chain"

    def __init__(self, acceptance_rate: float, reason: str = "acceptance rate below 0.1%"):
        self.acceptance_rate = acceptance_rate
        self.reason = reason
        super().__init__(f"Degenerate MCMC chain ({reason}): acceptance rate {acceptance_rate:.4g}")

    def details(self):
        return {"acceptance_rate": self.acceptance_rate, "reason": self.reason}


class BadBandwidth(ScmError):
    code = "bad_bandwidth"

    def __init__(self, h: float):
        self.h = h
        super().__init__(f"Kernel bandwidth must be positive, got {h!r}")

    def details(self):
        return {"h": self.h}
