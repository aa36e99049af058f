"""
Subcommand handlers. Each returns (query echo, result dict, diagnostics dict);
``run_command`` wraps them into the output envelope and maps errors to exit codes.
"""
import sys
from typing import Any, Callable, Dict, TextIO, Tuple

import structlog

import config
from abduction.methods import Exact as ExactAbduction, Mcmc, Method, Rejection, Update
from cli.output import envelope, error_envelope, to_json, write
from dsl.formatter import format_model, to_document
from dsl.parser import load_model
from inference.association import Exact, MonteCarlo, association_query
from inference.sampling import forward_batch, sample_noise_columns
from intervention.queries import ace, intervention_query
from orchestrator.ici_orchestrator import IceRequest, IciOrchestrator, IndividualQuery
from scm.errors import ParseFailed, ScmError, ValidationFailed
from scm.model import Scm
from utils.parallel import generator

logger = structlog.get_logger(__name__)

# exit codes
OK = 0
DOMAIN_ERROR = 1
USAGE_ERROR = 2


class UsageError(Exception):
    """Bad invocation that argparse cannot see, e.g. an unreadable model file"""


def read_model_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "rb") as f:
            return f.read().decode("utf-8", errors="replace")
    except OSError as e:
        raise UsageError(f"cannot read model {path!r}: {e.strerror}") from None


def error_dict(error: ScmError) -> Dict[str, Any]:
    """Aggregates report the code of their first diagnostic; the full list stays in details"""
    out = error.to_dict()
    if isinstance(error, (ValidationFailed, ParseFailed)) and error.diagnostics:
        out["aggregate"] = error.code
        out["code"] = error.diagnostics[0].code
    return out


def _workers(args) -> int:
    return args.workers if getattr(args, "workers", None) else config.WORKERS


def _engine(args, scm: Scm):
    if args.engine is None:
        finite = scm.is_finite_support and scm.joint_state_bound() <= config.STATE_CAP
        name = "exact" if finite else "mc"
    else:
        name = args.engine
    if name == "exact":
        return Exact(order_heuristic=args.order)
    return MonteCarlo(
        n=args.n or config.MC_SAMPLES,
        seed=args.seed,
        epsilon=args.epsilon or config.EVIDENCE_WINDOW,
        shards=args.shards,
        workers=_workers(args),
    )


def _method(args) -> Method:
    if args.method == "exact":
        return ExactAbduction()
    if args.method == "update":
        return Update(baseline=args.baseline, weights=args.weights, tolerance=args.tolerance)
    if args.method == "rejection":
        return Rejection(
            n=args.n or config.MC_SAMPLES,
            epsilon=args.abduction_epsilon,
            max_proposals=args.max_proposals or config.MAX_PROPOSALS,
            shards=args.shards,
            workers=_workers(args),
        )
    return Mcmc(
        n=args.n or config.MC_SAMPLES,
        burnin=args.burnin,
        h=args.h,
        proposal_scale=args.proposal_scale,
        chains=args.chains or config.MCMC_CHAINS,
        workers=_workers(args),
    )


def _validate(args, scm: Scm):
    result = {
        "valid": True,
        "variables": scm.names,
        "order": list(scm.order),
        "parents": {name: list(scm.parent_map[name]) for name in scm.names},
        "noises": {v.noise: {"distribution": v.distribution.name, "params": list(v.distribution.params())}
                   for v in scm.variables},
        "finite_support": scm.is_finite_support,
        "formatted": format_model(to_document(scm)),
    }
    return {}, result, {}


def _assoc(args, scm: Scm):
    engine = _engine(args, scm)
    result = association_query(scm, args.target, args.evidence, engine)
    query = {"targets": args.target, "evidence": args.evidence, "engine": engine.describe()}
    return query, result.to_dict(args.samples), {"engine": engine.name}


def _do(args, scm: Scm):
    engine = _engine(args, scm)
    result = intervention_query(scm, args.target, args.do, args.evidence, engine)
    query = {"targets": args.target, "do": args.do, "evidence": args.evidence, "engine": engine.describe()}
    return query, result.to_dict(args.samples), {"engine": engine.name}


def _orchestrator(args, scm: Scm) -> IciOrchestrator:
    epsilon = getattr(args, "epsilon", None) or config.EVIDENCE_WINDOW
    return IciOrchestrator(scm, epsilon=epsilon)


def _abduction_query(args, method: Method) -> Dict[str, Any]:
    return {"facts": args.facts, "method": method.describe(), "seed": args.seed}


def _indiv(args, scm: Scm):
    method = _method(args)
    orchestrator = _orchestrator(args, scm)
    q = IndividualQuery(args.facts, args.do, tuple(args.target), args.evidence, method, args.seed)
    result = orchestrator.query(q)
    abduced = orchestrator.abduce(q.facts, q.method, q.seed)
    query = {**_abduction_query(args, method), "targets": args.target, "do": args.do, "evidence": args.evidence}
    return query, result.to_dict(args.samples), {"abduction": abduced.kind, **abduced.diagnostics}


def _ice(args, scm: Scm):
    method = _method(args)
    orchestrator = _orchestrator(args, scm)
    r = IceRequest(args.facts, tuple(args.target), args.do1, args.do2, method, args.seed)
    result = orchestrator.ice(r)
    abduced = orchestrator.abduce(r.facts, r.method, r.seed)
    query = {**_abduction_query(args, method), "targets": args.target, "do1": args.do1, "do2": args.do2}
    return query, result.to_dict(args.samples), {"abduction": abduced.kind, **abduced.diagnostics}


def _abduce(args, scm: Scm):
    method = _method(args)
    abduced = _orchestrator(args, scm).abduce(args.facts, method, args.seed)
    return _abduction_query(args, method), abduced.to_dict(args.samples), dict(abduced.diagnostics)


def _alternatives(args, scm: Scm):
    method = _method(args)
    orchestrator = _orchestrator(args, scm)
    results = orchestrator.alternatives(args.facts, args.vary, args.values, args.target, method, args.seed)
    abduced = orchestrator.abduce(args.facts, method, args.seed)
    result = {"alternatives": [
        {"variable": args.vary, "value": value, "result": r.to_dict(args.samples)} for value, r in results
    ]}
    query = {**_abduction_query(args, method), "targets": args.target, "vary": args.vary, "values": args.values}
    return query, result, {"abduction": abduced.kind, **abduced.diagnostics}


def _ace(args, scm: Scm):
    engine = _engine(args, scm)
    result = ace(scm, args.target, args.do1, args.do2, engine, args.seed)
    query = {"targets": args.target, "do1": args.do1, "do2": args.do2, "engine": engine.describe()}
    return query, result.to_dict(args.samples), {"engine": engine.name}


HANDLERS: Dict[str, Callable[[Any, Scm], Tuple[dict, dict, dict]]] = {
    "validate": _validate,
    "query assoc": _assoc,
    "query do": _do,
    "query indiv": _indiv,
    "ice": _ice,
    "abduce": _abduce,
    "alternatives": _alternatives,
    "ace": _ace,
}


def command_name(args) -> str:
    return f"query {args.kind}" if args.command == "query" else args.command


def _sample(args, scm: Scm, stdout: TextIO):
    n = args.n or 1
    columns = sample_noise_columns(scm, generator(args.seed), n)
    values = forward_batch(scm, columns)
    for i in range(n):
        row = {name: float(values[name][i]) for name in scm.names}
        if args.format == "json":
            stdout.write(to_json(row) + "\n")
        else:
            stdout.write(" ".join(f"{name}={row[name]!r}" for name in scm.names) + "\n")


def run_command(args, stdout: TextIO) -> int:
    """Execute parsed arguments; domain errors become a structured error document and exit 1"""
    name = command_name(args)
    echo: Dict[str, Any] = {"command": name, "model": args.model}
    logger.info("[CLI] running", command=name, model=args.model)
    try:
        scm = load_model(read_model_text(args.model))
        if name == "sample":
            _sample(args, scm, stdout)
            return OK
        query, result, diagnostics = HANDLERS[name](args, scm)
    except ScmError as e:
        logger.info("[CLI] domain error", command=name, code=e.code)
        write(error_envelope(echo, error_dict(e)), args.format, stdout)
        return DOMAIN_ERROR

    echo.update(query)
    write(envelope(echo, result, diagnostics), args.format, stdout)
    return OK
