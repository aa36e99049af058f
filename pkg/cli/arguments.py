"""
Command-line grammar.

Assignments use ``NAME=VALUE[,NAME=VALUE]*`` with decimal values; nothing on
the command line is evaluated as an expression.
"""
import argparse
import math
import re
from typing import Dict, List

import config
from abduction.methods import METHOD_NAMES
from inference.factors import HEURISTICS

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _number(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return value


def assignments(text: str) -> Dict[str, float]:
    """Parse ``X=1,Y=2.5`` into {"X": 1.0, "Y": 2.5}"""
    out: Dict[str, float] = {}
    for part in text.split(","):
        name, sep, value = part.strip().partition("=")
        name = name.strip()
        if not sep or not _NAME_RE.match(name):
            raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {part.strip()!r}")
        if name in out:
            raise argparse.ArgumentTypeError(f"{name} assigned twice")
        out[name] = _number(value.strip())
    return out


def names(text: str) -> List[str]:
    out = [part.strip() for part in text.split(",")]
    for name in out:
        if not _NAME_RE.match(name):
            raise argparse.ArgumentTypeError(f"not a variable name: {name!r}")
    return out


def values(text: str) -> List[float]:
    return [_number(part.strip()) for part in text.split(",")]


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return value


def positive_float(text: str) -> float:
    value = _number(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0: {text!r}")
    return value


def seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer seed: {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 bits: {text!r}")
    return value


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("model", help="model file (.scm.txt), or - for stdin")
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug logs on stderr")


def _sampling(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=seed, default=0)
    parser.add_argument("-n", type=positive_int, default=None, help=f"sample count (default {config.MC_SAMPLES})")
    parser.add_argument("--workers", type=positive_int, default=None,
                        help="threads for sharded sampling (default SCM_ICI_WORKERS)")
    parser.add_argument("--shards", type=positive_int, default=1,
                        help="seed substreams; results depend on this, never on --workers")
    parser.add_argument("--samples", action="store_true", help="include raw samples in the output")


def _engine(parser: argparse.ArgumentParser):
    parser.add_argument("--engine", choices=("exact", "mc"), default=None,
                        help="default: exact for small finite-support models, else mc")
    parser.add_argument("--epsilon", type=positive_float, default=None,
                        help=f"evidence window for continuous variables (default {config.EVIDENCE_WINDOW})")
    parser.add_argument("--order", choices=HEURISTICS, default="min-degree", help="elimination order heuristic")


def _method(parser: argparse.ArgumentParser):
    parser.add_argument("--facts", type=assignments, required=True, help="observed values W, e.g. X=1,Y=10")
    parser.add_argument("--method", choices=METHOD_NAMES, default="exact")
    parser.add_argument("--baseline", type=assignments, default=None, help="update: reference noise values")
    parser.add_argument("--weights", type=assignments, default=None, help="update: per-noise distance weights")
    parser.add_argument("--tolerance", type=positive_float, default=1e-6, help="update: fact residual tolerance")
    parser.add_argument("--abduction-epsilon", dest="abduction_epsilon", type=positive_float, default=None,
                        help="rejection: acceptance window (default 1%% of prior-predictive std)")
    parser.add_argument("--max-proposals", dest="max_proposals", type=positive_int, default=None)
    parser.add_argument("--h", type=positive_float, default=None, help="mcmc: kernel bandwidth")
    parser.add_argument("--burnin", type=int, default=None, help="mcmc: discarded draws per chain")
    parser.add_argument("--proposal-scale", dest="proposal_scale", type=positive_float, default=0.5)
    parser.add_argument("--chains", type=positive_int, default=None,
                        help="mcmc: chain count (default SCM_ICI_MCMC_CHAINS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scm-ici",
        description="Association, intervention and individual causal queries on structural causal models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model and print its structure")
    _common(p)

    p = sub.add_parser("sample", help="forward samples as JSON lines")
    _common(p)
    _sampling(p)

    query = sub.add_parser("query", help="assoc, do or indiv query")
    kinds = query.add_subparsers(dest="kind", required=True)

    p = kinds.add_parser("assoc", help="P(Y | Z)")
    _common(p)
    p.add_argument("--target", type=names, required=True)
    p.add_argument("--evidence", type=assignments, default={})
    _engine(p)
    _sampling(p)

    p = kinds.add_parser("do", help="P(Y | do(X), Z)")
    _common(p)
    p.add_argument("--target", type=names, required=True)
    p.add_argument("--do", type=assignments, required=True)
    p.add_argument("--evidence", type=assignments, default={})
    _engine(p)
    _sampling(p)

    p = kinds.add_parser("indiv", help="P(Y | indiv(W), do(X), Z)")
    _common(p)
    p.add_argument("--target", type=names, required=True)
    p.add_argument("--do", type=assignments, required=True)
    p.add_argument("--evidence", type=assignments, default={})
    p.add_argument("--epsilon", type=positive_float, default=None,
                   help=f"window applied to evidence Z (default {config.EVIDENCE_WINDOW})")
    _method(p)
    _sampling(p)

    p = sub.add_parser("ice", help="individual causal effect Y(do1) - Y(do2)")
    _common(p)
    p.add_argument("--target", type=names, required=True)
    p.add_argument("--do1", type=assignments, required=True)
    p.add_argument("--do2", type=assignments, required=True)
    _method(p)
    _sampling(p)

    p = sub.add_parser("abduce", help="infer the individual's noise from facts")
    _common(p)
    _method(p)
    _sampling(p)

    p = sub.add_parser("alternatives", help="one abduction, several values of one intervention")
    _common(p)
    p.add_argument("--target", type=names, required=True)
    p.add_argument("--vary", required=True, help="variable to intervene on")
    p.add_argument("--values", type=values, required=True, help="comma list of do values")
    _method(p)
    _sampling(p)

    p = sub.add_parser("ace", help="population average effect E[Y | do1] - E[Y | do2]")
    _common(p)
    p.add_argument("--target", type=names, required=True)
    p.add_argument("--do1", type=assignments, required=True)
    p.add_argument("--do2", type=assignments, required=True)
    _engine(p)
    _sampling(p)

    return parser
