"""
Configuration for the SCM inference engine

This config file contains only environment variables and their defaults.
Library functions take explicit keyword arguments that default to these
values; the CLI flags override them per run.
"""
import os
from dotenv import load_dotenv

# Load environment variables from .env file - THIS IS THE ONLY PLACE WE DO THIS
load_dotenv()

_malformed = []


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        _malformed.append(f"{name}={raw!r} (expected integer)")
        return default
    if value < minimum:
        _malformed.append(f"{name}={raw!r} (expected >= {minimum})")
        return default
    return value


def _float_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        _malformed.append(f"{name}={raw!r} (expected number)")
        return default
    if not value > 0:
        _malformed.append(f"{name}={raw!r} (expected > 0)")
        return default
    return value


###################
# ENV VARIABLES   #
###################

# Parallelism
WORKERS = _int_env('SCM_ICI_WORKERS', 1)
MCMC_CHAINS = _int_env('SCM_ICI_MCMC_CHAINS', 1)

# Exact inference
STATE_CAP = _int_env('SCM_ICI_STATE_CAP', 1_000_000)

# Monte Carlo
MC_SAMPLES = _int_env('SCM_ICI_MC_SAMPLES', 10_000)
EVIDENCE_WINDOW = _float_env('SCM_ICI_EVIDENCE_WINDOW', 1e-3)

# Abduction
MAX_PROPOSALS = _int_env('SCM_ICI_MAX_PROPOSALS', 10_000_000)
UPDATE_COMBINATIONS = _int_env('SCM_ICI_UPDATE_COMBINATIONS', 4096)

# Logging
LOG_LEVEL = os.getenv('SCM_ICI_LOG_LEVEL', 'WARNING').upper()

if LOG_LEVEL not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
    _malformed.append(f"SCM_ICI_LOG_LEVEL={LOG_LEVEL!r}")
    LOG_LEVEL = 'WARNING'


def check():
    """
    Raise ValueError naming every malformed variable. Import never fails:
    malformed values fall back to their defaults and are only reported here.
    """
    if _malformed:
        raise ValueError(f"Malformed environment variables: {', '.join(_malformed)}")
