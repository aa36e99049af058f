"""
Rendering of command results as JSON documents or plain text.
"""
import json
from typing import Any, Dict, Iterable, TextIO

from dsl.document import DSL_VERSION


def to_json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True)


def envelope(query: Dict[str, Any], result: Dict[str, Any], diagnostics: Dict[str, Any]) -> Dict[str, Any]:
    return {"query": query, "result": result, "diagnostics": diagnostics, "version": DSL_VERSION}


def error_envelope(query: Dict[str, Any], error: Dict[str, Any]) -> Dict[str, Any]:
    return {"query": query, "error": error, "version": DSL_VERSION}


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _text_result(result: Dict[str, Any]) -> Iterable[str]:
    kind = result.get("kind")
    if kind == "point":
        for name, value in result["value"].items():
            yield f"{name} = {_fmt(value)}"
    elif kind == "pmf":
        yield "P(" + ", ".join(result["targets"]) + ")"
        for row, p in zip(result["support"], result["probs"]):
            yield "  (" + ", ".join(_fmt(v) for v in row) + f")  {p:.6g}"
    elif kind == "empirical":
        yield f"{result['n']} samples"
        for name, s in result["summary"].items():
            q = s["quantiles"]
            yield (f"  {name}: mean {_fmt(s['mean'])}  std {_fmt(s['std'])}  "
                   f"[q05 {_fmt(q['q05'])}, q50 {_fmt(q['q50'])}, q95 {_fmt(q['q95'])}]")
    elif kind == "deterministic":
        for name, value in result["u_star"].items():
            yield f"{name} = {_fmt(value)}"
    elif kind == "posterior":
        yield f"{result['n']} posterior draws over " + ", ".join(result["noises"])
    else:
        for key, value in sorted(result.items()):
            yield f"{key}: {_fmt(value)}"
    if "mean_difference" in result:
        for name, value in result["mean_difference"].items():
            yield f"mean difference {name}: {_fmt(value)}"


def write(payload: Dict[str, Any], fmt: str, stream: TextIO):
    if fmt == "json":
        stream.write(to_json(payload) + "\n")
        return

    if "error" in payload:
        error = payload["error"]
        stream.write(f"error [{error['code']}]: {error['message']}\n")
        for diagnostic in error.get("details", {}).get("diagnostics", []):
            stream.write(f"  [{diagnostic['code']}] {diagnostic['message']}\n")
        return

    result = payload["result"]
    if "alternatives" in result:
        for entry in result["alternatives"]:
            stream.write(f"{entry['variable']} = {_fmt(entry['value'])}:\n")
            for line in _text_result(entry["result"]):
                stream.write(f"  {line}\n")
    else:
        for line in _text_result(result):
            stream.write(line + "\n")
    for key, value in sorted(payload.get("diagnostics", {}).items()):
        if isinstance(value, dict):
            value = ", ".join(f"{k}={_fmt(v)}" for k, v in value.items())
        elif isinstance(value, list):
            value = ", ".join(map(str, value))
        stream.write(f"# {key}: {_fmt(value)}\n")
