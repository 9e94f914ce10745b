"""Process definition documents (JSON) and built-in process shorthands."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

from .dwell import dwell_from_dict
from .errors import DomainError, ParseError
from .process import EeHsmm, Transition, build_example_process, build_poisson_process, validate

TOP_KEYS = {"modes", "alphabet", "transitions"}
EDGE_KEYS = {"from", "to", "symbol", "prob", "dwell"}


def model_to_dict(model: EeHsmm) -> dict[str, Any]:
    return {
        "modes": list(model.modes),
        "alphabet": list(model.alphabet),
        "transitions": [
            {
                "from": model.modes[t.source],
                "to": model.modes[t.target],
                "symbol": model.alphabet[t.symbol],
                "prob": t.prob,
                "dwell": t.dwell.to_dict(),
            }
            for t in model.transitions
        ],
    }


def dumps_model(model: EeHsmm) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def model_hash(model: EeHsmm) -> str:
    """Short SHA-256 of the canonical JSON form; stable across runs and platforms."""
    canon = json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _index(labels: list[str], value: Any, what: str, where: str) -> int:
    if isinstance(value, bool):
        raise ParseError(f"{where}: {what} must be a label or index")
    if isinstance(value, int):
        if 0 <= value < len(labels):
            return value
        raise ParseError(f"{where}: {what} index {value} out of range")
    if isinstance(value, str) and value in labels:
        return labels.index(value)
    raise ParseError(f"{where}: unknown {what} {value!r}")


def model_from_dict(doc: Any, check: bool = True) -> EeHsmm:
    """Build a model from a parsed document; with ``check`` invalid models raise ParseError."""
    if not isinstance(doc, dict):
        raise ParseError("process definition must be a JSON object")
    extra = set(doc) - TOP_KEYS
    if extra:
        raise ParseError(f"unknown top-level field(s): {', '.join(sorted(extra))}")
    missing = TOP_KEYS - set(doc)
    if missing:
        raise ParseError(f"missing field(s): {', '.join(sorted(missing))}")
    modes, alphabet = doc["modes"], doc["alphabet"]
    for name, labels in (("modes", modes), ("alphabet", alphabet)):
        if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
            raise ParseError(f"{name} must be an array of strings")
    if not isinstance(doc["transitions"], list):
        raise ParseError("transitions must be an array")

    edges = []
    for i, rec in enumerate(doc["transitions"]):
        where = f"transitions[{i}]"
        if not isinstance(rec, dict):
            raise ParseError(f"{where}: must be an object")
        extra = set(rec) - EDGE_KEYS
        if extra:
            raise ParseError(f"{where}: unknown field(s): {', '.join(sorted(extra))}")
        missing = EDGE_KEYS - set(rec)
        if missing:
            raise ParseError(f"{where}: missing field(s): {', '.join(sorted(missing))}")
        prob = rec["prob"]
        if isinstance(prob, bool) or not isinstance(prob, (int, float)):
            raise ParseError(f"{where}: prob must be a number")
        if not isinstance(rec["dwell"], dict):
            raise ParseError(f"{where}: dwell must be an object")
        try:
            dwell = dwell_from_dict(rec["dwell"])
        except (DomainError, TypeError, ValueError) as exc:
            raise ParseError(f"{where}: {exc}") from None
        edges.append(
            Transition(
                source=_index(modes, rec["from"], "mode", where),
                target=_index(modes, rec["to"], "mode", where),
                symbol=_index(alphabet, rec["symbol"], "symbol", where),
                prob=float(prob),
                dwell=dwell,
            )
        )
    model = EeHsmm(modes=tuple(modes), alphabet=tuple(alphabet), transitions=tuple(edges))
    if check:
        bad = validate(model)
        if bad:
            err = ParseError("invalid process: " + "; ".join(f"[{v.code}] {v.message}" for v in bad))
            err.violations = bad
            raise err
    return model


def loads_model(text: str, check: bool = True) -> EeHsmm:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return model_from_dict(doc, check=check)


def load_model(path: str | Path, check: bool = True) -> EeHsmm:
    return loads_model(Path(path).read_text(), check=check)


def resolve_source(source: str) -> EeHsmm:
    """Resolve ``example:TFix,TBrk``, ``poisson:scale`` or a path to a process file."""
    if source.startswith("example:"):
        try:
            t_fix, t_brk = (float(v) for v in source[len("example:"):].split(","))
        except ValueError:
            raise ParseError(f"expected example:TFix,TBrk, got {source!r}") from None
        return build_example_process(t_fix, t_brk)
    if source.startswith("poisson:"):
        try:
            scale = float(source[len("poisson:"):])
        except ValueError:
            raise ParseError(f"expected poisson:scale, got {source!r}") from None
        return build_poisson_process(scale)
    path = Path(source)
    if not path.is_file():
        raise ParseError(f"no such process file: {source}")
    return load_model(path)
