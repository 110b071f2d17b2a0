"""Model serialization: canonical JSON, qbsolv-style .qubo text, and edge lists.

Numbers are written as integers when integral and as the shortest
round-tripping decimal otherwise, so export -> import -> export is
byte-identical.
"""

from __future__ import annotations

import json
import math

from .constraint_spec import spec_from_dict
from .errors import FormatError, SpecError
from .network import Role
from .qubo import QuboModel, Variable

_ROLE_NAMES = {Role.ORIGINAL: "original", Role.AUXILIARY: "auxiliary", Role.SLACK: "slack"}
_ROLES_BY_NAME = {v: k for k, v in _ROLE_NAMES.items()}


def format_number(value) -> str:
    value = float(value)
    if not math.isfinite(value):
        raise FormatError(f"non-finite coefficient {value}")
    if value.is_integer():
        return str(int(value))
    return repr(value)


def _num(value):
    value = float(value)
    return int(value) if value.is_integer() else value


def model_to_dict(model: QuboModel) -> dict:
    return {
        "spec": model.spec.to_dict() if model.spec is not None else None,
        "lambda": _num(model.lam),
        "variables": [
            {"id": v.id, "label": v.label, "role": _ROLE_NAMES[v.role]} for v in model.variables
        ],
        "linear": {str(i): _num(c) for i, c in sorted(model.linear.items())},
        "quadratic": [[i, j, _num(c)] for (i, j), c in sorted(model.quadratic.items())],
        "offset": _num(model.offset),
    }


def dumps_json(model: QuboModel) -> str:
    return json.dumps(model_to_dict(model), separators=(",", ":"), allow_nan=False) + "\n"


def _number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{what} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise FormatError(f"{what} is not finite")
    return value


def _build_model(variables, linear, quadratic, offset, lam, spec) -> QuboModel:
    nv = len(variables)
    labels = [v.label for v in variables]
    if len(set(labels)) != nv:
        raise FormatError("duplicate variable labels")
    for i, c in linear.items():
        if not 0 <= i < nv:
            raise FormatError(f"linear term on unknown variable {i}")
    for (i, j) in quadratic:
        if not (0 <= i < j < nv):
            raise FormatError(f"quadratic key ({i}, {j}) must satisfy 0 <= i < j < {nv}")
    if not lam > 0:
        raise FormatError("lambda must be positive")
    return QuboModel(
        tuple(variables),
        {i: c for i, c in sorted(linear.items()) if c != 0},
        {k: c for k, c in sorted(quadratic.items()) if c != 0},
        offset,
        lam,
        spec,
    )


def model_from_dict(data) -> QuboModel:
    if not isinstance(data, dict):
        raise FormatError("model must be a JSON object")
    expected = {"spec", "lambda", "variables", "linear", "quadratic", "offset"}
    if set(data) != expected:
        raise FormatError(f"model fields must be exactly {sorted(expected)}")
    try:
        spec = spec_from_dict(data["spec"]) if data["spec"] is not None else None
    except SpecError as exc:
        raise FormatError(f"bad spec in model: {exc}") from None
    raw_vars = data["variables"]
    if not isinstance(raw_vars, list):
        raise FormatError("variables must be a list")
    variables = []
    for pos, item in enumerate(raw_vars):
        if not isinstance(item, dict) or set(item) != {"id", "label", "role"}:
            raise FormatError(f"variable entry {pos} malformed")
        if item["id"] != pos:
            raise FormatError("variable ids must be 0..N-1 in order")
        if item["role"] not in _ROLES_BY_NAME or not isinstance(item["label"], str):
            raise FormatError(f"variable entry {pos} has bad role or label")
        variables.append(Variable(pos, item["label"], _ROLES_BY_NAME[item["role"]]))
    if not isinstance(data["linear"], dict):
        raise FormatError("linear must be an object")
    linear = {}
    for key, value in data["linear"].items():
        try:
            i = int(key)
        except ValueError:
            raise FormatError(f"linear key {key!r} is not an id") from None
        if str(i) != key:
            raise FormatError(f"linear key {key!r} is not canonical")
        linear[i] = _number(value, f"linear[{key}]")
    if not isinstance(data["quadratic"], list):
        raise FormatError("quadratic must be a list")
    quadratic = {}
    for entry in data["quadratic"]:
        if (not isinstance(entry, list) or len(entry) != 3
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in entry[:2])):
            raise FormatError(f"quadratic entry {entry!r} malformed")
        key = (entry[0], entry[1])
        if key in quadratic:
            raise FormatError(f"duplicate quadratic key {key}")
        quadratic[key] = _number(entry[2], f"quadratic{key}")
    return _build_model(
        variables, linear, quadratic,
        _number(data["offset"], "offset"), _number(data["lambda"], "lambda"), spec,
    )


def loads_json(text: str) -> QuboModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"model is not valid JSON: {exc}") from None
    return model_from_dict(data)


def dumps_qubo(model: QuboModel) -> str:
    """qbsolv-compatible text; labels, roles, lambda, spec and offset ride in comments."""
    lines = ["c qubonet model"]
    if model.spec is not None:
        lines.append("c spec " + json.dumps(model.spec.to_dict(), separators=(",", ":")))
    lines.append(f"c lambda {format_number(model.lam)}")
    lines.append(f"c offset {format_number(model.offset)}")
    for v in model.variables:
        if not v.label or any(ch.isspace() for ch in v.label):
            raise FormatError(f"label {v.label!r} cannot be written to .qubo")
        lines.append(f"c var {v.id} {v.label} {_ROLE_NAMES[v.role]}")
    lines.append(f"p qubo 0 {model.num_variables} {len(model.linear)} {len(model.quadratic)}")
    for i, c in sorted(model.linear.items()):
        lines.append(f"{i} {i} {format_number(c)}")
    for (i, j), c in sorted(model.quadratic.items()):
        lines.append(f"{i} {j} {format_number(c)}")
    return "\n".join(lines) + "\n"


def loads_qubo(text: str) -> QuboModel:
    spec = None
    lam = 1.0
    offset = 0.0
    named = {}
    header = None
    linear: dict = {}
    quadratic: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "c":
                key = parts[1] if len(parts) > 1 else ""
                if key == "spec":
                    spec = spec_from_dict(json.loads(line.split(None, 2)[2]))
                elif key == "lambda":
                    lam = float(parts[2])
                elif key == "offset":
                    offset = float(parts[2])
                elif key == "var":
                    named[int(parts[2])] = (parts[3], _ROLES_BY_NAME[parts[4]])
                continue
            if parts[0] == "p":
                if header is not None or len(parts) != 6 or parts[1] != "qubo":
                    raise FormatError(f"line {lineno}: bad header")
                header = [int(p) for p in parts[2:]]
                continue
            if header is None or len(parts) != 3:
                raise FormatError(f"line {lineno}: entry before header or malformed")
            i, j, c = int(parts[0]), int(parts[1]), float(parts[2])
        except (ValueError, IndexError, KeyError, SpecError, json.JSONDecodeError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: cannot parse {line!r}") from None
        if not math.isfinite(c):
            raise FormatError(f"line {lineno}: non-finite coefficient")
        if i == j:
            if i in linear:
                raise FormatError(f"line {lineno}: duplicate linear term")
            linear[i] = c
        else:
            key = (min(i, j), max(i, j))
            if key in quadratic:
                raise FormatError(f"line {lineno}: duplicate quadratic term")
            quadratic[key] = c
    if header is None:
        raise FormatError("missing 'p qubo' header")
    _, nv, n_lin, n_quad = header
    if n_lin != len(linear) or n_quad != len(quadratic):
        raise FormatError("header counts do not match the entries")
    variables = []
    for i in range(nv):
        label, role = named.get(i, (f"v{i}", Role.ORIGINAL))
        variables.append(Variable(i, label, role))
    return _build_model(variables, linear, quadratic, offset, lam, spec)


def dumps_edgelist(model: QuboModel) -> str:
    """One ``label label coef`` line per quadratic term."""
    labels = model.labels()
    return "".join(f"{labels[i]} {labels[j]} {format_number(c)}\n" for (i, j), c in sorted(model.quadratic.items()))


WRITERS = {"json": dumps_json, "qubo": dumps_qubo, "edgelist": dumps_edgelist}
READERS = {"json": loads_json, "qubo": loads_qubo}


def guess_format(path: str) -> str:
    return "qubo" if path.endswith(".qubo") else "json"
