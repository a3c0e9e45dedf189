"""JSON and CSV serialisation, CLI literal parsing.

Series JSON::

    {"coeffs": [[n, re, im], ...], "truncation": N,
     "tail": {"kind": "exact_polynomial"} |
             {"kind": "truncated_with_bound", "majorant": x, "valid_from": sigma}}

Symbol JSON::

    {"characteristic": c, "part": {"type": "series", "series": {...}}}
    {"characteristic": c, "part": {"type": "periodic", "k": 2,
                                   "map": {"name": "half_strip", "params": {}},
                                   "scale": [re, im], "offset": [re, im]}}
    {"characteristic": c, "part": {"type": "composed", "map": {...},
                                   "inner": {series}, "offset": [re, im]}}
    {"builtin": "example1_not_GA"}
"""
from __future__ import annotations

import ast
import csv
import dataclasses
import json
import math
import operator
import os
import re

import numpy as np

from . import diskmaps
from .errors import PreconditionError
from .series import TailBound, TruncatedDirichletSeries, coefficient_stream
from .symbols import ComposedPart, PeriodicPart, SeriesPart, Symbol, builtin_symbol

__all__ = [
    "parse_complex",
    "format_complex",
    "parse_real_expr",
    "series_to_json",
    "series_from_json",
    "symbol_to_json",
    "symbol_from_json",
    "load_series",
    "load_symbol",
    "to_jsonable",
    "dumps",
    "write_csv",
]


# ---------------------------------------------------------------------------
# literals
# ---------------------------------------------------------------------------

_COMPLEX_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$|^[+-]?((\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)?[ij]$|"
                         r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?[+-]((\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)?[ij]$")


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` style literals (``2``, ``3i``, ``-i``, ``1e-3+2i``; ``j`` also accepted)."""
    raw = str(text).strip().replace(" ", "")
    if not raw or not _COMPLEX_RE.match(raw):
        raise PreconditionError(f"cannot parse complex literal {text!r}; expected a+bi")
    body = raw.replace("i", "j")
    if body[-1] == "j" and (len(body) == 1 or body[-2] in "+-"):
        body = body[:-1] + "1j"
    try:
        return complex(body)
    except ValueError:
        raise PreconditionError(f"cannot parse complex literal {text!r}; expected a+bi") from None


def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"log": math.log, "sqrt": math.sqrt, "exp": math.exp}
_NAMES = {"pi": math.pi, "e": math.e}


def parse_real_expr(text: str) -> float:
    """Evaluate a small arithmetic expression such as ``pi/2`` or ``log(3)``; nothing else is allowed."""
    try:
        tree = ast.parse(str(text).strip(), mode="eval")
    except SyntaxError:
        raise PreconditionError(f"cannot parse expression {text!r}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
                and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise PreconditionError(f"unsupported element in expression {text!r}")

    try:
        return float(ev(tree))
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise PreconditionError(f"cannot evaluate {text!r}: {exc}") from None


# ---------------------------------------------------------------------------
# series and symbols
# ---------------------------------------------------------------------------

def _cpair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _cread(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return parse_complex(v)
    if isinstance(v, (int, float)):
        return complex(v)
    raise PreconditionError(f"cannot read complex value {v!r}")


def series_to_json(f: TruncatedDirichletSeries) -> dict:
    coeffs = [[int(n), float(a.real), float(a.imag)] for n, a in zip(f.indices, f.values)]
    if f.tail is None:
        tail = {"kind": "exact_polynomial"}
    else:
        tail = {"kind": "truncated_with_bound", "majorant": f.tail.majorant, "valid_from": f.tail.valid_from}
    return {"coeffs": coeffs, "truncation": int(f.truncation), "tail": tail}


def series_from_json(obj: dict) -> TruncatedDirichletSeries:
    try:
        rows = obj["coeffs"]
        idx, val = [], []
        for row in rows:
            n = row[0]
            if isinstance(n, float) and not n.is_integer():
                raise PreconditionError(f"index {n} is not an integer")
            idx.append(int(n))
            val.append(complex(float(row[1]), float(row[2]) if len(row) > 2 else 0.0))
        trunc = obj.get("truncation")
        tail_obj = obj.get("tail") or {"kind": "exact_polynomial"}
        kind = tail_obj.get("kind", "exact_polynomial")
        if kind == "exact_polynomial":
            tail = None
        elif kind == "truncated_with_bound":
            tail = TailBound(float(tail_obj["majorant"]), float(tail_obj["valid_from"]))
        else:
            raise PreconditionError(f"unknown tail kind {kind!r}")
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise PreconditionError(f"malformed series JSON: {exc}") from None
    return TruncatedDirichletSeries(idx, val, trunc, tail)


def symbol_to_json(sym: Symbol) -> dict:
    part = sym.part
    if isinstance(part, SeriesPart):
        pj = {"type": "series", "series": series_to_json(part.phi)}
    elif isinstance(part, PeriodicPart):
        pj = {"type": "periodic", "k": part.k, "map": {"name": part.g.name, "params": to_jsonable(part.g.params)},
              "scale": _cpair(part.scale), "offset": _cpair(part.offset)}
    else:
        pj = {"type": "composed", "map": {"name": part.g.name, "params": to_jsonable(part.g.params)},
              "inner": series_to_json(part.inner_series), "offset": _cpair(part.offset)}
    out = {"characteristic": sym.characteristic, "part": pj}
    if sym.label:
        out["label"] = sym.label
    return out


def _map_from_json(m: dict):
    params = {k: (_cread(v) if isinstance(v, list) else v) for k, v in (m.get("params") or {}).items()}
    return diskmaps.disc_map_from_dict(m["name"], params)


def symbol_from_json(obj: dict) -> Symbol:
    if "builtin" in obj:
        return builtin_symbol(obj["builtin"])
    try:
        c = obj["characteristic"]
        pj = obj["part"]
        kind = pj["type"]
        label = obj.get("label", "")
        if kind == "series":
            return Symbol(c, SeriesPart(series_from_json(pj["series"])), label)
        if kind == "periodic":
            part = PeriodicPart(int(pj["k"]), _map_from_json(pj["map"]), _cread(pj.get("scale", 1.0)),
                                _cread(pj.get("offset", 0.0)))
            return Symbol(c, part, label)
        if kind == "composed":
            part = ComposedPart(_map_from_json(pj["map"]), series_from_json(pj["inner"]), _cread(pj.get("offset", 0.0)))
            return Symbol(c, part, label)
    except (KeyError, TypeError) as exc:
        raise PreconditionError(f"malformed symbol JSON: missing {exc}") from None
    raise PreconditionError(f"unknown symbol part type {kind!r}")


def _load_json_arg(arg: str):
    if os.path.exists(arg):
        try:
            with open(arg, encoding="utf-8") as fh:
                return json.load(fh)
        except json.JSONDecodeError as exc:
            raise PreconditionError(f"{arg}: invalid JSON ({exc})") from None
    if arg.lstrip().startswith("{"):
        try:
            return json.loads(arg)
        except json.JSONDecodeError as exc:
            raise PreconditionError(f"invalid inline JSON ({exc})") from None
    return None


def load_series(arg: str) -> TruncatedDirichletSeries:
    """A JSON file, inline JSON, ``algebrab``, or the streams ``zeta:N`` / ``alt:N``.

    The streams are the first ``N`` coefficients of the infinite series with
    a tail bound, so abscissa estimates see them as truncations.
    """
    obj = _load_json_arg(arg)
    if obj is not None:
        return series_from_json(obj)
    name, _, n = arg.partition(":")
    if name in ("zeta", "alt") and n:
        try:
            N = int(n)
        except ValueError:
            raise PreconditionError(f"bad truncation in {arg!r}") from None
        if N < 2:
            raise PreconditionError("a coefficient stream needs N >= 2")
        vals = np.ones(N) if name == "zeta" else (-1.0) ** np.arange(N)
        return coefficient_stream(vals)
    if arg == "algebrab":
        return TruncatedDirichletSeries.from_mapping({2: 0.5, 3: -0.5})
    raise PreconditionError(f"cannot resolve series {arg!r}: not a file, JSON, or known name")


def load_symbol(arg: str) -> Symbol:
    """A JSON file, inline JSON, or a builtin symbol name."""
    obj = _load_json_arg(arg)
    if obj is not None:
        return symbol_from_json(obj)
    return builtin_symbol(arg)


# ---------------------------------------------------------------------------
# generic output
# ---------------------------------------------------------------------------

def to_jsonable(obj):
    """Plain-JSON view: complex -> [re, im], non-finite floats -> strings, dataclasses -> dicts."""
    if isinstance(obj, TruncatedDirichletSeries):
        return series_to_json(obj)
    if isinstance(obj, Symbol):
        return symbol_to_json(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "name") and hasattr(obj, "params"):
        return {"name": obj.name, "params": to_jsonable(obj.params)}
    return repr(obj)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False)


def write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
