"""JSON formats for elements, parameter matrices, generator tables and multi-sequences.

Element: {"p":P,"n":N,"terms":[{"x":[..],"d":[..],"c":C},...]} with terms in
canonical order and 1 <= C < P.  Inside the container formats an element may
also be written as an expression string.
"""

from __future__ import annotations

import json
from typing import Any

from ..descent import Descent, MultiSequence
from ..field import FieldError, check_prime
from ..frobenius import FrobParams
from ..ring import DiffOp
from .parser import ParseError, parse_element


class FormatError(ValueError):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def element_to_obj(a: DiffOp) -> dict:
    return {"p": a.p, "n": a.n, "terms": [{"x": list(al), "d": list(be), "c": c} for (al, be), c in a.items()]}


def serialize(a: DiffOp) -> str:
    return _dumps(element_to_obj(a))


def _int(v, what: str) -> int:
    if not isinstance(v, int) or isinstance(v, bool):
        raise FormatError(f"{what} must be an integer, got {v!r}")
    return v


def _ring(obj: dict) -> tuple[int, int]:
    if not isinstance(obj, dict):
        raise FormatError("expected a JSON object")
    for key in ("p", "n"):
        if key not in obj:
            raise FormatError(f"missing field {key!r}")
    p = _int(obj["p"], "p")
    n = _int(obj["n"], "n")
    try:
        check_prime(p)
    except FieldError as exc:
        raise FormatError(str(exc)) from None
    if n < 1:
        raise FormatError("n must be >= 1")
    return p, n


def element_from_obj(obj: Any, p: int | None = None, n: int | None = None) -> DiffOp:
    if isinstance(obj, str):
        if p is None or n is None:
            raise FormatError("an expression string needs an enclosing p and n")
        try:
            return parse_element(obj, p, n)
        except ParseError as exc:
            raise FormatError(f"bad expression {obj!r}: {exc}") from None
    ep, en = _ring(obj)
    if (p is not None and ep != p) or (n is not None and en != n):
        raise FormatError(f"element over (p={ep}, n={en}) inside a container over (p={p}, n={n})")
    terms = obj.get("terms")
    if not isinstance(terms, list):
        raise FormatError("'terms' must be a list")
    out = {}
    for t in terms:
        if not isinstance(t, dict) or set(t) != {"x", "d", "c"}:
            raise FormatError(f"term must have exactly the fields x, d, c: {t!r}")
        xs, ds = t["x"], t["d"]
        if not isinstance(xs, list) or not isinstance(ds, list) or len(xs) != en or len(ds) != en:
            raise FormatError(f"exponent vectors must have length {en}: {t!r}")
        al = tuple(_int(v, "exponent") for v in xs)
        be = tuple(_int(v, "exponent") for v in ds)
        if any(v < 0 for v in al + be):
            raise FormatError(f"negative exponent in {t!r}")
        c = _int(t["c"], "coefficient")
        if not 1 <= c < ep:
            raise FormatError(f"coefficient {c} outside [1, {ep})")
        if (al, be) in out:
            raise FormatError(f"repeated term x={list(al)} d={list(be)}")
        out[(al, be)] = c
    return DiffOp(ep, en, out)


def deserialize(text: str) -> DiffOp:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed JSON: {exc}") from None
    return element_from_obj(obj)


def _header(obj: dict) -> tuple[int, int, int]:
    p, n = _ring(obj)
    s = _int(obj.get("s", 0), "s")
    if s < 0:
        raise FormatError("s must be >= 0")
    return p, n, s


def _table(obj: dict, key: str, p: int, n: int) -> list[list[DiffOp]]:
    rows = obj.get(key)
    if not isinstance(rows, list) or len(rows) != n or not all(isinstance(r, list) for r in rows):
        raise FormatError(f"{key!r} must be a list of {n} lists")
    return [[element_from_obj(e, p, n) for e in row] for row in rows]


def params_to_obj(u: FrobParams) -> dict:
    return {"p": u.p, "n": u.n, "s": u.s, "u": [[element_to_obj(e) for e in row] for row in u.u]}


def params_from_obj(obj: dict) -> FrobParams:
    p, n, s = _header(obj)
    return FrobParams(p, n, s, tuple(tuple(r) for r in _table(obj, "u", p, n)))


def gens_to_obj(p: int, n: int, s: int, gens) -> dict:
    return {"p": p, "n": n, "s": s, "gens": [[element_to_obj(e) for e in row] for row in gens]}


def gens_from_obj(obj: dict) -> tuple[int, int, int, list[list[DiffOp]]]:
    p, n, s = _header(obj)
    return p, n, s, _table(obj, "gens", p, n)


def sequence_to_obj(seq: MultiSequence) -> dict:
    return {
        "p": seq.p,
        "n": seq.n,
        "s": seq.s,
        "box": list(seq.box),
        "sequence": [{"index": list(a), "element": element_to_obj(e)} for a, e in seq.items()],
    }


def sequence_from_obj(obj: dict) -> MultiSequence:
    p, n, s = _header(obj)
    box = obj.get("box")
    if not isinstance(box, list) or len(box) != n:
        raise FormatError(f"'box' must be a list of {n} integers")
    box = [_int(b, "box") for b in box]
    entries = obj.get("sequence")
    if not isinstance(entries, list):
        raise FormatError("'sequence' must be a list")
    elements = {}
    for e in entries:
        if not isinstance(e, dict) or "index" not in e or "element" not in e:
            raise FormatError("sequence entries need 'index' and 'element'")
        idx = tuple(_int(v, "index") for v in e["index"])
        elements[idx] = element_from_obj(e["element"], p, n)
    return MultiSequence(p, n, box, elements, s)


def load_descent_like(obj: dict) -> Descent | MultiSequence:
    """A generator table ({"gens": ...}) or an explicit multi-sequence ({"sequence": ...})."""
    if "gens" in obj:
        p, n, s, gens = gens_from_obj(obj)
        return Descent(p, n, gens, s)
    if "sequence" in obj:
        return sequence_from_obj(obj)
    raise FormatError("expected a 'gens' table or a 'sequence'")


dumps = _dumps
