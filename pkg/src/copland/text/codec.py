"""Canonical tagged-tree encoding.

Every node is a JSON object whose first key ``"k"`` names the constructor,
followed by the constructor's fields in declaration order. Output carries
no insignificant whitespace and escapes non-ASCII, so equal values always
produce identical bytes; signatures and hashes are computed over it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Any, Callable

from .. import core, events
from .. import evidence as ev
from .errors import ParseError

# field kinds: how one dataclass attribute maps to a JSON value
NAT, INT, STR, BITS, STRS, RANGE, SPLIT, BOOL = (
    "nat", "int", "str", "bits", "strs", "range", "split", "bool",
)


@dataclass(frozen=True)
class Node:
    """Field kind for a nested encoded value of the given family."""

    family: str


@dataclass(frozen=True)
class Nodes:
    family: str


@dataclass(frozen=True)
class NatMap:
    """Field kind for a dict keyed by naturals; encoded as sorted ``[key, value]`` pairs."""

    value: Any


@dataclass(frozen=True)
class _Entry:
    cls: type
    tag: str
    family: str
    kinds: tuple
    check: Callable | None = None


_BY_CLS: dict[type, _Entry] = {}
_BY_TAG: dict[str, _Entry] = {}


def register(cls: type, tag: str, family: str, validate: Callable | None = None, **kinds) -> None:
    """Make dataclass ``cls`` encodable under ``tag``.

    ``kinds`` maps every field name to its field kind; ``validate`` may reject
    a decoded value by raising ``ValueError``.
    """
    names = [f.name for f in fields(cls)]
    if sorted(names) != sorted(kinds):
        raise ValueError(f"{cls.__name__}: field kinds do not match fields")
    if tag in _BY_TAG and _BY_TAG[tag].cls is not cls:
        raise ValueError(f"duplicate tag {tag}")
    entry = _Entry(cls, tag, family, tuple((n, kinds[n]) for n in names), validate)
    _BY_CLS[cls] = entry
    _BY_TAG[tag] = entry


def family_of(value: Any) -> str | None:
    if isinstance(value, tuple) and all(type(x) in _BY_CLS for x in value):
        if all(_BY_CLS[type(x)].family == "event" for x in value):
            return "trace"
    entry = _BY_CLS.get(type(value))
    return entry.family if entry else None


# --- encoding ------------------------------------------------------------


def _to_obj(v: Any) -> Any:
    if isinstance(v, tuple) and type(v) not in _BY_CLS and family_of(v) == "trace":
        return {"k": "TRACE", "events": [_to_obj(x) for x in v]}
    entry = _BY_CLS.get(type(v))
    if entry is None:
        raise TypeError(f"cannot encode {type(v).__name__}")
    obj: dict[str, Any] = {"k": entry.tag}
    for name, kind in entry.kinds:
        obj[name] = _field_to_obj(getattr(v, name), kind)
    return obj


def _field_to_obj(x: Any, kind: Any) -> Any:
    if kind in (NAT, INT, STR, BOOL):
        return x
    if kind == BITS:
        return bytes(x).hex()
    if kind == STRS:
        return list(x)
    if kind == RANGE:
        return [x.lo, x.hi]
    if kind == SPLIT:
        return [x.left.value, x.right.value]
    if isinstance(kind, Node):
        return _to_obj(x)
    if isinstance(kind, Nodes):
        return [_to_obj(y) for y in x]
    if isinstance(kind, NatMap):
        return [[k, _field_to_obj(x[k], kind.value)] for k in sorted(x)]
    raise AssertionError(kind)


def to_json(v: Any) -> str:
    return json.dumps(_to_obj(v), separators=(",", ":"), ensure_ascii=True)


def encode(v: Any) -> bytes:
    """Canonical bytes for any registered value, traces included."""
    return to_json(v).encode("ascii")


# --- decoding ------------------------------------------------------------


class _Bad(Exception):
    def __init__(self, expected: str, found: Any):
        self.expected = expected
        self.found = found


def _found(x: Any) -> str:
    s = json.dumps(x) if not isinstance(x, str) else repr(x)
    return s if len(s) <= 40 else s[:37] + "..."


def _nat(x: Any) -> int:
    if type(x) is not int or x < 0:
        raise _Bad("natural number", _found(x))
    return x


def _field_from_obj(x: Any, kind: Any) -> Any:
    if kind == NAT:
        return _nat(x)
    if kind == INT:
        if type(x) is not int:
            raise _Bad("integer", _found(x))
        return x
    if kind == BOOL:
        if type(x) is not bool:
            raise _Bad("boolean", _found(x))
        return x
    if kind == STR:
        if not isinstance(x, str):
            raise _Bad("string", _found(x))
        return x
    if kind == BITS:
        if not isinstance(x, str) or x != x.lower():
            raise _Bad("lowercase hex string", _found(x))
        try:
            return bytes.fromhex(x)
        except ValueError:
            raise _Bad("lowercase hex string", _found(x)) from None
    if kind == STRS:
        if not isinstance(x, list) or not all(isinstance(s, str) for s in x):
            raise _Bad("list of strings", _found(x))
        return tuple(x)
    if kind == RANGE:
        if not isinstance(x, list) or len(x) != 2:
            raise _Bad("[lo, hi] range", _found(x))
        lo, hi = _nat(x[0]), _nat(x[1])
        if lo >= hi:
            raise _Bad("range with lo < hi", _found(x))
        return core.Range(lo, hi)
    if kind == SPLIT:
        names = {s.value for s in core.Sp}
        if not isinstance(x, list) or len(x) != 2 or not all(s in names for s in x):
            raise _Bad('split pair of "ALL"/"NONE"', _found(x))
        return core.SplitSpec(core.Sp(x[0]), core.Sp(x[1]))
    if isinstance(kind, Node):
        return _from_obj(x, kind.family)
    if isinstance(kind, Nodes):
        if not isinstance(x, list):
            raise _Bad("list", _found(x))
        return tuple(_from_obj(y, kind.family) for y in x)
    if isinstance(kind, NatMap):
        if not isinstance(x, list) or not all(isinstance(p, list) and len(p) == 2 for p in x):
            raise _Bad("list of [key, value] pairs", _found(x))
        keys = [_nat(k) for k, _ in x]
        if keys != sorted(set(keys)):
            raise _Bad("strictly increasing keys", _found(keys))
        return {k: _field_from_obj(v, kind.value) for k, v in x}
    raise AssertionError(kind)


def _from_obj(obj: Any, family: str | None = None) -> Any:
    if not isinstance(obj, dict):
        raise _Bad("object", _found(obj))
    if "k" not in obj:
        raise _Bad('constructor tag "k"', _found(obj))
    tag = obj["k"]
    if tag == "TRACE":
        if family not in (None, "trace"):
            raise _Bad(f"{family} node", "TRACE")
        if set(obj) != {"k", "events"}:
            raise _Bad("TRACE fields [events]", _found(sorted(obj)))
        return _field_from_obj(obj["events"], Nodes("event"))
    entry = _BY_TAG.get(tag) if isinstance(tag, str) else None
    if entry is None:
        raise _Bad("known constructor tag", _found(tag))
    if family is not None and entry.family != family:
        raise _Bad(f"{family} node", tag)
    want = {"k"} | {n for n, _ in entry.kinds}
    if set(obj) != want:
        raise _Bad(f"{tag} fields {sorted(want - {'k'})}", _found(sorted(obj)))
    kw = {n: _field_from_obj(obj[n], kind) for n, kind in entry.kinds}
    try:
        value = entry.cls(**kw)
        if entry.check is not None:
            entry.check(value)
        return value
    except (TypeError, ValueError) as exc:
        raise _Bad(f"valid {tag}", str(exc)) from None


def decode(b: bytes | str, family: str | None = None) -> Any:
    """Inverse of :func:`encode`. Raises :class:`ParseError` on bad input."""
    if isinstance(b, bytes):
        try:
            text = b.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError((1, exc.start + 1), "UTF-8 text", "invalid byte") from None
    else:
        text = b
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError((exc.lineno, exc.colno), "JSON value", exc.msg) from None
    try:
        return _from_obj(obj, family)
    except _Bad as bad:
        raise ParseError((1, 1), bad.expected, str(bad.found)) from None
    except RecursionError:
        raise ParseError((1, 1), "bounded nesting", "too deep") from None


def register_all(specs: list[tuple[type, str, str, dict]]) -> None:
    for cls, tag, family, kinds in specs:
        register(cls, tag, family, **kinds)


def _prim_only(at: core.APrim) -> None:
    if not isinstance(at.prim, core.PRIMITIVES):
        raise ValueError("APRIM must wrap ASP, CPY, SIG or HSH")


_P, _A, _E, _V, _S = Node("phrase"), Node("anno"), Node("evidence"), Node("event"), Node("evsys")

register_all([
    (core.Asp, "ASP", "phrase", dict(asp_id=NAT, args=STRS, place=NAT, target=NAT)),
    (core.Cpy, "CPY", "phrase", {}),
    (core.Sig, "SIG", "phrase", {}),
    (core.Hsh, "HSH", "phrase", {}),
    (core.At, "AT", "phrase", dict(place=NAT, body=_P)),
    (core.LSeq, "LSEQ", "phrase", dict(left=_P, right=_P)),
    (core.BSeq, "BSEQ", "phrase", dict(split=SPLIT, left=_P, right=_P)),
    (core.BPar, "BPAR", "phrase", dict(split=SPLIT, left=_P, right=_P)),
    (core.AAt, "AAT", "anno", dict(rng=RANGE, place=NAT, body=_A)),
    (core.ALSeq, "ALSEQ", "anno", dict(rng=RANGE, left=_A, right=_A)),
    (core.ABSeq, "ABSEQ", "anno", dict(rng=RANGE, split=SPLIT, left=_A, right=_A)),
    (core.ABPar, "ABPAR", "anno", dict(rng=RANGE, split=SPLIT, left=_A, right=_A)),
    (ev.Mt, "MT", "evidence", {}),
    (ev.U, "U", "evidence", dict(asp_id=NAT, args=STRS, place=NAT, bits=BITS, sub=_E)),
    (ev.G, "G", "evidence", dict(bits=BITS, sub=_E)),
    (ev.H, "H", "evidence", dict(bits=BITS)),
    (ev.N, "N", "evidence", dict(nonce_id=NAT, bits=BITS, sub=_E)),
    (ev.SS, "SS", "evidence", dict(left=_E, right=_E)),
    (ev.PP, "PP", "evidence", dict(left=_E, right=_E)),
    (events.Copy, "COPY", "event", dict(id=NAT, place=NAT)),
    (events.Meas, "MEAS", "event",
     dict(id=NAT, place=NAT, asp_id=NAT, args=STRS, host=NAT, target=NAT)),
    (events.Sign, "SIGN", "event", dict(id=NAT, place=NAT)),
    (events.Hash, "HASH", "event", dict(id=NAT, place=NAT)),
    (events.Split, "SPLIT", "event", dict(id=NAT, place=NAT)),
    (events.Join, "JOIN", "event", dict(id=NAT, place=NAT)),
    (events.Req, "REQ", "event", dict(id=NAT, src=NAT, dst=NAT, body=_P)),
    (events.Rpy, "RPY", "event", dict(id=NAT, src=NAT, dst=NAT)),
    (events.Leaf, "LEAF", "evsys", dict(event=_V)),
    (events.Before, "BEFORE", "evsys", dict(left=_S, right=_S)),
    (events.Merge, "MERGE", "evsys", dict(left=_S, right=_S)),
])
register(core.APrim, "APRIM", "anno", validate=_prim_only, rng=RANGE, prim=_P)
