"""Attestation events and the Event Systems that order them.

An Event System is a tree of ``Leaf``/``Before``/``Merge`` nodes denoting a
strict partial order on events. ``Before`` puts everything on its left
ahead of everything on its right; ``Merge`` lets its two sides interleave
freely while keeping each side's internal order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .core import (
    AAt,
    ABPar,
    ABSeq,
    ALSeq,
    APrim,
    AnnoPhrase,
    Asp,
    Cpy,
    Hsh,
    Phrase,
    Place,
    Sig,
    unanno,
    well_formed,
)

# --- events --------------------------------------------------------------


@dataclass(frozen=True)
class Copy:
    id: int
    place: Place


@dataclass(frozen=True)
class Meas:
    id: int
    place: Place
    asp_id: int
    args: tuple[str, ...]
    host: Place
    target: int

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Sign:
    id: int
    place: Place


@dataclass(frozen=True)
class Hash:
    id: int
    place: Place


@dataclass(frozen=True)
class Split:
    id: int
    place: Place


@dataclass(frozen=True)
class Join:
    id: int
    place: Place


@dataclass(frozen=True)
class Req:
    id: int
    src: Place
    dst: Place
    body: Phrase


@dataclass(frozen=True)
class Rpy:
    id: int
    src: Place
    dst: Place


Event = Union[Copy, Meas, Sign, Hash, Split, Join, Req, Rpy]
Trace = tuple  # tuple[Event, ...]


def prim_event(prim: Phrase, event_id: int, place: Place) -> Event:
    match prim:
        case Cpy():
            return Copy(event_id, place)
        case Asp(asp_id, args, host, target):
            return Meas(event_id, place, asp_id, args, host, target)
        case Sig():
            return Sign(event_id, place)
        case Hsh():
            return Hash(event_id, place)
    raise TypeError(f"not a primitive: {prim!r}")


# --- event systems -------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    event: Event


@dataclass(frozen=True)
class Before:
    left: EventSystem
    right: EventSystem


@dataclass(frozen=True)
class Merge:
    left: EventSystem
    right: EventSystem


EventSystem = Union[Leaf, Before, Merge]


def ev_sys(at: AnnoPhrase, p: Place) -> EventSystem:
    """Event System of annotated phrase ``at`` started at place ``p``."""
    if not well_formed(at):
        raise ValueError("ev_sys requires a well-formed annotated phrase")
    return _ev_sys(at, p)


def _ev_sys(at: AnnoPhrase, p: Place) -> EventSystem:
    match at:
        case APrim(rng, prim):
            return Leaf(prim_event(prim, rng.lo, p))
        case AAt(rng, q, body):
            req = Leaf(Req(rng.lo, p, q, unanno(body)))
            rpy = Leaf(Rpy(rng.hi - 1, p, q))
            return Before(req, Before(_ev_sys(body, q), rpy))
        case ALSeq(_, l, r):
            return Before(_ev_sys(l, p), _ev_sys(r, p))
        case ABSeq(rng, _, l, r) | ABPar(rng, _, l, r):
            inner = Before if isinstance(at, ABSeq) else Merge
            split = Leaf(Split(rng.lo, p))
            join = Leaf(Join(rng.hi - 1, p))
            return Before(split, Before(inner(_ev_sys(l, p), _ev_sys(r, p)), join))
    raise TypeError(f"not an annotated phrase: {at!r}")


def events_of(es: EventSystem) -> frozenset:
    out: set = set()
    stack = [es]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            out.add(node.event)
        else:
            stack.append(node.left)
            stack.append(node.right)
    return frozenset(out)


def earlier(es: EventSystem, v: Event, w: Event) -> bool:
    """Does ``v`` strictly precede ``w`` in the order denoted by ``es``?"""
    evs = events_of(es)
    if v not in evs or w not in evs:
        raise ValueError("both events must belong to the event system")
    return _earlier(es, v, w)


def _earlier(es: EventSystem, v: Event, w: Event) -> bool:
    if isinstance(es, Leaf):
        return False
    lv = v in events_of(es.left)
    lw = w in events_of(es.left)
    if lv and lw:
        return _earlier(es.left, v, w)
    if not lv and not lw:
        return _earlier(es.right, v, w)
    return isinstance(es, Before) and lv


def ordered_pairs(es: EventSystem) -> set[tuple[Event, Event]]:
    """Every ``(v, w)`` with ``earlier(es, v, w)``."""
    if isinstance(es, Leaf):
        return set()
    pairs = ordered_pairs(es.left) | ordered_pairs(es.right)
    if isinstance(es, Before):
        pairs |= set(itertools.product(events_of(es.left), events_of(es.right)))
    return pairs


TRACE_ORACLE_LIMIT = 10


def traces_of(es: EventSystem) -> set[Trace]:
    """Brute-force enumeration of every linearization of ``es``."""
    n = len(events_of(es))
    if n > TRACE_ORACLE_LIMIT:
        raise ValueError(f"{n} events exceeds the oracle limit of {TRACE_ORACLE_LIMIT}")
    return _traces(es)


def _traces(es: EventSystem) -> set[Trace]:
    if isinstance(es, Leaf):
        return {(es.event,)}
    lefts, rights = _traces(es.left), _traces(es.right)
    if isinstance(es, Before):
        return {a + b for a in lefts for b in rights}
    return {m for a in lefts for b in rights for m in interleavings(a, b)}


def interleavings(a: Sequence, b: Sequence) -> Iterable[tuple]:
    """All merges of ``a`` and ``b`` preserving the order within each."""
    n = len(a) + len(b)
    for slots in itertools.combinations(range(n), len(a)):
        chosen = set(slots)
        ia, ib = iter(a), iter(b)
        yield tuple(next(ia) if i in chosen else next(ib) for i in range(n))


def count_traces(es: EventSystem) -> int:
    """Number of linearizations, without enumerating them."""

    def go(node):
        if isinstance(node, Leaf):
            return 1, 1
        nl, cl = go(node.left)
        nr, cr = go(node.right)
        ways = cl * cr
        if isinstance(node, Merge):
            ways *= math.comb(nl + nr, nl)
        return nl + nr, ways

    return go(es)[1]


def is_trace(es: EventSystem, c: Sequence[Event]) -> bool:
    """Polynomial membership test: is ``c`` a linearization of ``es``?

    ``c`` must contain each event of ``es`` exactly once, and at every
    ``Before`` node the last position used on the left must precede the
    first position used on the right.
    """
    pos = {}
    for i, ev in enumerate(c):
        if ev in pos:
            return False
        pos[ev] = i
    if set(pos) != events_of(es):
        return False

    def span(node):
        # (first, last) positions, or None once an ordering is violated
        if isinstance(node, Leaf):
            i = pos[node.event]
            return i, i
        left = span(node.left)
        if left is None:
            return None
        right = span(node.right)
        if right is None:
            return None
        if isinstance(node, Before) and left[1] >= right[0]:
            return None
        return min(left[0], right[0]), max(left[1], right[1])

    return span(es) is not None
