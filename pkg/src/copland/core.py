"""Copland phrase AST with event-id annotation."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Union

Place = int


class Sp(enum.Enum):
    """Evidence selector for one side of a branch."""

    ALL = "ALL"
    NONE = "NONE"


class SplitSpec(NamedTuple):
    left: Sp
    right: Sp


class Range(NamedTuple):
    """Half-open interval ``[lo, hi)`` of event ids."""

    lo: int
    hi: int


# --- plain phrases -------------------------------------------------------


@dataclass(frozen=True)
class Asp:
    asp_id: int
    args: tuple[str, ...]
    place: Place
    target: int

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Cpy:
    pass


@dataclass(frozen=True)
class Sig:
    pass


@dataclass(frozen=True)
class Hsh:
    pass


@dataclass(frozen=True)
class At:
    place: Place
    body: Phrase


@dataclass(frozen=True)
class LSeq:
    left: Phrase
    right: Phrase


@dataclass(frozen=True)
class BSeq:
    split: SplitSpec
    left: Phrase
    right: Phrase


@dataclass(frozen=True)
class BPar:
    split: SplitSpec
    left: Phrase
    right: Phrase


Prim = Union[Asp, Cpy, Sig, Hsh]
Phrase = Union[Asp, Cpy, Sig, Hsh, At, LSeq, BSeq, BPar]
PRIMITIVES = (Asp, Cpy, Sig, Hsh)


# --- annotated phrases ---------------------------------------------------
# Each annotated node carries the id range of every event it produces.


@dataclass(frozen=True)
class APrim:
    rng: Range
    prim: Prim


@dataclass(frozen=True)
class AAt:
    rng: Range
    place: Place
    body: AnnoPhrase


@dataclass(frozen=True)
class ALSeq:
    rng: Range
    left: AnnoPhrase
    right: AnnoPhrase


@dataclass(frozen=True)
class ABSeq:
    rng: Range
    split: SplitSpec
    left: AnnoPhrase
    right: AnnoPhrase


@dataclass(frozen=True)
class ABPar:
    rng: Range
    split: SplitSpec
    left: AnnoPhrase
    right: AnnoPhrase


AnnoPhrase = Union[APrim, AAt, ALSeq, ABSeq, ABPar]


def annotate(t: Phrase, start: int = 0) -> tuple[AnnoPhrase, int]:
    """Label every event of ``t`` with a unique id starting at ``start``.

    Returns the annotated term and the next unused id. Primitives take one
    id; ``@`` reserves its first id for the request and its last for the
    reply; branches reserve their first id for the split and their last
    for the join. Linear sequencing takes no id of its own.
    """
    if start < 0:
        raise ValueError("event ids are naturals")
    match t:
        case Asp() | Cpy() | Sig() | Hsh():
            return APrim(Range(start, start + 1), t), start + 1
        case At(q, body):
            abody, nxt = annotate(body, start + 1)
            return AAt(Range(start, nxt + 1), q, abody), nxt + 1
        case LSeq(l, r):
            al, mid = annotate(l, start)
            ar, nxt = annotate(r, mid)
            return ALSeq(Range(start, nxt), al, ar), nxt
        case BSeq(sp, l, r) | BPar(sp, l, r):
            al, mid = annotate(l, start + 1)
            ar, nxt = annotate(r, mid)
            cls = ABSeq if isinstance(t, BSeq) else ABPar
            return cls(Range(start, nxt + 1), sp, al, ar), nxt + 1
    raise TypeError(f"not a phrase: {t!r}")


def unanno(at: AnnoPhrase) -> Phrase:
    match at:
        case APrim(_, prim):
            return prim
        case AAt(_, q, body):
            return At(q, unanno(body))
        case ALSeq(_, l, r):
            return LSeq(unanno(l), unanno(r))
        case ABSeq(_, sp, l, r):
            return BSeq(sp, unanno(l), unanno(r))
        case ABPar(_, sp, l, r):
            return BPar(sp, unanno(l), unanno(r))
    raise TypeError(f"not an annotated phrase: {at!r}")


def range_of(at: AnnoPhrase) -> Range:
    return at.rng


def well_formed(at: AnnoPhrase) -> bool:
    """True iff ``at`` is exactly what :func:`annotate` builds from its own root id."""
    try:
        lo = at.rng.lo
        return annotate(unanno(at), lo)[0] == at
    except (AttributeError, TypeError, ValueError):
        return False


def size(t: Phrase) -> int:
    """Number of events a run of ``t`` produces."""
    match t:
        case Asp() | Cpy() | Sig() | Hsh():
            return 1
        case At(_, body):
            return size(body) + 2
        case LSeq(l, r):
            return size(l) + size(r)
        case BSeq(_, l, r) | BPar(_, l, r):
            return size(l) + size(r) + 2
    raise TypeError(f"not a phrase: {t!r}")


def depth(t: Phrase) -> int:
    match t:
        case At(_, body):
            return 1 + depth(body)
        case LSeq(l, r) | BSeq(_, l, r) | BPar(_, l, r):
            return 1 + max(depth(l), depth(r))
    return 1


def places(t: Phrase) -> set[Place]:
    """Places at which some part of ``t`` executes (not counting the start place)."""
    match t:
        case At(q, body):
            return {q} | places(body)
        case LSeq(l, r) | BSeq(_, l, r) | BPar(_, l, r):
            return places(l) | places(r)
    return set()
