"""Copland compiler and virtual machine.

``compile`` turns an annotated phrase into a flat instruction sequence;
``run_cvm`` executes it over a :class:`CvmState`. Remote requests run the
requested phrase in a separate CVM at the target place; parallel branches
run in two sub-CVMs sharing the caller's store, and their traces are
merged by a seeded interleaving.
"""

from __future__ import annotations

import enum
import hashlib
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from .core import (
    AAt,
    ABPar,
    ABSeq,
    ALSeq,
    APrim,
    AnnoPhrase,
    Asp,
    Place,
    Prim,
    SplitSpec,
    unanno,
    well_formed,
)
from .events import Event, Join, Req, Rpy, Split, prim_event
from .evidence import PP, SS, Evidence, Provider, apply_prim, split_evidence


class CvmErrorKind(enum.Enum):
    UNKNOWN_PLACE = "UnknownPlace"
    STORE_MISS = "StoreMiss"
    PROVIDER_FAILURE = "ProviderFailure"


class CvmError(Exception):
    def __init__(self, kind: CvmErrorKind, detail: str):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind.value}: {detail}")


class StoreOverlapError(AssertionError):
    """Parallel branches were given overlapping store slots."""


@dataclass
class CvmState:
    ev: Evidence
    trace: list = field(default_factory=list)
    pl: Place = 0
    store: dict = field(default_factory=dict)

    def copy(self) -> CvmState:
        return CvmState(self.ev, list(self.trace), self.pl, dict(self.store))


# --- registry ------------------------------------------------------------


@dataclass(frozen=True)
class PlaceEntry:
    """What one attestation place offers: a provider and, optionally, the ASPs it hosts."""

    provider: Provider
    asps: frozenset | None = None


class PlaceRegistry:
    def __init__(self, places: Mapping[Place, PlaceEntry]):
        self.places = dict(places)

    @classmethod
    def uniform(cls, places, provider: Provider) -> PlaceRegistry:
        return cls({p: PlaceEntry(provider) for p in places})

    def __contains__(self, place: Place) -> bool:
        return place in self.places

    def entry(self, place: Place) -> PlaceEntry:
        try:
            return self.places[place]
        except KeyError:
            raise CvmError(CvmErrorKind.UNKNOWN_PLACE, f"place {place} is not registered") from None

    def provider(self, place: Place) -> Provider:
        return self.entry(place).provider


# --- instructions --------------------------------------------------------


@dataclass(frozen=True)
class DoPrim:
    id: int
    prim: Prim


@dataclass(frozen=True)
class SendReq:
    body: AnnoPhrase
    place: Place
    reqi: int


@dataclass(frozen=True)
class DoRemote:
    body: AnnoPhrase
    place: Place
    reqi: int
    rpyi: int


@dataclass(frozen=True)
class ReceiveResp:
    rpyi: int
    place: Place


@dataclass(frozen=True)
class SplitEv:
    """Split the current evidence and store the halves at ``slots``."""

    id: int
    split: SplitSpec
    slots: tuple[int, int]


@dataclass(frozen=True)
class RunBranchSeq:
    left: tuple
    right: tuple
    inputs: tuple[int, int]
    join_id: int


@dataclass(frozen=True)
class RunBranchPar:
    """Run both branches in sub-CVMs; ``slots`` is (in1, out1, in2, out2)."""

    left: tuple
    right: tuple
    slots: tuple[int, int, int, int]
    join_id: int


Instr = Union[DoPrim, SendReq, DoRemote, ReceiveResp, SplitEv, RunBranchSeq, RunBranchPar]


def compile(at: AnnoPhrase, check: bool = True) -> tuple[Instr, ...]:  # noqa: A001
    """Translate an annotated phrase into CVM instructions.

    ``check=False`` skips the well-formedness test; only useful for
    exercising the runtime store checks on hand-built annotations.
    """
    if check and not well_formed(at):
        raise ValueError("compile requires a well-formed annotated phrase")
    return tuple(_compile(at))


def _compile(at: AnnoPhrase) -> list[Instr]:
    match at:
        case APrim(rng, prim):
            return [DoPrim(rng.lo, prim)]
        case AAt(rng, q, body):
            reqi, rpyi = rng.lo, rng.hi - 1
            return [SendReq(body, q, reqi), DoRemote(body, q, reqi, rpyi), ReceiveResp(rpyi, q)]
        case ALSeq(_, l, r):
            return _compile(l) + _compile(r)
        case ABSeq(rng, sp, l, r):
            inputs = (l.rng.lo, r.rng.lo)
            return [
                SplitEv(rng.lo, sp, inputs),
                RunBranchSeq(tuple(_compile(l)), tuple(_compile(r)), inputs, rng.hi - 1),
            ]
        case ABPar(rng, sp, l, r):
            # each branch result goes to the slot named by its last event id
            slots = (l.rng.lo, l.rng.hi - 1, r.rng.lo, r.rng.hi - 1)
            return [
                SplitEv(rng.lo, sp, (slots[0], slots[2])),
                RunBranchPar(tuple(_compile(l)), tuple(_compile(r)), slots, rng.hi - 1),
            ]
    raise TypeError(f"not an annotated phrase: {at!r}")


# --- execution -----------------------------------------------------------


def interleave(tr1: Sequence[Event], tr2: Sequence[Event], seed: int) -> list[Event]:
    """Seeded merge of two traces preserving each one's order; seed 0 concatenates."""
    ids1 = {e.id for e in tr1}
    clash = ids1 & {e.id for e in tr2}
    if clash:
        raise ValueError(f"traces share event ids {sorted(clash)}")
    if seed == 0:
        return list(tr1) + list(tr2)
    n = len(tr1) + len(tr2)
    picks = set(random.Random(seed).sample(range(n), len(tr1)))
    it1, it2 = iter(tr1), iter(tr2)
    return [next(it1) if i in picks else next(it2) for i in range(n)]


def branch_seed(seed: int, node_id: int) -> int:
    if seed == 0:
        return 0
    digest = hashlib.sha256(f"{seed}:{node_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big") or 1


def check_store_slots(slots: tuple[int, int, int, int]) -> None:
    """The two branches of a parallel split must not share store slots."""
    in1, out1, in2, out2 = slots
    if {in1, out1} & {in2, out2}:
        raise StoreOverlapError(f"parallel store slots overlap: {slots}")


class Cvm:
    """One CVM configuration: place registry plus scheduling policy."""

    def __init__(self, registry: PlaceRegistry, seed: int = 0, threads: bool = False):
        self.registry = registry
        self.seed = seed
        self.threads = threads

    def run(self, prog: Sequence[Instr], st: CvmState) -> CvmState:
        self.registry.entry(st.pl)
        out = st.copy()
        self.exec(prog, out)
        return out

    def exec(self, prog: Sequence[Instr], st: CvmState) -> None:
        for ins in prog:
            self.step(ins, st)

    def load(self, st: CvmState, key: int) -> Evidence:
        try:
            return st.store[key]
        except KeyError:
            raise CvmError(CvmErrorKind.STORE_MISS, f"store index {key} is empty") from None

    def step(self, ins: Instr, st: CvmState) -> None:
        match ins:
            case DoPrim(i, prim):
                st.trace.append(prim_event(prim, i, st.pl))
                st.ev = self.prim(i, prim, st)
            case SendReq(body, q, reqi):
                st.store[reqi] = st.ev
                st.trace.append(Req(reqi, st.pl, q, unanno(body)))
            case DoRemote(body, q, reqi, rpyi):
                self.registry.entry(q)
                remote = CvmState(self.load(st, reqi), [], q, {})
                self.exec(compile(body), remote)
                st.trace.extend(remote.trace)
                st.store[rpyi] = remote.ev
            case ReceiveResp(rpyi, q):
                st.ev = self.load(st, rpyi)
                st.trace.append(Rpy(rpyi, st.pl, q))
            case SplitEv(i, sp, (k1, k2)):
                e1, e2 = split_evidence(sp, st.ev)
                st.store[k1] = e1
                st.store[k2] = e2
                st.trace.append(Split(i, st.pl))
            case RunBranchSeq(left, right, (k1, k2), join_id):
                st.ev = self.load(st, k1)
                self.exec(left, st)
                e1r = st.ev
                st.ev = self.load(st, k2)
                self.exec(right, st)
                st.ev = SS(e1r, st.ev)
                st.trace.append(Join(join_id, st.pl))
            case RunBranchPar(left, right, slots, join_id):
                self.par(left, right, slots, join_id, st)
            case _:
                raise TypeError(f"not an instruction: {ins!r}")

    def prim(self, i: int, prim: Prim, st: CvmState) -> Evidence:
        entry = self.registry.entry(st.pl)
        if isinstance(prim, Asp) and entry.asps is not None and prim.asp_id not in entry.asps:
            raise CvmError(
                CvmErrorKind.PROVIDER_FAILURE,
                f"place {st.pl} does not offer ASP {prim.asp_id}",
            )
        try:
            return apply_prim(prim, i, st.pl, st.ev, entry.provider)
        except Exception as exc:
            raise CvmError(CvmErrorKind.PROVIDER_FAILURE, f"event {i}: {exc}") from exc

    def par(self, left, right, slots, join_id, st: CvmState) -> None:
        check_store_slots(slots)
        in1, out1, in2, out2 = slots
        subs = [
            CvmState(self.load(st, in1), [], st.pl, st.store),
            CvmState(self.load(st, in2), [], st.pl, st.store),
        ]

        def branch(prog, sub, out):
            self.exec(prog, sub)
            sub.store[out] = sub.ev

        jobs = [(left, subs[0], out1), (right, subs[1], out2)]
        if self.threads:
            with ThreadPoolExecutor(max_workers=2) as pool:
                for fut in [pool.submit(branch, *job) for job in jobs]:
                    fut.result()
        else:
            for job in jobs:
                branch(*job)
        st.trace.extend(interleave(subs[0].trace, subs[1].trace, branch_seed(self.seed, join_id)))
        st.ev = PP(self.load(st, out1), self.load(st, out2))
        st.trace.append(Join(join_id, st.pl))


def run_cvm(
    prog: Sequence[Instr],
    st: CvmState,
    registry: PlaceRegistry,
    seed: int = 0,
    threads: bool = False,
) -> CvmState:
    """Execute ``prog`` from ``st``; the input state is left untouched.

    Raises :class:`CvmError` on misconfiguration, discarding all effects.
    """
    return Cvm(registry, seed, threads).run(prog, st)
