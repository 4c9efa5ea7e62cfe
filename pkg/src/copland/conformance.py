"""Executable checks that CVM runs respect the Event System semantics.

``check_refines`` runs a phrase through annotate/compile/run_cvm and
tests the resulting trace and evidence against ``ev_sys`` and
``evaluate``. ``check_cumul`` and ``check_irrel`` test how the initial
trace affects a run. ``run_suite`` drives all of them over generated
phrases.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .core import (
    Asp,
    At,
    BPar,
    BSeq,
    Cpy,
    Hsh,
    LSeq,
    Phrase,
    Place,
    Sig,
    Sp,
    SplitSpec,
    annotate,
    places,
    size,
)
from .cvm import CvmError, CvmState, PlaceRegistry, StoreOverlapError, compile, run_cvm
from .events import (
    TRACE_ORACLE_LIMIT,
    Copy,
    Event,
    Hash,
    Join,
    Meas,
    Rpy,
    Sign,
    Split,
    ev_sys,
    is_trace,
    ordered_pairs,
    traces_of,
)
from .evidence import AbstractProvider, Evidence, Mt, N, evaluate
from .text.codec import BOOL, NAT, STR, Node, Nodes, register

CONSTRUCTORS = ("ASP", "CPY", "SIG", "HSH", "AT", "LSEQ", "BSEQ", "BPAR")
SPLITS = tuple(SplitSpec(a, b) for a in Sp for b in Sp)
ARG_WORDS = ("-r", "--full", "/bin", "/etc/passwd", "db")


@dataclass(frozen=True)
class GenConfig:
    max_depth: int = 4
    max_places: int = 3
    seed: int = 0
    max_asps: int = 4
    max_targets: int = 4

    def __post_init__(self):
        if self.max_depth < 1 or self.max_places < 1:
            raise ValueError("max_depth and max_places must be at least 1")


def gen_phrase(cfg: GenConfig) -> Phrase:
    """Random phrase of depth at most ``cfg.max_depth``; deterministic in ``cfg.seed``."""
    return _gen(random.Random(cfg.seed), cfg, cfg.max_depth)


def _gen(rng: random.Random, cfg: GenConfig, depth: int) -> Phrase:
    kind = rng.choice(CONSTRUCTORS[:4] if depth <= 1 else CONSTRUCTORS)
    if kind == "ASP":
        args = tuple(rng.choice(ARG_WORDS) for _ in range(rng.randrange(3)))
        return Asp(
            rng.randrange(cfg.max_asps), args, rng.randrange(cfg.max_places), rng.randrange(cfg.max_targets)
        )
    if kind == "CPY":
        return Cpy()
    if kind == "SIG":
        return Sig()
    if kind == "HSH":
        return Hsh()
    if kind == "AT":
        return At(rng.randrange(cfg.max_places), _gen(rng, cfg, depth - 1))
    left, right = _gen(rng, cfg, depth - 1), _gen(rng, cfg, depth - 1)
    if kind == "LSEQ":
        return LSeq(left, right)
    split = rng.choice(SPLITS)
    return (BSeq if kind == "BSEQ" else BPar)(split, left, right)


def has_bpar(t: Phrase) -> bool:
    match t:
        case BPar():
            return True
        case At(_, body):
            return has_bpar(body)
        case LSeq(l, r) | BSeq(_, l, r):
            return has_bpar(l) or has_bpar(r)
    return False


def gen_trace(rng: random.Random, n: int, first_id: int, places: int = 3) -> tuple[Event, ...]:
    """Random events with ids ``first_id, first_id + 1, ...``."""
    kinds = [
        lambda i: Copy(i, rng.randrange(places)),
        lambda i: Sign(i, rng.randrange(places)),
        lambda i: Hash(i, rng.randrange(places)),
        lambda i: Split(i, rng.randrange(places)),
        lambda i: Join(i, rng.randrange(places)),
        lambda i: Rpy(i, rng.randrange(places), rng.randrange(places)),
        lambda i: Meas(i, rng.randrange(places), rng.randrange(4), (), rng.randrange(places), 0),
    ]
    return tuple(rng.choice(kinds)(first_id + k) for k in range(n))


# --- runners -------------------------------------------------------------

Runner = Callable[..., CvmState]


def execute(
    t: Phrase,
    p: Place,
    e: Evidence,
    registry: PlaceRegistry,
    seed: int = 0,
    trace: Sequence[Event] = (),
) -> CvmState:
    """Compile ``t`` from id 0 and run it at ``p`` starting from ``trace``."""
    at, _ = annotate(t, 0)
    return run_cvm(compile(at), CvmState(e, list(trace), p, {}), registry, seed)


def default_registry(places: int = 3) -> PlaceRegistry:
    return PlaceRegistry.uniform(range(places), AbstractProvider())


# --- reports -------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class ConformanceReport:
    phrase: Phrase
    place: int
    seed: int
    checks: tuple[Check, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]


def _show(events: Sequence[Event], limit: int = 6) -> str:
    shown = ", ".join(f"{type(v).__name__}({v.id})" for v in events[:limit])
    return f"[{shown}{', ...' if len(events) > limit else ''}]"


def trace_checks(es, c: Sequence[Event], oracle: bool = True) -> list[Check]:
    """Trace membership, pairwise ordering and (for small systems) the brute-force oracle.

    The pairwise check enumerates ``ordered_pairs`` and is deliberately
    independent of ``is_trace``'s span-based test.
    """
    member = is_trace(es, c)
    checks = [Check("is_trace", member, "" if member else _show(c))]
    pos = {v: i for i, v in enumerate(c)}
    bad = [
        (v, w) for v, w in ordered_pairs(es) if v not in pos or w not in pos or pos[v] >= pos[w]
    ]
    detail = ""
    if bad:
        v, w = min(bad, key=lambda vw: (vw[0].id, vw[1].id))
        detail = f"{len(bad)} pairs out of order, e.g. {type(v).__name__}({v.id}) before {type(w).__name__}({w.id})"
    checks.append(Check("ordering", not bad, detail))
    if oracle and len(c) <= 8 and len(pos) <= TRACE_ORACLE_LIMIT:
        found = tuple(c) in traces_of(es)
        checks.append(Check("oracle", found, "" if found else "trace not among enumerated linearizations"))
    return checks


def check_refines(
    t: Phrase,
    p: Place,
    e: Evidence,
    seed: int,
    registry: PlaceRegistry | None = None,
    runner: Runner = execute,
) -> ConformanceReport:
    registry = registry or default_registry(max(p, *_places(t), 2) + 1)
    at, _ = annotate(t, 0)
    es = ev_sys(at, p)
    try:
        st = runner(t, p, e, registry, seed)
    except StoreOverlapError as exc:
        return ConformanceReport(t, p, seed, (Check("store", False, str(exc)),))
    except CvmError as exc:
        return ConformanceReport(t, p, seed, (Check("run", False, str(exc)),))
    checks = trace_checks(es, st.trace)
    expected = evaluate(t, p, e, registry)
    same = st.ev == expected
    checks.append(Check("evidence", same, "" if same else "CVM evidence differs from evaluate"))
    checks.append(Check("place", st.pl == p, "" if st.pl == p else f"ended at {st.pl}"))
    return ConformanceReport(t, p, seed, tuple(checks))


def _places(t: Phrase) -> list[int]:
    return sorted(places(t) | {0})


def check_cumul(
    t: Phrase,
    p: Place,
    e: Evidence,
    m: Sequence[Event],
    k: Sequence[Event],
    registry: PlaceRegistry | None = None,
    seed: int = 0,
    runner: Runner = execute,
) -> Check:
    """Starting from ``m ++ k`` must leave ``m`` in front of the run from ``k``."""
    registry = registry or default_registry(max(p, *_places(t), 2) + 1)
    whole = runner(t, p, e, registry, seed, tuple(m) + tuple(k))
    suffix = runner(t, p, e, registry, seed, tuple(k))
    ok = list(whole.trace) == list(m) + list(suffix.trace)
    return Check("cumulative", ok, "" if ok else f"prefix {len(m)} events not preserved")


def check_irrel(
    t: Phrase,
    p: Place,
    e: Evidence,
    tr1: Sequence[Event],
    tr2: Sequence[Event],
    registry: PlaceRegistry | None = None,
    seed: int = 0,
    runner: Runner = execute,
) -> Check:
    """Apart from the trace itself, the final state must not depend on the initial trace."""
    registry = registry or default_registry(max(p, *_places(t), 2) + 1)
    a = runner(t, p, e, registry, seed, tuple(tr1))
    b = runner(t, p, e, registry, seed, tuple(tr2))
    diffs = [name for name in ("ev", "store", "pl") if getattr(a, name) != getattr(b, name)]
    return Check("trace-irrelevant", not diffs, ", ".join(diffs))


# --- suite ---------------------------------------------------------------


@dataclass(frozen=True)
class SuiteReport:
    count: int
    depth: int
    seed: int
    checks_run: int
    failures: tuple[ConformanceReport, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def gen_initial(rng: random.Random) -> Evidence:
    if rng.random() < 0.5:
        return Mt()
    return N(rng.randrange(3), rng.randbytes(16), Mt())


def case_seed(seed: int, i: int) -> int:
    return seed * 1_000_003 + i


def run_suite(
    count: int = 1000,
    depth: int = 4,
    seed: int = 0,
    n_places: int = 3,
    schedules: int = 3,
    prefix_max: int = 4,
    on_case: Callable[[ConformanceReport], None] | None = None,
) -> SuiteReport:
    """Generate ``count`` phrases and run every conformance check on each.

    Phrases with a parallel branch are run under ``schedules`` distinct
    scheduler seeds, the first being 0 (plain concatenation).
    """
    registry = default_registry(n_places)
    failures = []
    n_checks = 0
    for i in range(count):
        cs = case_seed(seed, i)
        rng = random.Random(cs)
        t = gen_phrase(GenConfig(depth, n_places, cs))
        p = rng.randrange(n_places)
        e = gen_initial(rng)
        sched = [0] + [rng.randrange(1, 2**31) for _ in range(schedules - 1)] if has_bpar(t) else [cs]
        n = size(t)
        for s in sched:
            report = check_refines(t, p, e, s, registry)
            m = gen_trace(rng, rng.randrange(prefix_max + 1), n + 1000, n_places)
            k = gen_trace(rng, rng.randrange(prefix_max + 1), n + 2000, n_places)
            extra = (
                check_cumul(t, p, e, m, k, registry, s),
                check_irrel(t, p, e, (), m + k, registry, s),
            )
            report = ConformanceReport(t, p, s, report.checks + extra)
            n_checks += len(report.checks)
            if on_case is not None:
                on_case(report)
            if not report.ok:
                failures.append(report)
    return SuiteReport(count, depth, seed, n_checks, tuple(failures))


register(Check, "CHECK", "check", name=STR, ok=BOOL, detail=STR)
register(ConformanceReport, "CONFORMANCE", "conformance",
         phrase=Node("phrase"), place=NAT, seed=NAT, checks=Nodes("check"))
register(SuiteReport, "SUITE", "suite",
         count=NAT, depth=NAT, seed=NAT, checks_run=NAT, failures=Nodes("conformance"))
